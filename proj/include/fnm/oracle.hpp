#pragma once

#include <Eigen/Dense>
#include <vector>

#include "fnm/dynamics.hpp"
#include "fnm/spectrum.hpp"
#include "fnm/wavepacket.hpp"

namespace fnm::oracle {

// periodic finite-difference ring on x_j = -L_A/2 + j dx, each delta barrier
// replaced by a rectangle of height V/w and width w
struct GridModel {
    RingGeometry geometry;
    int n = 0;
    double dx = 0.0;
    double barrier_width = 0.0;
    Eigen::MatrixXd h;
    Eigen::VectorXd x;
    Eigen::VectorXd potential;
    Eigen::VectorXd a_weight;  // fraction of each cell inside region A
};

GridModel build(const RingGeometry& g, int n, double barrier_width);

Eigen::VectorXcd sample_packet(const GridModel& m, const GaussianPacket& p);

class GridPropagator {
public:
    explicit GridPropagator(const GridModel& m);

    const Eigen::VectorXd& eigenvalues() const { return evals_; }
    Eigen::VectorXcd evolve(const Eigen::VectorXcd& psi0, double t) const;
    PairObservables pij(const Eigen::VectorXcd& psi1, const Eigen::VectorXcd& psi2, double t) const;
    double norm(const Eigen::VectorXcd& psi) const { return psi.squaredNorm() * dx_; }

private:
    Eigen::VectorXd evals_;
    Eigen::MatrixXd evecs_;
    Eigen::VectorXd a_weight_;
    double dx_;
};

PairObservables pij_grid(const GridModel& m, const GaussianPacket& p1, const GaussianPacket& p2, double t);

// two-width extrapolation w -> 0 assuming an error linear in w
PairObservables richardson(const PairObservables& fine, const PairObservables& coarse, double w_fine, double w_coarse);

}  // namespace fnm::oracle
