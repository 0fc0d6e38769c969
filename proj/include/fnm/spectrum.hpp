#pragma once

#include <Eigen/Dense>
#include <array>
#include <complex>
#include <iosfwd>
#include <vector>

namespace fnm {

using Complex = std::complex<double>;

struct RingGeometry {
    double L_A = 2.0;
    double L_B = 1.0;
    double V1 = 0.0;  // at x = +L_A/2
    double V2 = 0.0;  // at x = -L_A/2 (equivalently L_A/2 + L_B)

    double L() const { return L_A + L_B; }
    bool is_free() const { return V1 == 0.0 && V2 == 0.0; }
    void validate() const;
};

struct PlaneWaveAmps {
    Complex alpha;
    Complex beta;
};

// phi(x) = alpha_r e^{ikx} + beta_r e^{-ikx} on region r.  Region A is
// [-L_A/2, L_A/2], region B is [L_A/2, L_A/2 + L_B].
struct EigenMode {
    double k = 0.0;
    double E = 0.0;
    PlaneWaveAmps A;
    PlaneWaveAmps B;

    Complex value(double x, const RingGeometry& g) const;
    Complex derivative(double x, const RingGeometry& g) const;
};

using Mat2 = Eigen::Matrix2cd;

// matching matrix for the barrier at x_b, acting on global (alpha, beta)
Mat2 barrier_matrix(double V, double x_b, double k);

// one full turn starting in region A
Mat2 transfer_matrix(const RingGeometry& g, double k);

double quantization_function(const RingGeometry& g, double k);
double quantization_derivative(const RingGeometry& g, double k);

std::vector<EigenMode> free_modes(const RingGeometry& g, int n_max);

struct FindModesOptions {
    double grid_step_factor = 0.1;  // in units of pi/L
    double tangential_tol = 1e-6;
    int weyl_tolerance = 3;
    int max_refinements = 3;
    int jobs = 1;
};

std::vector<EigenMode> find_modes(const RingGeometry& g, double k_max, const FindModesOptions& opt = {});

// integral of conj(phi_k) phi_q over [c - h, c + h] using one region's amplitudes
Complex region_overlap(const PlaneWaveAmps& a, double k, const PlaneWaveAmps& b, double q, double c, double h);
double mode_norm_sq(const EigenMode& m, const RingGeometry& g);
Complex mode_inner(const EigenMode& a, const EigenMode& b, const RingGeometry& g);
double region_a_weight(const EigenMode& m, const RingGeometry& g);

struct OverlapKernel {
    std::vector<EigenMode> modes;
    std::vector<std::size_t> mode_ids;  // positions in the spectrum the kernel was built from
    Eigen::MatrixXcd delta;
};

OverlapKernel overlap_kernel(const std::vector<EigenMode>& modes, const RingGeometry& g);
OverlapKernel overlap_kernel(const std::vector<EigenMode>& spectrum, const std::vector<std::size_t>& ids,
                             const RingGeometry& g, int jobs = 1);

void write_mode_table(std::ostream& os, const std::vector<EigenMode>& modes);

}  // namespace fnm
