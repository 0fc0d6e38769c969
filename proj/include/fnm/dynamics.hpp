#pragma once

#include <Eigen/Dense>
#include <complex>
#include <iosfwd>
#include <utility>
#include <vector>

#include "fnm/spectrum.hpp"
#include "fnm/wavepacket.hpp"

namespace fnm {

struct PairObservables {
    double t = 0.0;
    double p11 = 0.0;
    double p22 = 0.0;
    Complex p12 = 0.0;
};

std::pair<double, double> lambdas(const PairObservables& o);
double distance(const PairObservables& o);

// Both states are mapped onto the kernel's mode list; evaluation batches
// time samples into fixed-width blocks and does one matrix product per block.
class PairEvolution {
public:
    PairEvolution(const ExpandedState& s1, const ExpandedState& s2, const OverlapKernel& kernel);

    PairObservables at(double t) const;
    std::vector<PairObservables> evaluate(const std::vector<double>& times, int jobs = 1) const;

    std::size_t size() const { return static_cast<std::size_t>(energies_.size()); }

    static constexpr int kBlock = 32;

private:
    void evaluate_block(const double* times, int count, PairObservables* out) const;

    Eigen::VectorXd energies_;
    Eigen::VectorXcd c1_, c2_;
    const Eigen::MatrixXcd* delta_;
};

PairObservables pair_observables(const ExpandedState& s1, const ExpandedState& s2, const OverlapKernel& kernel, double t);

struct TimeGrid {
    double t_min = 0.0;
    double t_max = 1.0;
    int n_t = 2;

    double at(int i) const { return n_t == 1 ? t_min : t_min + (t_max - t_min) * i / (n_t - 1); }
    std::vector<double> points() const;
    void validate() const;
};

struct TraceSample {
    PairObservables obs;
    double D = 0.0;
    double sigma = 0.0;
};

struct DistanceTrace {
    TimeGrid grid;
    std::vector<TraceSample> samples;
};

// sigma by central differences, one-sided at the ends
void fill_rates(DistanceTrace& tr);
DistanceTrace make_trace(const TimeGrid& grid, const std::vector<PairObservables>& obs);
DistanceTrace trace_over_grid(const PairEvolution& ev, const TimeGrid& grid, int jobs = 1);
DistanceTrace trace_over_grid(const ExpandedState& s1, const ExpandedState& s2, const OverlapKernel& kernel,
                              const TimeGrid& grid, int jobs = 1);

double nm_integral(const DistanceTrace& tr);

void write_trace_csv(std::ostream& os, const DistanceTrace& tr);

}  // namespace fnm
