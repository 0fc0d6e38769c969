#include "fnm/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "fnm/csv.hpp"
#include "fnm/errors.hpp"
#include "fnm/parallel.hpp"

namespace fnm {

namespace {

constexpr double kImagTol = 1e-10;

double discriminant(const PairObservables& o) {
    const double s = o.p11 + o.p22;
    const double d = s * s - 4.0 * std::norm(o.p12);
    if (d < -1e-9) {
        std::ostringstream msg;
        msg << "negative discriminant " << d << " at t = " << o.t << " (|p12|^2 > p11 p22)";
        throw InvariantViolation(msg.str());
    }
    return std::max(d, 0.0);
}

Eigen::VectorXcd scatter(const ExpandedState& s, const std::unordered_map<std::size_t, Eigen::Index>& pos,
                         Eigen::Index n) {
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(n);
    for (std::size_t i = 0; i < s.ids.size(); ++i) {
        const auto it = pos.find(s.ids[i]);
        if (it == pos.end())
            throw ModeMismatch("state uses mode " + std::to_string(s.ids[i]) + " absent from the overlap kernel");
        v(it->second) = s.coeffs[i];
    }
    return v;
}

}  // namespace

std::pair<double, double> lambdas(const PairObservables& o) {
    const double r = std::sqrt(discriminant(o));
    const double d = o.p11 - o.p22;
    return {0.5 * (d + r), 0.5 * (d - r)};
}

double distance(const PairObservables& o) {
    discriminant(o);
    const double d2 = 0.5 * (o.p11 * o.p11 + o.p22 * o.p22 - 2.0 * std::norm(o.p12));
    return std::sqrt(std::max(d2, 0.0));
}

PairEvolution::PairEvolution(const ExpandedState& s1, const ExpandedState& s2, const OverlapKernel& kernel)
    : delta_(&kernel.delta) {
    const Eigen::Index n = static_cast<Eigen::Index>(kernel.modes.size());
    if (kernel.delta.rows() != n || kernel.delta.cols() != n || kernel.mode_ids.size() != kernel.modes.size())
        throw ModeMismatch("overlap kernel is inconsistent with its mode list");
    std::unordered_map<std::size_t, Eigen::Index> pos;
    for (Eigen::Index i = 0; i < n; ++i) pos[kernel.mode_ids[static_cast<std::size_t>(i)]] = i;
    c1_ = scatter(s1, pos, n);
    c2_ = scatter(s2, pos, n);
    energies_.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) energies_(i) = kernel.modes[static_cast<std::size_t>(i)].E;
}

void PairEvolution::evaluate_block(const double* times, int count, PairObservables* out) const {
    const Eigen::Index n = energies_.size();
    Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(n, 2 * kBlock);
    for (int s = 0; s < count; ++s) {
        for (Eigen::Index q = 0; q < n; ++q) {
            const Complex ph = std::polar(1.0, -times[s] * energies_(q));
            a(q, s) = ph * c1_(q);
            a(q, kBlock + s) = ph * c2_(q);
        }
    }
    const Eigen::MatrixXcd y = (*delta_) * a;
    for (int s = 0; s < count; ++s) {
        const Complex p11 = a.col(s).dot(y.col(s));
        const Complex p22 = a.col(kBlock + s).dot(y.col(kBlock + s));
        const Complex p12 = a.col(s).dot(y.col(kBlock + s));
        if (std::abs(p11.imag()) > kImagTol || std::abs(p22.imag()) > kImagTol) {
            std::ostringstream msg;
            msg << "imaginary residue " << std::max(std::abs(p11.imag()), std::abs(p22.imag())) << " at t = " << times[s];
            throw InvariantViolation(msg.str());
        }
        out[s] = {times[s], p11.real(), p22.real(), p12};
    }
}

PairObservables PairEvolution::at(double t) const {
    PairObservables o;
    evaluate_block(&t, 1, &o);
    return o;
}

std::vector<PairObservables> PairEvolution::evaluate(const std::vector<double>& times, int jobs) const {
    std::vector<PairObservables> out(times.size());
    const std::size_t blocks = (times.size() + kBlock - 1) / kBlock;
    parallel_for(blocks, jobs, [&](std::size_t b) {
        const std::size_t lo = b * kBlock;
        const int count = static_cast<int>(std::min<std::size_t>(kBlock, times.size() - lo));
        evaluate_block(times.data() + lo, count, out.data() + lo);
    });
    return out;
}

PairObservables pair_observables(const ExpandedState& s1, const ExpandedState& s2, const OverlapKernel& kernel, double t) {
    return PairEvolution(s1, s2, kernel).at(t);
}

std::vector<double> TimeGrid::points() const {
    validate();
    std::vector<double> t(static_cast<std::size_t>(n_t));
    for (int i = 0; i < n_t; ++i) t[static_cast<std::size_t>(i)] = at(i);
    return t;
}

void TimeGrid::validate() const {
    if (n_t < 2) throw std::invalid_argument("time grid needs n_t >= 2");
    if (!(t_min < t_max)) throw std::invalid_argument("time grid needs t_min < t_max");
}

void fill_rates(DistanceTrace& tr) {
    auto& s = tr.samples;
    const std::size_t n = s.size();
    if (n < 2) {
        for (auto& x : s) x.sigma = 0.0;
        return;
    }
    s[0].sigma = (s[1].D - s[0].D) / (s[1].obs.t - s[0].obs.t);
    s[n - 1].sigma = (s[n - 1].D - s[n - 2].D) / (s[n - 1].obs.t - s[n - 2].obs.t);
    for (std::size_t i = 1; i + 1 < n; ++i)
        s[i].sigma = (s[i + 1].D - s[i - 1].D) / (s[i + 1].obs.t - s[i - 1].obs.t);
}

DistanceTrace make_trace(const TimeGrid& grid, const std::vector<PairObservables>& obs) {
    DistanceTrace tr;
    tr.grid = grid;
    tr.samples.resize(obs.size());
    for (std::size_t i = 0; i < obs.size(); ++i) {
        tr.samples[i].obs = obs[i];
        tr.samples[i].D = distance(obs[i]);
    }
    fill_rates(tr);
    return tr;
}

DistanceTrace trace_over_grid(const PairEvolution& ev, const TimeGrid& grid, int jobs) {
    return make_trace(grid, ev.evaluate(grid.points(), jobs));
}

DistanceTrace trace_over_grid(const ExpandedState& s1, const ExpandedState& s2, const OverlapKernel& kernel,
                              const TimeGrid& grid, int jobs) {
    return trace_over_grid(PairEvolution(s1, s2, kernel), grid, jobs);
}

double nm_integral(const DistanceTrace& tr) {
    double acc = 0.0;
    const auto& s = tr.samples;
    for (std::size_t i = 0; i + 1 < s.size(); ++i) {
        const double a = std::max(s[i].sigma, 0.0), b = std::max(s[i + 1].sigma, 0.0);
        acc += 0.5 * (a + b) * (s[i + 1].obs.t - s[i].obs.t);
    }
    return acc;
}

void write_trace_csv(std::ostream& os, const DistanceTrace& tr) {
    os << "t,p11,p22,p12_re,p12_im,D,sigma\n";
    for (const auto& s : tr.samples)
        csv::write_row(os, {csv::num(s.obs.t), csv::num(s.obs.p11), csv::num(s.obs.p22), csv::num(s.obs.p12.real()),
                            csv::num(s.obs.p12.imag()), csv::num(s.D), csv::num(s.sigma)});
}

}  // namespace fnm
