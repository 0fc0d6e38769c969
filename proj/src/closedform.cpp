#include "fnm/closedform.hpp"

#include <cmath>
#include <stdexcept>

#include "fnm/specfun.hpp"

namespace fnm {

namespace {

const double kSqrt8 = std::sqrt(8.0);

double center(const FreePairConfig& c, int i) {
    if (i == 1) return c.x1;
    if (i == 2) return c.x2;
    throw std::invalid_argument("packet index must be 1 or 2");
}

double sigma_t(const FreePairConfig& c, double t) { return std::sqrt(t * t / (c.sigma * c.sigma) + c.sigma * c.sigma); }

void check_outside(const FreePairConfig& c) {
    c.validate();
    if (c.x1 < 0.5 * c.L_A) throw std::invalid_argument("packet 1 starts inside region A; no window is predicted");
}

}  // namespace

void FreePairConfig::validate() const {
    if (!(sigma > 0.0)) throw std::invalid_argument("sigma must be positive");
    if (!(L_A > 0.0)) throw std::invalid_argument("L_A must be positive");
}

Complex pij_infinite(const FreePairConfig& c, int i, int j, double t) {
    c.validate();
    if (t < 0.0) throw std::invalid_argument("t must be non-negative");
    const double xi = center(c, i), xj = center(c, j);
    const double dx = xi - xj;
    const double s2 = c.sigma * c.sigma;
    const double st = sigma_t(c, t);
    const double lp = c.L_A + (xi + xj), lm = c.L_A - (xi + xj);
    const double den = kSqrt8 * st * s2;
    const double log_pre = -dx * dx / (8.0 * s2);
    const Complex z1(lp * s2 / den, t * dx / den);
    const Complex z2(lm * s2 / den, -t * dx / den);
    return 0.5 * (specfun::erf_scaled(z1, log_pre) + specfun::erf_scaled(z2, log_pre));
}

PairObservables observables_infinite(const FreePairConfig& c, double t) {
    PairObservables o;
    o.t = t;
    o.p11 = pij_infinite(c, 1, 1, t).real();
    o.p22 = pij_infinite(c, 2, 2, t).real();
    o.p12 = pij_infinite(c, 1, 2, t);
    return o;
}

// D^2 = (1/8) sum_j [Erf((L_A - 2x_j)/(sqrt8 s_t)) + Erf((L_A + 2x_j)/(sqrt8 s_t))]^2
//     - (1/4) e^{-dx^2/(4 s^2)} |Erf(L_A/(sqrt8 s_t) + i t dx/(sqrt8 s_t s^2)) + conj|^2
double d_infinite(const FreePairConfig& c, double t) {
    c.validate();
    if (std::abs(c.x1 + c.x2) > 1e-12 * std::max(1.0, std::abs(c.x1)))
        throw std::invalid_argument("d_infinite assumes the symmetric placement x2 = -x1");
    const double st = sigma_t(c, t);
    const double s2 = c.sigma * c.sigma;
    double diag = 0.0;
    for (double x : {c.x1, c.x2}) {
        const double e = specfun::erf_real((c.L_A - 2.0 * x) / (kSqrt8 * st)) + specfun::erf_real((c.L_A + 2.0 * x) / (kSqrt8 * st));
        diag += e * e;
    }
    const double dx = c.x1 - c.x2;
    const Complex z(c.L_A / (kSqrt8 * st), t * dx / (kSqrt8 * st * s2));
    const double log_pre = -dx * dx / (8.0 * s2);
    const Complex cross = specfun::erf_scaled(z, log_pre) + specfun::erf_scaled(std::conj(z), log_pre);
    const double d2 = diag / 8.0 - std::norm(cross) / 4.0;
    return std::sqrt(std::max(d2, 0.0));
}

double tau_m(const FreePairConfig& c) {
    check_outside(c);
    return c.sigma * (c.x1 + 0.5 * c.L_A) / 2.0;
}

bool nm_window_exists(const FreePairConfig& c) {
    check_outside(c);
    return c.sigma < (c.x1 + 0.5 * c.L_A) / 2.0;
}

DistanceTrace trace_infinite(const FreePairConfig& c, const TimeGrid& grid) {
    const auto ts = grid.points();
    std::vector<PairObservables> obs(ts.size());
    for (std::size_t i = 0; i < ts.size(); ++i) obs[i] = observables_infinite(c, ts[i]);
    return make_trace(grid, obs);
}

}  // namespace fnm
