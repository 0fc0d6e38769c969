#include "fnm/wavepacket.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "fnm/errors.hpp"
#include "fnm/parallel.hpp"
#include "fnm/specfun.hpp"

namespace fnm {

namespace {

constexpr double kCut = 12.0;  // tails beyond kCut * sigma are dropped

Complex segment(const PlaneWaveAmps& a, double k, double lo, double hi, const GaussianPacket& p) {
    lo = std::max(lo, p.x0 - kCut * p.sigma);
    hi = std::min(hi, p.x0 + kCut * p.sigma);
    if (!(hi > lo)) return 0.0;
    return std::conj(a.alpha) * specfun::gaussian_segment_integral(lo, hi, k, p.x0, p.sigma) +
           std::conj(a.beta) * specfun::gaussian_segment_integral(lo, hi, -k, p.x0, p.sigma);
}

}  // namespace

double GaussianPacket::value(double x) const {
    x -= L * std::floor(x / L + 0.5);
    const double d = x - x0;
    return C * std::exp(-d * d / (4.0 * sigma * sigma));
}

double normalization_constant(double x0, double sigma, double L) {
    if (!(sigma > 0.0) || !(L > 0.0)) throw std::invalid_argument("packet width and ring length must be positive");
    const double s8 = std::sqrt(8.0) * sigma;
    const double inv = std::sqrt(M_PI / 2.0) * sigma *
                       (specfun::erf_real((L - 2.0 * x0) / s8) + specfun::erf_real((L + 2.0 * x0) / s8));
    return 1.0 / std::sqrt(inv);
}

GaussianPacket make_packet(double x0, double sigma, double L) {
    if (!(std::abs(x0) < 0.5 * L)) throw std::invalid_argument("packet center must satisfy |x0| < L/2");
    GaussianPacket p;
    p.x0 = x0;
    p.sigma = sigma;
    p.L = L;
    p.C = normalization_constant(x0, sigma, L);
    return p;
}

Complex mode_coefficient(const GaussianPacket& p, const EigenMode& m, const RingGeometry& g) {
    const double L = g.L();
    const double a = 0.5 * g.L_A;
    // B to the left of A is B shifted by -L
    const PlaneWaveAmps left{m.B.alpha * std::polar(1.0, m.k * L), m.B.beta * std::polar(1.0, -m.k * L)};
    const Complex sum = segment(m.A, m.k, -a, a, p) + segment(m.B, m.k, a, 0.5 * L, p) +
                        segment(left, m.k, -0.5 * L, -a, p);
    return p.C * sum;
}

std::vector<Complex> mode_coefficients(const GaussianPacket& p, const std::vector<EigenMode>& modes,
                                       const RingGeometry& g, int jobs) {
    std::vector<Complex> c(modes.size());
    parallel_for(modes.size(), jobs, [&](std::size_t i) { c[i] = mode_coefficient(p, modes[i], g); });
    return c;
}

ExpandedState select_modes(const std::vector<Complex>& coeffs, double fidelity_target) {
    if (!(fidelity_target > 0.0 && fidelity_target <= 1.0)) throw std::invalid_argument("fidelity target must lie in (0, 1]");
    std::vector<std::size_t> order(coeffs.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return std::norm(coeffs[a]) > std::norm(coeffs[b]); });
    ExpandedState s;
    for (const Complex& c : coeffs) s.available += std::norm(c);
    double acc = 0.0;
    std::size_t used = 0;
    while (used < order.size() && acc < fidelity_target) acc += std::norm(coeffs[order[used++]]);
    if (acc < fidelity_target) {
        std::ostringstream msg;
        msg << "supplied modes reach fidelity " << acc << " < target " << fidelity_target << "; raise k_max";
        throw InsufficientModes(msg.str(), acc, fidelity_target);
    }
    order.resize(used);
    std::sort(order.begin(), order.end());
    s.ids = order;
    s.coeffs.reserve(used);
    s.fidelity = 0.0;
    for (std::size_t id : order) {
        s.coeffs.push_back(coeffs[id]);
        s.fidelity += std::norm(coeffs[id]);
    }
    return s;
}

ExpandedState expand(const GaussianPacket& p, const std::vector<EigenMode>& modes, const RingGeometry& g,
                     double fidelity_target, int jobs) {
    return select_modes(mode_coefficients(p, modes, g, jobs), fidelity_target);
}

long n_star_estimate(double L, double sigma, double epsilon) {
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw std::invalid_argument("epsilon must lie in (0, 1)");
    const double n = (L / sigma) * std::sqrt(-std::log(epsilon));
    // absorb rounding in log/sqrt so exact integers are not bumped up
    return static_cast<long>(std::ceil(n * (1.0 - 1e-12)));
}

}  // namespace fnm
