#include "fnm/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "fnm/csv.hpp"
#include "fnm/errors.hpp"
#include "fnm/parallel.hpp"

namespace fnm {

namespace {

constexpr double kPi = 3.14159265358979323846;

double sign_of(double x) { return x >= 0.0 ? 1.0 : -1.0; }

// 2 sin(kappa h) / kappa, the integral of e^{i kappa x} over [-h, h]
double sym_window(double kappa, double h) {
    const double s = kappa * h;
    if (std::abs(s) < 1e-4) return 2.0 * h * (1.0 - s * s / 6.0 + s * s * s * s / 120.0);
    return 2.0 * std::sin(s) / kappa;
}

Complex window(double kappa, double c, double h) { return std::polar(sym_window(kappa, h), kappa * c); }

Mat2 phase_matrix(double k, double L) {
    Mat2 p = Mat2::Zero();
    p(0, 0) = std::polar(1.0, k * L);
    p(1, 1) = std::polar(1.0, -k * L);
    return p;
}

// B1 - B2^{-1} P^{-1}: its null space holds the A amplitudes of modes at k.
// Entries grow like V/k, not (V/k)^2 as in M - I.
Mat2 closure_residual(const RingGeometry& g, double k) {
    const double x1 = 0.5 * g.L_A;
    const double x2 = 0.5 * g.L_A + g.L_B;
    const Mat2 b1 = barrier_matrix(g.V1, x1, k);
    const Mat2 b2inv = 2.0 * Mat2::Identity() - barrier_matrix(g.V2, x2, k);
    return b1 - b2inv * phase_matrix(-k, g.L());
}

Eigen::Vector2cd null_vector(const Mat2& q) {
    const double n0 = q.row(0).squaredNorm();
    const double n1 = q.row(1).squaredNorm();
    const int r = n0 >= n1 ? 0 : 1;
    return Eigen::Vector2cd(q(r, 1), -q(r, 0));
}

EigenMode mode_from_amps(const RingGeometry& g, double k, const Eigen::Vector2cd& vA) {
    EigenMode m;
    m.k = k;
    m.E = k * k;
    const Eigen::Vector2cd vB = barrier_matrix(g.V1, 0.5 * g.L_A, k) * vA;
    m.A = {vA(0), vA(1)};
    m.B = {vB(0), vB(1)};
    return m;
}

void scale_mode(EigenMode& m, Complex s) {
    m.A.alpha *= s;
    m.A.beta *= s;
    m.B.alpha *= s;
    m.B.beta *= s;
}

// rotate to beta = conj(alpha) (real-valued phi) and fix the overall sign
void fix_phase(EigenMode& m) {
    const bool use_a = std::abs(m.A.alpha) >= std::abs(m.B.alpha);
    const Complex a = use_a ? m.A.alpha : m.B.alpha;
    const Complex b = use_a ? m.A.beta : m.B.beta;
    if (std::abs(a) > 1e-300 && std::abs(b) > 1e-300) {
        const double theta = -0.5 * (std::arg(a) + std::arg(b));
        scale_mode(m, std::polar(1.0, theta));
    }
    const Complex ref = std::abs(m.A.alpha) >= std::abs(m.B.alpha) ? m.A.alpha : m.B.alpha;
    const double lead = std::abs(ref.real()) > 1e-12 * std::abs(ref) ? ref.real() : ref.imag();
    if (lead < 0.0) scale_mode(m, -1.0);
}

void normalize(EigenMode& m, const RingGeometry& g) {
    const double n2 = mode_norm_sq(m, g);
    if (!(n2 > 0.0) || !std::isfinite(n2)) throw SpectralDiagnostic("degenerate mode amplitude at k = " + std::to_string(m.k));
    scale_mode(m, 1.0 / std::sqrt(n2));
}

// M = I at k, up to rounding
bool is_degenerate(const RingGeometry& g, double k) {
    const double scale = 1.0 + std::abs(g.V1 / (2.0 * k)) + std::abs(g.V2 / (2.0 * k));
    return closure_residual(g, k).norm() <= 1e-9 * scale;
}

// two orthonormal modes spanning the solution space at a double root; the
// first maximizes weight in region A
std::pair<EigenMode, EigenMode> doublet(const RingGeometry& g, double k) {
    const Mat2 q = closure_residual(g, k);
    Eigen::Vector2cd u1, u2;
    if (is_degenerate(g, k)) {
        u1 << 1.0, 1.0;
        u2 << Complex(0, 1), Complex(0, -1);
    } else {
        Eigen::JacobiSVD<Mat2> svd(q, Eigen::ComputeFullV);
        u1 = svd.matrixV().col(1);
        u2 = svd.matrixV().col(0);
    }
    EigenMode m1 = mode_from_amps(g, k, u1);
    EigenMode m2 = mode_from_amps(g, k, u2);
    const EigenMode base[2] = {m1, m2};

    Eigen::Matrix2cd gram, gram_a;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            gram(i, j) = mode_inner(base[i], base[j], g);
            gram_a(i, j) = region_overlap(base[i].A, k, base[j].A, k, 0.0, 0.5 * g.L_A);
        }
    gram = 0.5 * (gram + gram.adjoint().eval());
    gram_a = 0.5 * (gram_a + gram_a.adjoint().eval());

    Eigen::Matrix2cd coeff;
    const double off = std::abs(gram_a(0, 1)) + std::abs(gram(0, 1));
    const double diff = std::abs(gram_a(0, 0) / gram(0, 0) - gram_a(1, 1) / gram(1, 1));
    if (off < 1e-13 && diff < 1e-13) {
        coeff = Eigen::Matrix2cd::Identity();  // tie: keep the basis order
    } else {
        Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::Matrix2cd> es(gram_a, gram);
        coeff.col(0) = es.eigenvectors().col(1);
        coeff.col(1) = es.eigenvectors().col(0);
    }
    EigenMode out[2];
    for (int c = 0; c < 2; ++c) {
        const Eigen::Vector2cd v = coeff(0, c) * u1 + coeff(1, c) * u2;
        out[c] = mode_from_amps(g, k, v);
        fix_phase(out[c]);
        normalize(out[c], g);
    }
    return {out[0], out[1]};
}

// B1^{-1} - P B2, the residual of a turn that starts in region B
Mat2 closure_residual_b(const RingGeometry& g, double k) {
    const Mat2 b1inv = 2.0 * Mat2::Identity() - barrier_matrix(g.V1, 0.5 * g.L_A, k);
    return b1inv - phase_matrix(k, g.L()) * barrier_matrix(g.V2, 0.5 * g.L_A + g.L_B, k);
}

EigenMode single_mode(const RingGeometry& g, double k) {
    EigenMode m = mode_from_amps(g, k, null_vector(closure_residual(g, k)));
    // the small region's amplitudes come out of a cancellation when mapped
    // across the barrier; take them from their own null vector instead
    if (std::abs(m.B.alpha) + std::abs(m.B.beta) < std::abs(m.A.alpha) + std::abs(m.A.beta)) {
        const Eigen::Vector2cd vB = null_vector(closure_residual_b(g, k));
        const Eigen::Vector2cd vA = (2.0 * Mat2::Identity() - barrier_matrix(g.V1, 0.5 * g.L_A, k)) * vB;
        m.A = {vA(0), vA(1)};
        m.B = {vB(0), vB(1)};
    }
    fix_phase(m);
    normalize(m, g);
    return m;
}

struct Root {
    double k;
    bool twofold;
};

template <class F>
double bisect(F&& fn, double lo, double hi, double flo, double tol) {
    // run to machine resolution when tol is 0
    for (int it = 0; it < 300 && hi - lo > tol; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        const double fm = fn(mid);
        if (sign_of(fm) == sign_of(flo)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

std::vector<Root> scan_roots(const RingGeometry& g, double k_max, double step, const FindModesOptions& opt) {
    const double k_start = 1e-8 * kPi / g.L();
    const std::size_t n = static_cast<std::size_t>(std::ceil((k_max - k_start) / step)) + 1;
    std::vector<double> ks(n), f(n), fp(n);
    parallel_for(n, opt.jobs, [&](std::size_t i) {
        ks[i] = i + 1 == n ? k_max : k_start + step * static_cast<double>(i);
        f[i] = quantization_function(g, ks[i]);
        fp[i] = quantization_derivative(g, ks[i]);
    });

    auto fq = [&](double k) { return quantization_function(g, k); };
    auto fd = [&](double k) { return quantization_derivative(g, k); };
    std::vector<Root> roots;
    auto monotone = [&](double lo, double hi, double flo, double fhi) {
        if (sign_of(flo) != sign_of(fhi)) roots.push_back({bisect(fq, lo, hi, flo, 0.0), false});
    };
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double lo = ks[i], hi = ks[i + 1];
        if (sign_of(fp[i]) != sign_of(fp[i + 1])) {
            const double ke = bisect(fd, lo, hi, fp[i], 0.0);
            const double fe = fq(ke);
            const bool touching = std::abs(fe) <= opt.tangential_tol;
            if (touching && is_degenerate(g, ke)) {
                roots.push_back({ke, true});
            } else if (sign_of(fe) != sign_of(f[i]) || sign_of(fe) != sign_of(f[i + 1])) {
                monotone(lo, ke, f[i], fe);
                monotone(ke, hi, fe, f[i + 1]);
            } else if (touching) {
                roots.push_back({ke, true});
            }
        } else {
            monotone(lo, hi, f[i], f[i + 1]);
        }
    }
    std::sort(roots.begin(), roots.end(), [](const Root& a, const Root& b) { return a.k < b.k; });
    return roots;
}

}  // namespace

void RingGeometry::validate() const {
    if (!(L_A > 0.0) || !(L_B > 0.0)) throw std::invalid_argument("ring lengths must be positive");
    if (!(V1 >= 0.0) || !(V2 >= 0.0)) throw std::invalid_argument("barrier strengths must be non-negative");
}

Complex EigenMode::value(double x, const RingGeometry& g) const {
    const double L = g.L();
    x = x - L * std::floor((x + 0.5 * g.L_A) / L);
    const PlaneWaveAmps& r = x <= 0.5 * g.L_A ? A : B;
    return r.alpha * std::polar(1.0, k * x) + r.beta * std::polar(1.0, -k * x);
}

Complex EigenMode::derivative(double x, const RingGeometry& g) const {
    const double L = g.L();
    x = x - L * std::floor((x + 0.5 * g.L_A) / L);
    const PlaneWaveAmps& r = x <= 0.5 * g.L_A ? A : B;
    return Complex(0, k) * (r.alpha * std::polar(1.0, k * x) - r.beta * std::polar(1.0, -k * x));
}

Mat2 barrier_matrix(double V, double x_b, double k) {
    const Complex gk(0.0, -V / (2.0 * k));
    const Complex e2 = std::polar(1.0, 2.0 * k * x_b);
    Mat2 b;
    b(0, 0) = 1.0 + gk;
    b(0, 1) = gk * std::conj(e2);
    b(1, 0) = -gk * e2;
    b(1, 1) = 1.0 - gk;
    return b;
}

Mat2 transfer_matrix(const RingGeometry& g, double k) {
    return phase_matrix(k, g.L()) * barrier_matrix(g.V2, 0.5 * g.L_A + g.L_B, k) * barrier_matrix(g.V1, 0.5 * g.L_A, k);
}

// tr M - 2 written out; the product form cancels catastrophically at large V/k
double quantization_function(const RingGeometry& g, double k) {
    const double L = g.L();
    return 2.0 * std::cos(k * L) + (g.V1 + g.V2) / k * std::sin(k * L) +
           g.V1 * g.V2 / (k * k) * std::sin(k * g.L_A) * std::sin(k * g.L_B) - 2.0;
}

double quantization_derivative(const RingGeometry& g, double k) {
    const double L = g.L(), S = g.V1 + g.V2, P = g.V1 * g.V2;
    const double sA = std::sin(k * g.L_A), cA = std::cos(k * g.L_A);
    const double sB = std::sin(k * g.L_B), cB = std::cos(k * g.L_B);
    return -2.0 * L * std::sin(k * L) - S / (k * k) * std::sin(k * L) + S * L / k * std::cos(k * L) -
           2.0 * P / (k * k * k) * sA * sB + P / (k * k) * (g.L_A * cA * sB + g.L_B * sA * cB);
}

std::vector<EigenMode> free_modes(const RingGeometry& g, int n_max) {
    g.validate();
    if (!g.is_free()) throw std::invalid_argument("free_modes requires V1 = V2 = 0");
    if (n_max < 0) throw std::invalid_argument("n_max must be non-negative");
    const double L = g.L();
    const double amp = 1.0 / std::sqrt(L);
    std::vector<EigenMode> out;
    for (int n = -n_max; n <= n_max; ++n) {
        EigenMode m;
        m.k = 2.0 * kPi * n / L;
        m.E = m.k * m.k;
        m.A = {amp, 0.0};
        m.B = m.A;
        out.push_back(m);
    }
    return out;
}

std::vector<EigenMode> find_modes(const RingGeometry& g, double k_max, const FindModesOptions& opt) {
    g.validate();
    if (!(k_max > 0.0)) throw std::invalid_argument("k_max must be positive");
    const double L = g.L();
    double step = opt.grid_step_factor * kPi / L;
    const double weyl = k_max * L / kPi;
    std::vector<Root> roots;
    std::size_t count = 0;
    for (int attempt = 0;; ++attempt) {
        roots = scan_roots(g, k_max, step, opt);
        count = 0;
        for (const Root& r : roots) count += r.twofold ? 2 : 1;
        if (std::abs(static_cast<double>(count) - weyl) <= opt.weyl_tolerance) break;
        if (attempt >= opt.max_refinements) {
            std::ostringstream msg;
            msg << "mode count " << count << " below k_max = " << k_max << " disagrees with Weyl estimate "
                << weyl << " after " << attempt << " grid refinements";
            throw SpectralDiagnostic(msg.str());
        }
        step *= 0.5;
    }

    std::vector<EigenMode> modes;
    if (g.is_free()) {
        EigenMode zero;
        zero.A = {0.5 / std::sqrt(L), 0.5 / std::sqrt(L)};
        zero.B = zero.A;
        modes.push_back(zero);
    }
    for (const Root& r : roots) {
        if (r.twofold) {
            auto [a, b] = doublet(g, r.k);
            modes.push_back(a);
            modes.push_back(b);
        } else {
            modes.push_back(single_mode(g, r.k));
        }
    }
    return modes;
}

Complex region_overlap(const PlaneWaveAmps& a, double k, const PlaneWaveAmps& b, double q, double c, double h) {
    return std::conj(a.alpha) * b.alpha * window(q - k, c, h) + std::conj(a.alpha) * b.beta * window(-q - k, c, h) +
           std::conj(a.beta) * b.alpha * window(q + k, c, h) + std::conj(a.beta) * b.beta * window(k - q, c, h);
}

Complex mode_inner(const EigenMode& a, const EigenMode& b, const RingGeometry& g) {
    const double cB = 0.5 * g.L_A + 0.5 * g.L_B;
    return region_overlap(a.A, a.k, b.A, b.k, 0.0, 0.5 * g.L_A) + region_overlap(a.B, a.k, b.B, b.k, cB, 0.5 * g.L_B);
}

double mode_norm_sq(const EigenMode& m, const RingGeometry& g) { return mode_inner(m, m, g).real(); }

double region_a_weight(const EigenMode& m, const RingGeometry& g) {
    return region_overlap(m.A, m.k, m.A, m.k, 0.0, 0.5 * g.L_A).real();
}

OverlapKernel overlap_kernel(const std::vector<EigenMode>& modes, const RingGeometry& g) {
    std::vector<std::size_t> ids(modes.size());
    for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = i;
    return overlap_kernel(modes, ids, g, 1);
}

OverlapKernel overlap_kernel(const std::vector<EigenMode>& spectrum, const std::vector<std::size_t>& ids,
                             const RingGeometry& g, int jobs) {
    OverlapKernel K;
    K.mode_ids = ids;
    K.modes.reserve(ids.size());
    for (std::size_t id : ids) K.modes.push_back(spectrum.at(id));
    const std::size_t n = ids.size();
    const double h = 0.5 * g.L_A;
    K.delta.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    parallel_for(n, jobs, [&](std::size_t i) {
        const EigenMode& a = K.modes[i];
        for (std::size_t j = i; j < n; ++j) {
            const EigenMode& b = K.modes[j];
            const double jm = sym_window(a.k - b.k, h);
            const double jp = sym_window(a.k + b.k, h);
            const Complex v = jm * (std::conj(a.A.alpha) * b.A.alpha + std::conj(a.A.beta) * b.A.beta) +
                              jp * (std::conj(a.A.alpha) * b.A.beta + std::conj(a.A.beta) * b.A.alpha);
            K.delta(i, j) = v;
        }
    });
    for (std::size_t i = 0; i < n; ++i) {
        K.delta(i, i) = K.delta(i, i).real();
        for (std::size_t j = i + 1; j < n; ++j) K.delta(j, i) = std::conj(K.delta(i, j));
    }
    return K;
}

void write_mode_table(std::ostream& os, const std::vector<EigenMode>& modes) {
    os << "index,k,E,alphaA_re,alphaA_im,betaA_re,betaA_im,alphaB_re,alphaB_im,betaB_re,betaB_im\n";
    for (std::size_t i = 0; i < modes.size(); ++i) {
        const EigenMode& m = modes[i];
        csv::write_row(os, {std::to_string(i), csv::num(m.k), csv::num(m.E), csv::num(m.A.alpha.real()),
                            csv::num(m.A.alpha.imag()), csv::num(m.A.beta.real()), csv::num(m.A.beta.imag()),
                            csv::num(m.B.alpha.real()), csv::num(m.B.alpha.imag()), csv::num(m.B.beta.real()),
                            csv::num(m.B.beta.imag())});
    }
}

}  // namespace fnm
