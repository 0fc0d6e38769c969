#include "fnm/specfun.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace fnm::specfun {

namespace {

constexpr double kSqrtPi = 1.77245385090551602729816748334;
constexpr double kInvSqrtPi = 0.564189583547756286948079451561;
constexpr double kMaxExp = 709.0;

template <class T>
struct cplx {
    T re, im;
};

template <class T>
cplx<T> mul(cplx<T> a, cplx<T> b) {
    return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
}

// 2/sqrt(pi) to the working precision of T
template <class T>
T two_over_sqrt_pi_in() {
    const T pi = T(3.141592653589793) + T(1.2246467991473532e-16) + T(-2.9947698097183397e-33);
    T s = T(1.7724538509055160273L);
    for (int i = 0; i < 3; ++i) s = (s + pi / s) / T(2);
    return T(2) / s;
}

// Maclaurin series of w in the variable iz, carried in type T.
// Terms peak near |z|^2, so T must hold about exp(|z|^2) * 1e-17 of headroom.
template <class T>
Complex taylor_w(Complex z) {
    const cplx<T> iz{T(-z.imag()), T(z.real())};
    const cplx<T> iz2 = mul(iz, iz);
    const T r2 = T(std::norm(z));
    const T tol = T(1e-20);

    cplx<T> even{T(1), T(0)};
    const T two_over_sqrt_pi = two_over_sqrt_pi_in<T>();
    cplx<T> odd{iz.re * two_over_sqrt_pi, iz.im * two_over_sqrt_pi};
    cplx<T> sum{even.re + odd.re, even.im + odd.im};

    // a_{n+2} = a_n * (iz)^2 / (n/2 + 1)
    for (int n = 0; n < 2000; n += 2) {
        const T de = T(n) / T(2) + T(1);
        const T d_o = T(n + 1) / T(2) + T(1);
        even = mul(even, iz2);
        even.re /= de;
        even.im /= de;
        odd = mul(odd, iz2);
        odd.re /= d_o;
        odd.im /= d_o;
        sum.re += even.re + odd.re;
        sum.im += even.im + odd.im;
        if (de > r2 + T(2)) {
            const T mag = (even.re < 0 ? -even.re : even.re) + (even.im < 0 ? -even.im : even.im)
                        + (odd.re < 0 ? -odd.re : odd.re) + (odd.im < 0 ? -odd.im : odd.im);
            const T smag = (sum.re < 0 ? -sum.re : sum.re) + (sum.im < 0 ? -sum.im : sum.im);
            if (mag < tol * smag) break;
        }
    }
    return {static_cast<double>(sum.re), static_cast<double>(sum.im)};
}

// Laplace continued fraction, evaluated bottom-up with n terms.
Complex laplace_cf(Complex z, int n) {
    Complex t = z;
    for (int m = n; m >= 1; --m) t = z - (0.5 * m) / t;
    return Complex(0.0, kInvSqrtPi) / t;
}

Complex laplace_cf_adaptive(Complex z) {
    int n = 16;
    Complex prev = laplace_cf(z, n);
    while (n < 8192) {
        n *= 2;
        const Complex cur = laplace_cf(z, n);
        if (std::abs(cur - prev) <= 1e-16 * std::abs(cur)) return cur;
        prev = cur;
    }
    return prev;
}

// Upper half plane (Im z >= 0).
Complex faddeeva_upper(Complex z) {
    const double r = std::abs(z);
    if (r < 3.0) return taylor_w<long double>(z);
    if (r < 6.0 && z.imag() < 1.5) return taylor_w<__float128>(z);
    return laplace_cf_adaptive(z);
}

Complex checked_exp(Complex a) {
    if (a.real() > kMaxExp) throw std::overflow_error("exponent exceeds double range");
    return std::exp(a);
}

// exp(c - z^2) * w(i s z) with s = sign(Re z); the exponent real part is
// c - Re(z)^2 + Im(z)^2.
Complex erf_tail(Complex z, double c, double s) {
    const Complex arg = Complex(-s * z.imag(), s * z.real());
    return checked_exp(Complex(c, 0.0) - z * z) * faddeeva_upper(arg);
}

Complex erf_series(Complex z) {
    const Complex mz2 = -z * z;
    Complex term = z;
    Complex sum = z;
    for (int n = 1; n < 200; ++n) {
        term *= mz2 / double(n);
        const Complex add = term / double(2 * n + 1);
        sum += add;
        if (std::abs(add) < 1e-18 * std::abs(sum)) break;
    }
    return 2.0 * kInvSqrtPi * sum;
}

// e^c erf(z) for z with Re z >= 0 and Im z >= 0.
Complex erf_scaled_quadrant(Complex z, double c) {
    if (std::abs(z) < 0.5) return std::exp(c) * erf_series(z);
    return std::exp(c) - erf_tail(z, c, 1.0);
}

}  // namespace

double erf_real(double x) { return std::erf(x); }

Complex faddeeva(Complex z) {
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
        throw std::domain_error("faddeeva: non-finite argument");
    if (z.imag() >= 0.0) return faddeeva_upper(z);
    const Complex mz2 = -z * z;
    if (mz2.real() > kMaxExp) throw std::overflow_error("faddeeva: lower half plane overflow");
    return 2.0 * std::exp(mz2) - faddeeva_upper(-z);
}

Complex erf_scaled(Complex z, double log_scale) {
    bool conj = false;
    double sign = 1.0;
    if (z.imag() < 0.0) {
        z = std::conj(z);
        conj = true;
    }
    if (z.real() < 0.0) {
        z = -std::conj(z);
        sign = -1.0;
    }
    // after the reductions z is in the first quadrant; -conj keeps Im >= 0
    Complex r = erf_scaled_quadrant(z, log_scale);
    if (sign < 0.0) r = -std::conj(r);
    if (conj) r = std::conj(r);
    if (!std::isfinite(r.real()) || !std::isfinite(r.imag()))
        throw std::overflow_error("erf: result exceeds double range");
    return r;
}

Complex erf_complex(Complex z) { return erf_scaled(z, 0.0); }

Complex gaussian_segment_integral(double a, double b, double k, double x0, double sigma) {
    if (!(sigma > 0.0)) throw std::invalid_argument("gaussian_segment_integral: sigma must be positive");
    if (!(b > a)) return Complex(0.0, 0.0);
    const double y = sigma * k;
    const double c = -y * y;
    const Complex za((a - x0) / (2.0 * sigma), y);
    const Complex zb((b - x0) / (2.0 * sigma), y);
    const double sa = za.real() >= 0.0 ? 1.0 : -1.0;
    const double sb = zb.real() >= 0.0 ? 1.0 : -1.0;

    // e^{-y^2} erf(u + iy) = s (e^{-y^2} - tail); the constant parts cancel
    // exactly when both endpoints lie on the same side of x0.
    Complex diff;
    const bool small_a = std::abs(za) < 0.5;
    const bool small_b = std::abs(zb) < 0.5;
    if (small_a || small_b) {
        diff = erf_scaled(zb, c) - erf_scaled(za, c);
    } else if (sa == sb) {
        diff = sa * (erf_tail(za, c, sa) - erf_tail(zb, c, sb));
    } else {
        diff = (sb - sa) * std::exp(c) - sb * erf_tail(zb, c, sb) + sa * erf_tail(za, c, sa);
    }
    return sigma * kSqrtPi * std::polar(1.0, -k * x0) * diff;
}

}  // namespace fnm::specfun
