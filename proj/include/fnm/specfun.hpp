#pragma once

#include <complex>

namespace fnm {

using Complex = std::complex<double>;

namespace specfun {

double erf_real(double x);

// w(z) = exp(-z^2) erfc(-iz). Throws std::overflow_error when the
// lower-half-plane reflection exceeds double range.
Complex faddeeva(Complex z);

Complex erf_complex(Complex z);

// exp(log_scale) * erf(z), evaluated without forming the two factors separately.
Complex erf_scaled(Complex z, double log_scale);

// Integral of exp(-i k x) exp(-(x - x0)^2 / (4 sigma^2)) over [a, b].
Complex gaussian_segment_integral(double a, double b, double k, double x0, double sigma);

}  // namespace specfun
}  // namespace fnm
