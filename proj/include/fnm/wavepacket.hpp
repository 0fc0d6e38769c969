#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include "fnm/spectrum.hpp"

namespace fnm {

// psi(x) = C exp(-(x - x0)^2 / (4 sigma^2)) on [-L/2, L/2), repeated around the ring
struct GaussianPacket {
    double x0 = 0.0;
    double sigma = 1.0;
    double C = 1.0;
    double L = 1.0;

    double value(double x) const;
};

double normalization_constant(double x0, double sigma, double L);
GaussianPacket make_packet(double x0, double sigma, double L);

Complex mode_coefficient(const GaussianPacket& p, const EigenMode& m, const RingGeometry& g);
std::vector<Complex> mode_coefficients(const GaussianPacket& p, const std::vector<EigenMode>& modes,
                                       const RingGeometry& g, int jobs = 1);

// retained modes, ids ascending (positions in the mode list used for expansion)
struct ExpandedState {
    std::vector<std::size_t> ids;
    std::vector<Complex> coeffs;
    double fidelity = 0.0;
    double available = 0.0;  // sum over every supplied mode
};

ExpandedState select_modes(const std::vector<Complex>& coeffs, double fidelity_target);
ExpandedState expand(const GaussianPacket& p, const std::vector<EigenMode>& modes, const RingGeometry& g,
                     double fidelity_target, int jobs = 1);

long n_star_estimate(double L, double sigma, double epsilon);

}  // namespace fnm
