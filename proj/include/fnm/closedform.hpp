#pragma once

#include <complex>
#include <vector>

#include "fnm/dynamics.hpp"

namespace fnm {

// infinite free line, two packets of common width sigma centered at x1, x2
struct FreePairConfig {
    double x1 = 0.0;
    double x2 = 0.0;
    double sigma = 1.0;
    double L_A = 1.0;

    void validate() const;
};

Complex pij_infinite(const FreePairConfig& c, int i, int j, double t);
PairObservables observables_infinite(const FreePairConfig& c, double t);

// requires x2 = -x1
double d_infinite(const FreePairConfig& c, double t);

double tau_m(const FreePairConfig& c);
bool nm_window_exists(const FreePairConfig& c);

DistanceTrace trace_infinite(const FreePairConfig& c, const TimeGrid& grid);

}  // namespace fnm
