#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <utility>
#include <vector>

#include "fnm/dynamics.hpp"

namespace fnm {

struct TimeAverage {
    double d_bar = 0.0;
    double p11_bar = 0.0;
    bool converged = false;
    double t_max = 0.0;
};

// samples D on [a, b], both ends included
using TraceSource = std::function<DistanceTrace(double a, double b)>;

TimeAverage time_average(const TraceSource& source, double t_max_initial, double rel_tol = 0.01, int max_doublings = 4);

std::optional<double> tau_dec(const DistanceTrace& tr, double d_bar);
std::optional<double> tau_rec(const DistanceTrace& tr, double tau_dec, double epsilon);
std::optional<double> t_nm(const DistanceTrace& tr);
std::optional<double> first_positive_rate(const DistanceTrace& tr);

struct Fit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
};

Fit linear_fit(const std::vector<std::pair<double, double>>& pts);
Fit loglog_slope(const std::vector<std::pair<double, double>>& pts);

struct TimescaleReport {
    double d_bar = 0.0;
    double p11_bar = 0.0;
    bool converged = false;
    double epsilon_rec = 0.05;
    std::optional<double> tau_dec, tau_rec, t_nm, t_first_rise;
};

TimescaleReport make_report(const DistanceTrace& tr, const TimeAverage& avg, double epsilon_rec);

void write_report_header(std::ostream& os);
void write_report_row(std::ostream& os, const std::optional<double>& param, const TimescaleReport& r);

}  // namespace fnm
