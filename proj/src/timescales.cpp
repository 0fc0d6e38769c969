#include "fnm/timescales.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

#include "fnm/csv.hpp"

namespace fnm {

namespace {

struct Integrals {
    double d = 0.0;
    double p11 = 0.0;
};

Integrals trapezoid(const DistanceTrace& tr) {
    Integrals r;
    const auto& s = tr.samples;
    for (std::size_t i = 0; i + 1 < s.size(); ++i) {
        const double h = s[i + 1].obs.t - s[i].obs.t;
        r.d += 0.5 * h * (s[i].D + s[i + 1].D);
        r.p11 += 0.5 * h * (s[i].obs.p11 + s[i + 1].obs.p11);
    }
    return r;
}

double crossing(const TraceSample& a, const TraceSample& b, double level) {
    if (b.D == a.D) return b.obs.t;
    return a.obs.t + (level - a.D) / (b.D - a.D) * (b.obs.t - a.obs.t);
}

}  // namespace

TimeAverage time_average(const TraceSource& source, double t_max_initial, double rel_tol, int max_doublings) {
    if (!(t_max_initial > 0.0)) throw std::invalid_argument("time average window must be positive");
    double T = t_max_initial;
    Integrals acc = trapezoid(source(0.0, T));
    TimeAverage avg{acc.d / T, acc.p11 / T, false, T};
    for (int d = 0; d < max_doublings; ++d) {
        const Integrals more = trapezoid(source(T, 2.0 * T));
        acc.d += more.d;
        acc.p11 += more.p11;
        T *= 2.0;
        const double prev = avg.d_bar;
        avg = {acc.d / T, acc.p11 / T, false, T};
        if (std::abs(avg.d_bar - prev) <= rel_tol * std::abs(avg.d_bar)) {
            avg.converged = true;
            break;
        }
    }
    return avg;
}

std::optional<double> tau_dec(const DistanceTrace& tr, double d_bar) {
    const auto& s = tr.samples;
    if (s.empty()) return std::nullopt;
    if (s[0].D < d_bar) return s[0].obs.t;
    for (std::size_t i = 1; i < s.size(); ++i)
        if (s[i].D < d_bar) return crossing(s[i - 1], s[i], d_bar);
    return std::nullopt;
}

std::optional<double> tau_rec(const DistanceTrace& tr, double tau_dec_value, double epsilon) {
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw std::invalid_argument("epsilon must lie in (0, 1)");
    const double level = 1.0 - epsilon;
    const auto& s = tr.samples;
    for (std::size_t i = 1; i < s.size(); ++i) {
        if (s[i].obs.t <= tau_dec_value || !(s[i].D > level)) continue;
        const double t = s[i - 1].D > level ? s[i].obs.t : crossing(s[i - 1], s[i], level);
        return std::max(t, std::nextafter(tau_dec_value, INFINITY));
    }
    return std::nullopt;
}

std::optional<double> t_nm(const DistanceTrace& tr) {
    const auto& s = tr.samples;
    if (s.empty()) return std::nullopt;
    double m = s[0].D;
    for (std::size_t i = 1; i < s.size(); ++i) {
        const double level = 1.1 * m;
        if (s[i].D >= level && s[i].D > m) return crossing(s[i - 1], s[i], level);
        m = std::min(m, s[i].D);
    }
    return std::nullopt;
}

std::optional<double> first_positive_rate(const DistanceTrace& tr) {
    for (const auto& x : tr.samples)
        if (x.sigma > 0.0) return x.obs.t;
    return std::nullopt;
}

Fit linear_fit(const std::vector<std::pair<double, double>>& pts) {
    if (pts.size() < 2) throw std::invalid_argument("fit needs at least two points");
    const double n = static_cast<double>(pts.size());
    double sx = 0, sy = 0;
    for (auto [x, y] : pts) {
        sx += x;
        sy += y;
    }
    const double mx = sx / n, my = sy / n;
    double sxx = 0, sxy = 0, syy = 0;
    for (auto [x, y] : pts) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    if (sxx == 0.0) throw std::invalid_argument("fit needs distinct abscissae");
    Fit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    double ss_res = 0;
    for (auto [x, y] : pts) {
        const double r = y - (f.intercept + f.slope * x);
        ss_res += r * r;
    }
    f.r_squared = syy == 0.0 ? 1.0 : 1.0 - ss_res / syy;
    return f;
}

Fit loglog_slope(const std::vector<std::pair<double, double>>& pts) {
    if (pts.size() < 4) throw std::invalid_argument("log-log fit needs at least four points");
    std::vector<std::pair<double, double>> lg;
    lg.reserve(pts.size());
    for (auto [x, y] : pts) {
        if (!(x > 0.0) || !(y > 0.0)) throw std::invalid_argument("log-log fit needs positive entries");
        lg.emplace_back(std::log(x), std::log(y));
    }
    return linear_fit(lg);
}

TimescaleReport make_report(const DistanceTrace& tr, const TimeAverage& avg, double epsilon_rec) {
    TimescaleReport r;
    r.d_bar = avg.d_bar;
    r.p11_bar = avg.p11_bar;
    r.converged = avg.converged;
    r.epsilon_rec = epsilon_rec;
    r.tau_dec = tau_dec(tr, avg.d_bar);
    if (r.tau_dec) r.tau_rec = tau_rec(tr, *r.tau_dec, epsilon_rec);
    r.t_nm = t_nm(tr);
    r.t_first_rise = first_positive_rate(tr);
    return r;
}

void write_report_header(std::ostream& os) { os << "param,d_bar,converged,tau_dec,tau_rec,t_nm\n"; }

void write_report_row(std::ostream& os, const std::optional<double>& param, const TimescaleReport& r) {
    csv::write_row(os, {csv::num(param), csv::num(r.d_bar), r.converged ? "1" : "0", csv::num(r.tau_dec),
                        csv::num(r.tau_rec), csv::num(r.t_nm)});
}

}  // namespace fnm
