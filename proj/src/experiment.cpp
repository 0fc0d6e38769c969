#include "fnm/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <ostream>

#include "fnm/closedform.hpp"
#include "fnm/csv.hpp"
#include "fnm/errors.hpp"
#include "fnm/parallel.hpp"

namespace fnm {

namespace {

// phases t*E stay accurate to ~1e-3 rad below this for the energies we meet
constexpr double kMaxAverageWindow = 1e8;

double min_sigma(const ExperimentConfig& c) { return std::min(c.packets[0].sigma, c.packets[1].sigma); }

ExpandedState expand_checked(const GaussianPacket& p, const std::vector<EigenMode>& modes, const RingGeometry& g,
                             double target, int which, int jobs) {
    try {
        return expand(p, modes, g, target, jobs);
    } catch (const InsufficientModes& e) {
        throw InsufficientModes("packet " + std::to_string(which + 1) + ": " + e.what(), e.achieved_fidelity,
                                e.target_fidelity);
    }
}

}  // namespace

double auto_k_max(const ExperimentConfig& c) {
    if (c.k_max) return *c.k_max;
    const double s = min_sigma(c);
    const double L = c.geometry.L();
    const double eps = std::max(1.0 - c.fidelity_target, 1e-12);
    const double n_star = static_cast<double>(n_star_estimate(L, s, eps));
    return std::max(12.0 / s, 4.0 * M_PI * n_star / L);
}

Spectrum compute_spectrum(const ExperimentConfig& c, double k_max, int jobs) {
    FindModesOptions opt;
    opt.jobs = jobs;
    return std::make_shared<const std::vector<EigenMode>>(find_modes(c.geometry, k_max, opt));
}

PreparedPair prepare(const ExperimentConfig& c, Spectrum spectrum, int jobs) {
    c.geometry.validate();
    PreparedPair p;
    p.config = c;
    p.k_max = auto_k_max(c);
    if (!spectrum) {
        spectrum = compute_spectrum(c, p.k_max, jobs);
    } else if (!spectrum->empty() && spectrum->back().k > p.k_max) {
        auto cut = std::make_shared<std::vector<EigenMode>>();
        for (const auto& m : *spectrum)
            if (m.k <= p.k_max) cut->push_back(m);
        spectrum = cut;
    }
    p.spectrum = spectrum;

    const double L = c.geometry.L();
    for (int i = 0; i < 2; ++i) {
        p.packets[i] = make_packet(c.x0(i), c.packets[i].sigma, L);
        p.states[i] = expand_checked(p.packets[i], *spectrum, c.geometry, c.fidelity_target, i, jobs);
    }
    std::vector<std::size_t> ids = p.states[0].ids;
    ids.insert(ids.end(), p.states[1].ids.begin(), p.states[1].ids.end());
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    p.kernel = overlap_kernel(*spectrum, ids, c.geometry, jobs);
    return p;
}

double average_window(const PreparedPair& p) {
    if (p.config.average.t_max) return *p.config.average.t_max;
    std::vector<double> e;
    for (const auto& m : p.kernel.modes) e.push_back(m.E);
    std::sort(e.begin(), e.end());
    const double scale = e.empty() ? 1.0 : std::max(e.back(), 1.0);
    double gap = INFINITY;
    for (std::size_t i = 1; i < e.size(); ++i) {
        const double d = e[i] - e[i - 1];
        if (d > 1e-12 * scale) gap = std::min(gap, d);
    }
    double T = p.config.grid.t_max;
    if (std::isfinite(gap)) T = std::max(T, 20.0 * 2.0 * M_PI / gap);
    return std::min(T, std::max(kMaxAverageWindow, p.config.grid.t_max));
}

TimeAverage average_distance(const PreparedPair& p, const PairEvolution& ev, int jobs) {
    const int n = p.config.average.n_t;
    const TraceSource src = [&](double a, double b) {
        return trace_over_grid(ev, TimeGrid{a, b, n}, jobs);
    };
    return time_average(src, average_window(p), p.config.average.rel_tol, p.config.average.max_doublings);
}

TraceRun run_trace(const ExperimentConfig& c, Spectrum spectrum) {
    TraceRun r;
    r.prepared = prepare(c, std::move(spectrum), c.jobs);
    const PairEvolution ev(r.prepared.states[0], r.prepared.states[1], r.prepared.kernel);
    r.trace = trace_over_grid(ev, c.grid, c.jobs);
    r.average = average_distance(r.prepared, ev, c.jobs);
    r.report = make_report(r.trace, r.average, c.epsilon_rec);
    return r;
}

std::vector<SweepRow> run_sweep(const ExperimentConfig& c) {
    if (!c.sweep) throw ConfigError("config field 'sweep': is required for a sweep");
    const SweepSpec& sw = *c.sweep;
    std::vector<SweepRow> rows(sw.values.size());

    // sigma leaves the geometry alone: one spectrum up to the largest k_max,
    // each row cuts it back to its own k_max
    Spectrum shared;
    if (sw.parameter == "sigma") {
        double k_max = 0.0;
        for (double v : sw.values) k_max = std::max(k_max, auto_k_max(with_parameter(c, sw.parameter, v)));
        try {
            shared = compute_spectrum(c, k_max, c.jobs);
        } catch (const std::exception& e) {
            std::cerr << "warning: shared spectrum failed (" << e.what() << "), falling back to per-row spectra\n";
        }
    }

    parallel_for(rows.size(), c.jobs, [&](std::size_t i) {
        SweepRow& row = rows[i];
        row.param = sw.values[i];
        try {
            ExperimentConfig rc = with_parameter(c, sw.parameter, row.param);
            rc.jobs = 1;
            const TraceRun run = run_trace(rc, shared);
            row.report = run.report;
            row.modes = run.prepared.kernel.modes.size();
            row.fidelity[0] = run.prepared.states[0].fidelity;
            row.fidelity[1] = run.prepared.states[1].fidelity;
        } catch (const std::exception& e) {
            row.error = e.what();
        }
    });
    for (const auto& row : rows)
        if (!row.error.empty())
            std::cerr << "warning: " << sw.parameter << " = " << csv::num(row.param) << ": " << row.error << "\n";
    return rows;
}

void write_sweep_header(std::ostream& os) { os << "param,d_bar,converged,p11_bar,tau_dec,tau_rec,t_nm\n"; }

void write_sweep_row(std::ostream& os, const SweepRow& r) {
    if (!r.report) {
        csv::write_row(os, {csv::num(r.param), "", "", "", "", "", ""});
        return;
    }
    const TimescaleReport& t = *r.report;
    csv::write_row(os, {csv::num(r.param), csv::num(t.d_bar), t.converged ? "1" : "0", csv::num(t.p11_bar),
                        csv::num(t.tau_dec), csv::num(t.tau_rec), csv::num(t.t_nm)});
}

DistanceTrace run_infinite(const ExperimentConfig& c) {
    if (!c.geometry.is_free()) throw ConfigError("config field 'geometry': the infinite-bath closed form needs V1 = V2 = 0");
    if (c.packets[0].sigma != c.packets[1].sigma)
        throw ConfigError("config field 'packets': the infinite-bath closed form needs equal widths");
    FreePairConfig f;
    f.x1 = c.x0(0);
    f.x2 = c.x0(1);
    f.sigma = c.packets[0].sigma;
    f.L_A = c.geometry.L_A;
    return trace_infinite(f, c.grid);
}

nlohmann::json describe(const PreparedPair& p) {
    nlohmann::json j;
    j["k_max"] = p.k_max;
    j["spectrum_modes"] = p.spectrum ? p.spectrum->size() : 0;
    j["kernel_modes"] = p.kernel.modes.size();
    j["retained_modes"] = {p.states[0].ids.size(), p.states[1].ids.size()};
    j["fidelity"] = {p.states[0].fidelity, p.states[1].fidelity};
    j["average_window"] = average_window(p);
    return j;
}

}  // namespace fnm
