#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "fnm/config.hpp"
#include "fnm/errors.hpp"
#include "fnm/experiment.hpp"
#include "fnm/oracle.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Common {
    std::string config;
    std::string out = ".";
    int jobs = 1;
    std::optional<double> epsilon_rec;
    std::optional<double> fidelity;
};

void add_common(CLI::App* sub, Common& c) {
    sub->add_option("-c,--config", c.config, "experiment config (JSON)")->required();
    sub->add_option("-o,--out", c.out, "output directory");
    sub->add_option("--jobs", c.jobs, "worker threads (0 = all cores)")->check(CLI::NonNegativeNumber);
    sub->add_option("--epsilon-rec", c.epsilon_rec, "recurrence threshold epsilon");
    sub->add_option("--fidelity", c.fidelity, "expansion fidelity target");
}

fnm::ExperimentConfig load(const Common& c) {
    fnm::ExperimentConfig cfg = fnm::load_config(c.config);
    cfg.jobs = c.jobs;
    if (c.epsilon_rec) {
        if (!(*c.epsilon_rec > 0.0 && *c.epsilon_rec < 1.0)) throw fnm::ConfigError("--epsilon-rec must lie in (0, 1)");
        cfg.epsilon_rec = *c.epsilon_rec;
    }
    if (c.fidelity) {
        if (!(*c.fidelity > 0.0 && *c.fidelity <= 1.0)) throw fnm::ConfigError("--fidelity must lie in (0, 1]");
        cfg.fidelity_target = *c.fidelity;
    }
    return cfg;
}

std::ofstream open_out(const fs::path& p) {
    std::ofstream os(p);
    if (!os) throw std::runtime_error("cannot write " + p.string());
    return os;
}

void write_meta(const fs::path& dir, const std::string& command, const fnm::ExperimentConfig& cfg, json extra,
                double seconds) {
    json m;
    m["command"] = command;
    m["config"] = cfg.to_json();
    for (auto it = extra.begin(); it != extra.end(); ++it) m[it.key()] = it.value();
    m["wall_seconds"] = seconds;
    open_out(dir / "meta.json") << m.dump(2) << "\n";
}

double elapsed(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

int cmd_trace(const Common& c) {
    const auto t0 = std::chrono::steady_clock::now();
    const fnm::ExperimentConfig cfg = load(c);
    const fs::path dir(c.out);
    fs::create_directories(dir);
    const fnm::TraceRun run = fnm::run_trace(cfg);
    {
        auto os = open_out(dir / "trace.csv");
        fnm::write_trace_csv(os, run.trace);
    }
    {
        auto os = open_out(dir / "report.csv");
        fnm::write_report_header(os);
        fnm::write_report_row(os, std::nullopt, run.report);
    }
    json extra = fnm::describe(run.prepared);
    extra["average_t_max"] = run.average.t_max;
    extra["nm_integral"] = fnm::nm_integral(run.trace);
    if (run.report.t_first_rise) extra["t_first_rise"] = *run.report.t_first_rise;
    write_meta(dir, "trace", cfg, extra, elapsed(t0));
    return 0;
}

int cmd_sweep(const Common& c) {
    const auto t0 = std::chrono::steady_clock::now();
    const fnm::ExperimentConfig cfg = load(c);
    if (!cfg.sweep) throw fnm::ConfigError("config field 'sweep': is required for the sweep command");
    const fs::path dir(c.out);
    fs::create_directories(dir);
    const auto rows = fnm::run_sweep(cfg);
    auto os = open_out(dir / "sweep.csv");
    fnm::write_sweep_header(os);
    json per_row = json::array();
    std::size_t failed = 0;
    for (const auto& r : rows) {
        fnm::write_sweep_row(os, r);
        json e = {{"param", r.param}, {"kernel_modes", r.modes}, {"fidelity", {r.fidelity[0], r.fidelity[1]}}};
        if (!r.error.empty()) {
            e["error"] = r.error;
            ++failed;
        }
        per_row.push_back(e);
    }
    write_meta(dir, "sweep", cfg, {{"rows", per_row}, {"failed_rows", failed}}, elapsed(t0));
    return 0;
}

int cmd_infinite(const Common& c) {
    const auto t0 = std::chrono::steady_clock::now();
    const fnm::ExperimentConfig cfg = load(c);
    const fs::path dir(c.out);
    fs::create_directories(dir);
    const fnm::DistanceTrace tr = fnm::run_infinite(cfg);
    {
        auto os = open_out(dir / "trace.csv");
        fnm::write_trace_csv(os, tr);
    }
    write_meta(dir, "infinite", cfg, {{"nm_integral", fnm::nm_integral(tr)}}, elapsed(t0));
    return 0;
}

int cmd_oracle(const Common& c, int n, double width) {
    const auto t0 = std::chrono::steady_clock::now();
    const fnm::ExperimentConfig cfg = load(c);
    const fs::path dir(c.out);
    fs::create_directories(dir);
    const double L = cfg.geometry.L();
    if (n <= 0) n = static_cast<int>(std::ceil(400.0 * L));
    const double dx = L / n;
    if (width <= 0.0) width = 8.0 * dx;
    const auto model = fnm::oracle::build(cfg.geometry, n, width);
    const fnm::oracle::GridPropagator prop(model);
    const auto psi1 = fnm::oracle::sample_packet(model, fnm::make_packet(cfg.x0(0), cfg.packets[0].sigma, L));
    const auto psi2 = fnm::oracle::sample_packet(model, fnm::make_packet(cfg.x0(1), cfg.packets[1].sigma, L));
    std::vector<fnm::PairObservables> obs;
    for (double t : cfg.grid.points()) obs.push_back(prop.pij(psi1, psi2, t));
    const fnm::DistanceTrace tr = fnm::make_trace(cfg.grid, obs);
    {
        auto os = open_out(dir / "trace.csv");
        fnm::write_trace_csv(os, tr);
    }
    write_meta(dir, "oracle", cfg, {{"grid_points", n}, {"barrier_width", width}}, elapsed(t0));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"free non-Markovianity on a ring with two delta barriers"};
    app.require_subcommand(1);
    Common common;
    int oracle_n = 0;
    double oracle_w = 0.0;

    auto* trace = app.add_subcommand("trace", "evolve one packet pair, write trace.csv and report.csv");
    auto* sweep = app.add_subcommand("sweep", "sweep L_B, V0 or sigma, write sweep.csv");
    auto* inf = app.add_subcommand("infinite", "closed-form infinite-bath trace (no barriers)");
    auto* orc = app.add_subcommand("oracle", "finite-difference reference trace");
    orc->group("");
    for (auto* s : {trace, sweep, inf, orc}) add_common(s, common);
    orc->add_option("--n", oracle_n, "grid points (default 400 per unit length)");
    orc->add_option("--width", oracle_w, "barrier rectangle width (default 8 dx)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*trace) return cmd_trace(common);
        if (*sweep) return cmd_sweep(common);
        if (*inf) return cmd_infinite(common);
        if (*orc) return cmd_oracle(common, oracle_n, oracle_w);
    } catch (const fnm::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const fnm::InsufficientModes& e) {
        std::cerr << "expansion failed: " << e.what() << " (raise k_max)\n";
        return 3;
    } catch (const fnm::SpectralDiagnostic& e) {
        std::cerr << "spectral diagnostic: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
