#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "fnm/config.hpp"
#include "fnm/errors.hpp"
#include "fnm/experiment.hpp"

#ifndef FNM_SOURCE_DIR
#error "FNM_SOURCE_DIR must point at the repository root"
#endif

using namespace fnm;

namespace {

std::string error_of(const std::string& text) {
    try {
        parse_config_text(text);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

const char* kBase = R"({"geometry": {"L_A": 2, "L_B": 1, "V1": 1e6, "V2": 2e6},
 "packets": [{"sigma": 0.125}, {"sigma": 0.125}],
 "grid": {"t_max": 5, "n_t": 201}})";

std::string sweep_csv(const std::vector<SweepRow>& rows) {
    std::ostringstream os;
    write_sweep_header(os);
    for (const auto& r : rows) write_sweep_row(os, r);
    return os.str();
}

}  // namespace

TEST_CASE("config defaults") {
    const auto c = parse_config_text(kBase);
    CHECK(c.geometry.L() == 3.0);
    CHECK(c.x0(0) == 0.5);
    CHECK(c.x0(1) == -0.5);
    CHECK(c.fidelity_target == 0.99);
    CHECK(c.epsilon_rec == 0.05);
    CHECK_FALSE(c.k_max);
    CHECK_FALSE(c.average.t_max);
    CHECK(c.grid.t_min == 0.0);
    CHECK_FALSE(c.sweep);
    // echo parses back to the same config
    const auto again = parse_config(c.to_json());
    CHECK(again.to_json() == c.to_json());
}

TEST_CASE("config diagnostics name the field") {
    CHECK(error_of(R"({"geometry": {"L_A": 2, "L_B": 1}, "packets": [{"sigma": 0.1}]})").find("packets") != std::string::npos);
    CHECK(error_of(R"({"geometry": {"L_A": 2, "L_B": 1, "V3": 1}, "packets": [{"sigma": 0.1}, {"sigma": 0.1}]})")
              .find("geometry.V3") != std::string::npos);
    CHECK(error_of(R"({"geometry": {"L_A": 2, "L_B": -1}, "packets": [{"sigma": 0.1}, {"sigma": 0.1}]})")
              .find("geometry.L_B") != std::string::npos);
    CHECK(error_of(R"({"geometry": {"L_A": 2, "L_B": 1}, "packets": [{"sigma": 0.1}, {"sigma": "x"}]})")
              .find("packets[1].sigma") != std::string::npos);
    CHECK(error_of(R"({"geometry": {"L_A": 2, "L_B": 1}, "packets": [{"sigma": 0.1, "x0": 1.6}, {"sigma": 0.1}]})")
              .find("packets[0].x0") != std::string::npos);
    CHECK(error_of(R"({"geometry": {"L_A": 2, "L_B": 1}, "packets": [{"sigma": 0.1}, {"sigma": 0.1}], "fidelity_target": 1.5})")
              .find("fidelity_target") != std::string::npos);
    // syntax errors report a position
    const std::string syn = error_of("{\"geometry\": {\"L_A\": 2,,}}");
    CHECK(syn.find("line 1") != std::string::npos);
    // annotations are ignored
    CHECK(error_of(R"({"_comment": "x", "geometry": {"L_A": 2, "L_B": 1, "_note": 3}, "packets": [{"sigma": 0.1}, {"sigma": 0.1}]})")
              .empty());
    CHECK_THROWS_AS(load_config("/nonexistent/config.json"), ConfigError);
}

TEST_CASE("sweep specification") {
    auto with = [](const std::string& sweep) {
        return std::string(R"({"geometry": {"L_A": 2, "L_B": 1}, "packets": [{"sigma": 0.1}, {"sigma": 0.1}], "sweep": )") +
               sweep + "}";
    };
    const auto c = parse_config_text(with(R"({"parameter": "L_B", "start": 0.25, "stop": 2.5, "count": 181})"));
    REQUIRE(c.sweep);
    CHECK(c.sweep->values.size() == 181);
    CHECK(c.sweep->values.front() == 0.25);
    CHECK(c.sweep->values.back() == doctest::Approx(2.5));
    CHECK(c.sweep->values[1] == doctest::Approx(0.2625));
    CHECK(error_of(with(R"({"parameter": "V0", "values": [1, 3, 2]})")).find("strictly increasing") != std::string::npos);
    CHECK(error_of(with(R"({"parameter": "L_A", "values": [1, 2]})")).find("sweep.parameter") != std::string::npos);
    CHECK(error_of(with(R"({"parameter": "sigma", "values": [0, 1]})")).find("sweep.values") != std::string::npos);

    const auto base = parse_config_text(kBase);
    const auto v = with_parameter(base, "V0", 5e3);
    CHECK(v.geometry.V1 == 5e3);
    CHECK(v.geometry.V2 == 1e4);
    const auto s = with_parameter(base, "sigma", 0.05);
    CHECK(s.packets[0].sigma == 0.05);
    CHECK(s.packets[1].sigma == 0.05);
    CHECK(with_parameter(base, "L_B", 4.0).geometry.L_B == 4.0);
}

TEST_CASE("auto k_max follows the narrower packet") {
    auto c = parse_config_text(kBase);
    c.packets[1].sigma = 0.005;
    const double k = auto_k_max(c);
    CHECK(k >= 12.0 / 0.005);
    CHECK(k == doctest::Approx(std::max(12.0 / 0.005, 4.0 * M_PI * n_star_estimate(3.0, 0.005, 0.01) / 3.0)));
    c.k_max = 50.0;
    CHECK(auto_k_max(c) == 50.0);
}

TEST_CASE("identical packets give a zero distance column") {
    auto c = parse_config_text(kBase);
    c.packets[1].x0 = c.x0(0);
    const auto run = run_trace(c);
    for (const auto& s : run.trace.samples) CHECK(std::abs(s.D) < 1e-12);
}

TEST_CASE("traces are deterministic") {
    const auto c = parse_config_text(kBase);
    std::ostringstream a, b;
    write_trace_csv(a, run_trace(c).trace);
    write_trace_csv(b, run_trace(c).trace);
    CHECK(a.str() == b.str());
}

TEST_CASE("expansion failure surfaces as InsufficientModes") {
    auto c = parse_config_text(kBase);
    c.k_max = 5.0;
    CHECK_THROWS_AS(prepare(c), InsufficientModes);
}

TEST_CASE("sweep rows reproduce in isolation; failing rows stay empty") {
    auto c = parse_config_text(kBase);
    c.sweep = SweepSpec{"L_B", {0.9, 1.0, 1.1}};
    const auto rows = run_sweep(c);
    REQUIRE(rows.size() == 3);
    for (const auto& r : rows) CHECK(r.report);
    auto single = c;
    single.sweep = SweepSpec{"L_B", {1.0}};
    const auto one = run_sweep(single);
    std::ostringstream a, b;
    write_sweep_row(a, rows[1]);
    write_sweep_row(b, one[0]);
    CHECK(a.str() == b.str());

    // a fixed k_max that the narrowest width cannot reach
    auto s = c;
    s.k_max = 60.0;
    s.sweep = SweepSpec{"sigma", {0.01, 0.1, 0.2}};
    const auto srows = run_sweep(s);
    CHECK_FALSE(srows[0].report);
    CHECK_FALSE(srows[0].error.empty());
    CHECK(srows[1].report);
    CHECK(srows[2].report);
    const std::string csv = sweep_csv(srows);
    CHECK(csv.rfind("param,d_bar,converged,p11_bar,tau_dec,tau_rec,t_nm\n0.01,,,,,,\n", 0) == 0);

    // thread count does not change results
    auto par = c;
    par.jobs = 3;
    CHECK(sweep_csv(run_sweep(par)) == sweep_csv(rows));
}

TEST_CASE("infinite-bath runs reject barriers and unequal widths") {
    auto c = parse_config_text(kBase);
    CHECK_THROWS_AS(run_infinite(c), ConfigError);
    c.geometry.V1 = c.geometry.V2 = 0.0;
    c.packets[1].sigma = 0.2;
    CHECK_THROWS_AS(run_infinite(c), ConfigError);
    c.packets[1].sigma = 0.125;
    const auto tr = run_infinite(c);
    CHECK(tr.samples.size() == 201);
}

TEST_CASE("every shipped figure config parses") {
    int n = 0;
    for (const auto& e : std::filesystem::directory_iterator(std::filesystem::path(FNM_SOURCE_DIR) / "figs")) {
        if (e.path().extension() != ".json") continue;
        INFO(e.path().string());
        CHECK_NOTHROW(load_config(e.path().string()));
        ++n;
    }
    CHECK(n >= 8);
}
