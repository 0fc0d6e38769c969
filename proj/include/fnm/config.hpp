#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fnm/dynamics.hpp"
#include "fnm/spectrum.hpp"

namespace fnm {

struct PacketSpec {
    std::optional<double> x0;  // defaults to +L_A/4 for the first packet, -L_A/4 for the second
    double sigma = 0.125;
};

struct AverageSpec {
    std::optional<double> t_max;  // auto when absent
    int n_t = 4096;               // samples per averaging window
    int max_doublings = 4;
    double rel_tol = 0.01;
};

struct SweepSpec {
    std::string parameter;  // L_B, V0 or sigma
    std::vector<double> values;
};

struct ExperimentConfig {
    RingGeometry geometry;
    PacketSpec packets[2];
    double fidelity_target = 0.99;
    std::optional<double> k_max;  // auto when absent
    TimeGrid grid{0.0, 100.0, 1001};
    AverageSpec average;
    double epsilon_rec = 0.05;
    std::optional<SweepSpec> sweep;
    int jobs = 1;

    double x0(int i) const;  // resolved packet center, i in {0, 1}
    nlohmann::json to_json() const;
};

ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig load_config(const std::string& path);

// applies one sweep value to a copy of the config
ExperimentConfig with_parameter(const ExperimentConfig& c, const std::string& parameter, double value);

}  // namespace fnm
