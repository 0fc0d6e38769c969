#pragma once

#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fnm/config.hpp"
#include "fnm/dynamics.hpp"
#include "fnm/spectrum.hpp"
#include "fnm/timescales.hpp"
#include "fnm/wavepacket.hpp"

namespace fnm {

using Spectrum = std::shared_ptr<const std::vector<EigenMode>>;

double auto_k_max(const ExperimentConfig& c);

// spectrum, both expansions and the kernel on the union of retained modes
struct PreparedPair {
    ExperimentConfig config;
    double k_max = 0.0;
    Spectrum spectrum;
    GaussianPacket packets[2];
    ExpandedState states[2];
    OverlapKernel kernel;
};

Spectrum compute_spectrum(const ExperimentConfig& c, double k_max, int jobs);
// reuses `spectrum` when given (it must belong to the same geometry and k_max)
PreparedPair prepare(const ExperimentConfig& c, Spectrum spectrum = nullptr, int jobs = 1);

// first averaging window: the configured one, or long enough to cover the
// slowest resolved beat among retained modes
double average_window(const PreparedPair& p);
TimeAverage average_distance(const PreparedPair& p, const PairEvolution& ev, int jobs = 1);

struct TraceRun {
    PreparedPair prepared;
    DistanceTrace trace;
    TimeAverage average;
    TimescaleReport report;
};

TraceRun run_trace(const ExperimentConfig& c, Spectrum spectrum = nullptr);

struct SweepRow {
    double param = 0.0;
    std::optional<TimescaleReport> report;
    std::string error;
    std::size_t modes = 0;
    double fidelity[2] = {0.0, 0.0};
};

// rows are independent; the spectrum is shared only for sigma sweeps
std::vector<SweepRow> run_sweep(const ExperimentConfig& c);

void write_sweep_header(std::ostream& os);
void write_sweep_row(std::ostream& os, const SweepRow& r);

// closed-form infinite-bath trace; rejects barriers and unequal widths
DistanceTrace run_infinite(const ExperimentConfig& c);

nlohmann::json describe(const PreparedPair& p);

}  // namespace fnm
