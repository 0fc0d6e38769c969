#pragma once

#include <stdexcept>
#include <string>

namespace fnm {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SpectralDiagnostic : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InsufficientModes : std::runtime_error {
    InsufficientModes(const std::string& what, double achieved, double target)
        : std::runtime_error(what), achieved_fidelity(achieved), target_fidelity(target) {}
    double achieved_fidelity;
    double target_fidelity;
};

struct ModeMismatch : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InvariantViolation : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace fnm
