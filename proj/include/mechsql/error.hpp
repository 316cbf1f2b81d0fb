#pragma once

#include <stdexcept>
#include <string>

namespace mechsql {

/// Base of every error raised by the library. `kind()` is a stable,
/// machine-readable name used by the CLI and by sweep rows.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& message)
        : std::runtime_error(message), kind_(std::move(kind)) {}

    const std::string& kind() const noexcept { return kind_; }

    /// Model-domain errors are physics verdicts (exit code 3); the rest are
    /// usage/config problems (exit code 2).
    virtual bool is_model_error() const noexcept { return true; }

private:
    std::string kind_;
};

/// Malformed config or system description. Carries the 1-based line number
/// when the problem is tied to one.
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& message, int line = 0)
        : Error("ConfigError", line > 0 ? "line " + std::to_string(line) + ": " + message : message),
          line_(line) {}

    int line() const noexcept { return line_; }
    bool is_model_error() const noexcept override { return false; }

private:
    int line_;
};

class InvalidAxis : public Error {
public:
    explicit InvalidAxis(const std::string& message) : Error("InvalidAxis", message) {}
    bool is_model_error() const noexcept override { return false; }
};

/// Optical spring overwhelms the mechanical restoring force (omega_eff^2 <= 0).
class UnstableSpring : public Error {
public:
    UnstableSpring(const std::string& message, double threshold_photons, double threshold_power)
        : Error("UnstableSpring", message),
          threshold_photons_(threshold_photons),
          threshold_power_(threshold_power) {}

    /// Intracavity photon number c_bar^2 at which omega_eff reaches zero.
    double threshold_photons() const noexcept { return threshold_photons_; }
    /// Matching input power in W (NaN for rate-only configs).
    double threshold_power() const noexcept { return threshold_power_; }

private:
    double threshold_photons_;
    double threshold_power_;
};

class ZeroSignal : public Error {
public:
    explicit ZeroSignal(const std::string& message) : Error("ZeroSignal", message) {}
};

class NoMinimum : public Error {
public:
    explicit NoMinimum(const std::string& message) : Error("NoMinimum", message) {}
};

class StepTooLarge : public Error {
public:
    explicit StepTooLarge(const std::string& message) : Error("StepTooLarge", message) {}
    bool is_model_error() const noexcept override { return false; }
};

class DegenerateModes : public Error {
public:
    explicit DegenerateModes(const std::string& message) : Error("DegenerateModes", message) {}
};

class QndViolated : public Error {
public:
    explicit QndViolated(const std::string& message) : Error("QndViolated", message) {}
};

} // namespace mechsql
