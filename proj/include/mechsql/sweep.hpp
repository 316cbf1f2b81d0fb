#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "mechsql/params.hpp"
#include "mechsql/resolution.hpp"
#include "mechsql/table.hpp"

namespace mechsql {

enum class AxisScale { linear, log };

/// One swept parameter. Values are in SI units (angular frequencies in
/// rad/s). A single point needs min == max.
struct SweepAxis {
    std::string name;
    AxisScale scale = AxisScale::log;
    double min = 0.0;
    double max = 0.0;
    int points = 2;

    std::vector<double> values() const;
};

/// `name:scale:min:max:n`, e.g. `I_0:log:1e-10:1e-8:41`. Scale defaults to
/// log when omitted (`name:min:max:n`).
SweepAxis parse_axis(std::string_view text);

struct SweepSpec {
    ModelConfig base;
    std::vector<SweepAxis> axes;   // one or two
    FeasibilityOptions options;
    int workers = 1;
};

/// Parameter names accepted for the model kind of `config`.
std::vector<std::string> sweepable_parameters(const ModelConfig& config);

/// Returns a copy of `config` with `name` set to `value`; InvalidAxis for
/// names that are not parameters of this model kind.
ModelConfig with_parameter(const ModelConfig& config, std::string_view name, double value);

/// Throws InvalidAxis on unknown names, bad ranges or too many axes.
void validate_sweep(const SweepSpec& spec);

/// One row per grid point, first axis outermost. Points that raise a model
/// error keep their axis values; the verdict columns carry the error name.
Table run_sweep(const SweepSpec& spec);

} // namespace mechsql
