// Plain-text `key = value` run configuration with [topology], [task],
// [schedule], [attacks] and [run] sections. Unknown keys are errors; every
// default is listed in the README table.
#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "byzsgd/simulation.hpp"

namespace byzsgd {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Parameter sweep: each value is an independent seeded run.
struct SweepSpec {
    std::string parameter;  // empty, or one of: z_sigma, T, batch, steps
    std::vector<double> values;
};

struct LoadedConfig {
    SimConfig sim;
    SweepSpec sweep;
};

/// Parse errors carry "path:line:"; topology violations surface as
/// TopologyError. A gather period of `auto` (or 0) resolves to
/// compute_gather_period(l, eta0) for the configured task.
LoadedConfig load_config(const std::string& path);

/// Inverse of load_config; floats are written round-trippable.
void save_config(const LoadedConfig& cfg, const std::string& path);

/// One sweep point: returns the base config with `parameter` set to `value`.
SimConfig apply_sweep_point(SimConfig base, const std::string& parameter, double value);

}  // namespace byzsgd
