// Metrics CSV: header then one row per (step, correct server), floats
// rendered with 17 significant digits so a parse-back is exact.
#pragma once

#include <string>

#include "byzsgd/simulation.hpp"

namespace byzsgd {

void emit_csv(const MetricsTrace& trace, const std::string& path);

/// Parse-back oracle for tests and downstream tooling.
MetricsTrace parse_csv(const std::string& path);

}  // namespace byzsgd
