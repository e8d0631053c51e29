// Acceptance suites: statistical and end-to-end checks with pinned seeds and
// thresholds, runnable one suite at a time from the CLI or all at once from
// the test binary.
#pragma once

#include <string>
#include <vector>

namespace byzsgd {

struct CriterionResult {
    std::string name;
    bool passed = false;
    std::string detail;  // measured vs threshold
    double seconds = 0.0;
};

std::vector<std::string> acceptance_suites();

/// Runs one named suite (or "all"); throws std::invalid_argument for an
/// unknown name.
std::vector<CriterionResult> run_acceptance(const std::string& suite);

}  // namespace byzsgd
