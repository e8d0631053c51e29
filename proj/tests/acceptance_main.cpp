// Runs every acceptance criterion and prints one pass/fail line each.
#include <cstdio>

#include "byzsgd/acceptance.hpp"

int main() {
    const auto results = byzsgd::run_acceptance("all");
    int failures = 0;
    for (const auto& r : results) {
        std::printf("%s %-32s %s [%.1fs]\n", r.passed ? "PASS" : "FAIL", r.name.c_str(),
                    r.detail.c_str(), r.seconds);
        if (!r.passed) ++failures;
    }
    std::printf("%zu criteria, %d failed\n", results.size(), failures);
    return failures == 0 ? 0 : 1;
}
