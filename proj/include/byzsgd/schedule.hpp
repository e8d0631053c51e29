// Learning-rate schedule and the scatter-phase length bound.
#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace byzsgd {

/// Inverse-time decay: eta_t = eta0 / (1 + decay * t). decay = 0 gives a
/// constant rate for short fixed-rate experiments.
struct LrSchedule {
    double eta0 = 0.1;
    double decay = 0.0;
};

inline double learning_rate(const LrSchedule& s, long t) {
    if (s.eta0 <= 0.0) throw std::invalid_argument("LrSchedule: eta0 must be positive");
    if (s.decay < 0.0) throw std::invalid_argument("LrSchedule: decay must be non-negative");
    if (t < 0) throw std::invalid_argument("learning_rate: negative step");
    return s.eta0 / (1.0 + s.decay * static_cast<double>(t));
}

/// Safety ceiling on the gather period: max(1, floor(1 / (3 * l * eta0))).
/// Callers may configure any smaller T.
inline int compute_gather_period(double lipschitz, double eta0) {
    if (lipschitz <= 0.0 || eta0 <= 0.0)
        throw std::invalid_argument("compute_gather_period: l and eta0 must be positive");
    const double bound = 1.0 / (3.0 * lipschitz * eta0);
    return std::max(1, static_cast<int>(std::floor(bound)));
}

}  // namespace byzsgd
