// Shared low-level vector type and helpers.
#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace byzsgd {

/// A point in R^d. Models and gradients both live in this representation.
using ParamVector = std::vector<double>;

inline bool is_finite(const ParamVector& v) {
    for (double x : v) {
        if (!std::isfinite(x)) return false;
    }
    return true;
}

inline double l2_norm(const ParamVector& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

inline double l2_distance(const ParamVector& a, const ParamVector& b) {
    if (a.size() != b.size()) throw std::invalid_argument("l2_distance: dimension mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return std::sqrt(s);
}

inline ParamVector sub(const ParamVector& a, const ParamVector& b) {
    if (a.size() != b.size()) throw std::invalid_argument("sub: dimension mismatch");
    ParamVector r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
    return r;
}

inline ParamVector add(const ParamVector& a, const ParamVector& b) {
    if (a.size() != b.size()) throw std::invalid_argument("add: dimension mismatch");
    ParamVector r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
    return r;
}

inline ParamVector scaled(const ParamVector& a, double c) {
    ParamVector r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = c * a[i];
    return r;
}

/// r += c * a
inline void axpy(ParamVector& r, double c, const ParamVector& a) {
    if (r.size() != a.size()) throw std::invalid_argument("axpy: dimension mismatch");
    for (std::size_t i = 0; i < a.size(); ++i) r[i] += c * a[i];
}

/// Rejects empty input, dimension mismatches and non-finite coordinates.
/// Every aggregation entry point funnels through this.
void check_same_dim_finite(std::span<const ParamVector> vs, const char* who);

}  // namespace byzsgd
