// Aggregation rules: average, coordinate-wise Median, MDA, plus the
// diameter measures and the nearest-rank quantile used by the filters.
#pragma once

#include <span>
#include <vector>

#include "byzsgd/types.hpp"

namespace byzsgd {

/// Coordinate-wise arithmetic mean.
ParamVector average(std::span<const ParamVector> vs);

/// Coordinate-wise median; even counts take the mean of the two middle
/// elements.
ParamVector median(std::span<const ParamVector> vs);

struct MdaResult {
    std::vector<int> indices;  // ascending positions of the selected subset
    ParamVector mean;
    double diameter = 0.0;
};

/// Minimum-Diameter Averaging over subsets of size |vs| - f.
///
/// Enumerates every subset exactly (no sampling) and averages the one with
/// the smallest max pairwise l2 distance. Ties on diameter break on the
/// lexicographically smallest sorted value sequence, then on the smallest
/// index tuple, so the returned point is permutation-invariant and the
/// reported indices are deterministic. Requires |vs| >= 2f + 1.
MdaResult mda_select(std::span<const ParamVector> vs, int f);

ParamVector mda(std::span<const ParamVector> vs, int f);

/// Max pairwise l2 distance. 0 for singletons.
double l2_diameter(std::span<const ParamVector> vs);

/// Sum over coordinates of (max - min) across the vectors. The contraction
/// potential Delta.
double coordwise_diameter_sum(std::span<const ParamVector> vs);

/// Nearest-rank quantile: sort ascending, take index ceil(p * n) - 1 clamped
/// to [0, n-1]. p = 1 returns the maximum, p = 0 the minimum. Always an
/// observed value.
double quantile(std::vector<double> values, double p);

/// Gradient aggregation rule selector; `average` is the non-robust baseline.
enum class Gar { mda, average };

ParamVector aggregate_gradients(Gar gar, std::span<const ParamVector> vs, int f);

}  // namespace byzsgd
