// Desk-scale learning tasks: loss, exact gradient, Lipschitz constant and a
// seeded stochastic gradient oracle with controllable noise.
#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "byzsgd/rng.hpp"
#include "byzsgd/types.hpp"

namespace byzsgd {

enum class TaskKind { quadratic, logistic };

/// Immutable once built; the rng for sampling is owned by the caller.
class Task {
public:
    /// L(theta) = 0.5 * ||theta - theta_star||^2. Stochastic gradients add
    /// Gaussian per-coordinate noise with std noise_sigma * sqrt(batch_ref/b).
    static Task quadratic(ParamVector theta_star, double noise_sigma, int batch_ref);

    /// Mean cross-entropy over a synthetic dataset: spherical Gaussian
    /// features, labels from a planted separator with `flip_rate` label
    /// noise. Stochastic gradients average `b` examples drawn i.i.d.
    static Task logistic(int d, int samples, std::uint64_t dataset_seed,
                         double flip_rate = 0.05, int batch_ref = 16);

    double loss(const ParamVector& theta) const;
    ParamVector true_gradient(const ParamVector& theta) const;
    ParamVector sample_gradient(const ParamVector& theta, int batch, Rng& rng) const;

    /// Quadratic: exactly 1 (identity Hessian). Logistic: the analytic upper
    /// bound 0.25 * max_i ||x_i||^2 (sigmoid curvature times the largest
    /// example norm), floored at a small positive value for degenerate data.
    double lipschitz_constant() const;

    TaskKind kind() const { return kind_; }
    int dimension() const { return d_; }
    double noise_sigma() const { return noise_sigma_; }
    int batch_ref() const { return batch_ref_; }
    const ParamVector& theta_star() const { return theta_star_; }

private:
    Task() = default;
    void check_dim(const ParamVector& theta) const;

    TaskKind kind_ = TaskKind::quadratic;
    int d_ = 0;
    double noise_sigma_ = 0.0;
    int batch_ref_ = 1;
    ParamVector theta_star_;                // quadratic optimum
    std::vector<ParamVector> features_;     // logistic
    std::vector<int> labels_;               // logistic, in {0, 1}
};

struct AssumptionReport {
    double kappa_margin = 0.0;    // min over batches of threshold / ratio; >= 1 means Eq. 3 holds
    double sigma_prime_est = 0.0; // largest measured E||g - Eg|| across batches
    std::vector<std::pair<int, double>> ratio_by_batch;
    bool eq3_holds = false;
};

/// Monte-Carlo estimate of sqrt(E||g - Eg||^2) / ||grad L(theta)|| for each
/// batch size, and whether the variance-to-norm bound holds with kappa = 1
/// for the given (n_w, f_w). Requires trials >= 100 and a nonzero true
/// gradient at theta.
AssumptionReport measure_variance_norm_ratio(const Task& task, const ParamVector& theta,
                                             std::span<const int> batch_sizes, int trials,
                                             int n_w, int f_w, Rng& rng);

}  // namespace byzsgd
