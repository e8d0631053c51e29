#include "byzsgd/task.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "byzsgd/aggregation.hpp"

namespace byzsgd {

namespace {

double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

// log(1 + exp(z)) without overflow.
double log1pexp(double z) {
    if (z > 0.0) return z + std::log1p(std::exp(-z));
    return std::log1p(std::exp(z));
}

}  // namespace

Task Task::quadratic(ParamVector theta_star, double noise_sigma, int batch_ref) {
    if (theta_star.empty()) throw std::invalid_argument("Task::quadratic: empty optimum");
    if (noise_sigma < 0.0) throw std::invalid_argument("Task::quadratic: negative noise");
    if (batch_ref < 1) throw std::invalid_argument("Task::quadratic: batch_ref must be >= 1");
    Task t;
    t.kind_ = TaskKind::quadratic;
    t.d_ = static_cast<int>(theta_star.size());
    t.noise_sigma_ = noise_sigma;
    t.batch_ref_ = batch_ref;
    t.theta_star_ = std::move(theta_star);
    return t;
}

Task Task::logistic(int d, int samples, std::uint64_t dataset_seed, double flip_rate,
                    int batch_ref) {
    if (d < 1 || samples < 1) throw std::invalid_argument("Task::logistic: bad shape");
    if (batch_ref < 1) throw std::invalid_argument("Task::logistic: batch_ref must be >= 1");
    Task t;
    t.kind_ = TaskKind::logistic;
    t.d_ = d;
    t.batch_ref_ = batch_ref;
    Rng rng = Rng::child(dataset_seed, 0, Purpose::init);
    ParamVector separator(static_cast<std::size_t>(d));
    for (double& w : separator) w = rng.normal();
    t.features_.reserve(static_cast<std::size_t>(samples));
    t.labels_.reserve(static_cast<std::size_t>(samples));
    for (int i = 0; i < samples; ++i) {
        ParamVector x(static_cast<std::size_t>(d));
        double dot = 0.0;
        for (int c = 0; c < d; ++c) {
            x[static_cast<std::size_t>(c)] = rng.normal();
            dot += x[static_cast<std::size_t>(c)] * separator[static_cast<std::size_t>(c)];
        }
        int y = dot >= 0.0 ? 1 : 0;
        if (rng.uniform() < flip_rate) y = 1 - y;
        t.features_.push_back(std::move(x));
        t.labels_.push_back(y);
    }
    return t;
}

void Task::check_dim(const ParamVector& theta) const {
    if (static_cast<int>(theta.size()) != d_)
        throw std::invalid_argument("Task: theta dimension mismatch");
}

double Task::loss(const ParamVector& theta) const {
    check_dim(theta);
    if (kind_ == TaskKind::quadratic) {
        const double r = l2_distance(theta, theta_star_);
        return 0.5 * r * r;
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < features_.size(); ++i) {
        double z = 0.0;
        for (int c = 0; c < d_; ++c)
            z += features_[i][static_cast<std::size_t>(c)] * theta[static_cast<std::size_t>(c)];
        // -y log s(z) - (1-y) log(1 - s(z)) = log(1+e^z) - y z
        sum += log1pexp(z) - static_cast<double>(labels_[i]) * z;
    }
    return sum / static_cast<double>(features_.size());
}

ParamVector Task::true_gradient(const ParamVector& theta) const {
    check_dim(theta);
    if (kind_ == TaskKind::quadratic) return sub(theta, theta_star_);
    ParamVector g(static_cast<std::size_t>(d_), 0.0);
    for (std::size_t i = 0; i < features_.size(); ++i) {
        double z = 0.0;
        for (int c = 0; c < d_; ++c)
            z += features_[i][static_cast<std::size_t>(c)] * theta[static_cast<std::size_t>(c)];
        const double r = sigmoid(z) - static_cast<double>(labels_[i]);
        for (int c = 0; c < d_; ++c) g[static_cast<std::size_t>(c)] += r * features_[i][static_cast<std::size_t>(c)];
    }
    const double inv = 1.0 / static_cast<double>(features_.size());
    for (double& x : g) x *= inv;
    return g;
}

ParamVector Task::sample_gradient(const ParamVector& theta, int batch, Rng& rng) const {
    check_dim(theta);
    if (batch < 1) throw std::invalid_argument("sample_gradient: batch must be >= 1");
    if (kind_ == TaskKind::quadratic) {
        ParamVector g = true_gradient(theta);
        if (noise_sigma_ > 0.0) {
            const double sd = noise_sigma_ * std::sqrt(static_cast<double>(batch_ref_) /
                                                       static_cast<double>(batch));
            for (double& x : g) x += sd * rng.normal();
        }
        return g;
    }
    ParamVector g(static_cast<std::size_t>(d_), 0.0);
    const int m = static_cast<int>(features_.size());
    for (int b = 0; b < batch; ++b) {
        const std::size_t i = static_cast<std::size_t>(rng.uniform_int(0, m - 1));
        double z = 0.0;
        for (int c = 0; c < d_; ++c)
            z += features_[i][static_cast<std::size_t>(c)] * theta[static_cast<std::size_t>(c)];
        const double r = sigmoid(z) - static_cast<double>(labels_[i]);
        for (int c = 0; c < d_; ++c) g[static_cast<std::size_t>(c)] += r * features_[i][static_cast<std::size_t>(c)];
    }
    const double inv = 1.0 / static_cast<double>(batch);
    for (double& x : g) x *= inv;
    return g;
}

double Task::lipschitz_constant() const {
    if (kind_ == TaskKind::quadratic) return 1.0;
    double max_sq = 0.0;
    for (const auto& x : features_) {
        const double n = l2_norm(x);
        max_sq = std::max(max_sq, n * n);
    }
    const double bound = 0.25 * max_sq;
    // All-zero features give a vacuous 0 bound; keep it positive.
    return std::max(bound, 16.0 * std::numeric_limits<double>::epsilon());
}

AssumptionReport measure_variance_norm_ratio(const Task& task, const ParamVector& theta,
                                             std::span<const int> batch_sizes, int trials,
                                             int n_w, int f_w, Rng& rng) {
    if (trials < 100) throw std::invalid_argument("measure_variance_norm_ratio: trials < 100");
    if (batch_sizes.empty())
        throw std::invalid_argument("measure_variance_norm_ratio: no batch sizes");
    const double grad_norm = l2_norm(task.true_gradient(theta));
    if (grad_norm == 0.0)
        throw std::invalid_argument("measure_variance_norm_ratio: zero true-gradient norm, "
                                    "ratio undefined");

    const double threshold = f_w > 0
        ? static_cast<double>(n_w - f_w) / (2.0 * static_cast<double>(f_w))
        : std::numeric_limits<double>::infinity();

    AssumptionReport rep;
    rep.kappa_margin = std::numeric_limits<double>::infinity();
    for (int b : batch_sizes) {
        std::vector<ParamVector> samples;
        samples.reserve(static_cast<std::size_t>(trials));
        for (int i = 0; i < trials; ++i) samples.push_back(task.sample_gradient(theta, b, rng));
        const ParamVector mean = average(samples);
        double sq = 0.0, abs_dev = 0.0;
        for (const auto& g : samples) {
            const double dist = l2_distance(g, mean);
            sq += dist * dist;
            abs_dev += dist;
        }
        sq /= static_cast<double>(trials);
        abs_dev /= static_cast<double>(trials);
        const double ratio = std::sqrt(sq) / grad_norm;
        rep.ratio_by_batch.emplace_back(b, ratio);
        rep.sigma_prime_est = std::max(rep.sigma_prime_est, abs_dev);
        const double margin = ratio > 0.0 ? threshold / ratio
                                          : std::numeric_limits<double>::infinity();
        rep.kappa_margin = std::min(rep.kappa_margin, margin);
    }
    rep.eq3_holds = rep.kappa_margin >= 1.0;
    return rep;
}

}  // namespace byzsgd
