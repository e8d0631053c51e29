#include "byzsgd/adversary.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace byzsgd {

ParamVector forge_model(const AttackSpec& spec, const ParamVector& honest_model, Rng& rng) {
    switch (spec.strategy) {
        case AttackStrategy::reversed:
            return scaled(honest_model, -spec.scale);
        case AttackStrategy::lie_model:
            return scaled(honest_model, spec.z);
        case AttackStrategy::random: {
            ParamVector out(honest_model.size());
            for (double& x : out) x = rng.uniform(spec.random_lo, spec.random_hi);
            return out;
        }
        case AttackStrategy::partial_drop: {
            const int d = static_cast<int>(honest_model.size());
            const int drops = static_cast<int>(std::floor(spec.drop_fraction * d));
            ParamVector out = honest_model;
            // Partial Fisher-Yates: first `drops` positions of a shuffle.
            std::vector<int> pos(static_cast<std::size_t>(d));
            std::iota(pos.begin(), pos.end(), 0);
            for (int i = 0; i < drops; ++i) {
                const int j = rng.uniform_int(i, d - 1);
                std::swap(pos[static_cast<std::size_t>(i)], pos[static_cast<std::size_t>(j)]);
                out[static_cast<std::size_t>(pos[static_cast<std::size_t>(i)])] = 0.0;
            }
            return out;
        }
        default:
            throw std::invalid_argument("forge_model: strategy is not a model transform");
    }
}

std::vector<ParamVector> forge_gradients(const AttackSpec& spec,
                                         const std::vector<ParamVector>& honest_grads,
                                         int byz_count, int receiver, Rng& rng) {
    if (byz_count < 0) throw std::invalid_argument("forge_gradients: negative count");
    switch (spec.strategy) {
        case AttackStrategy::mute:
            return {};
        case AttackStrategy::custom: {
            if (!spec.forge) throw std::invalid_argument("forge_gradients: custom forge unset");
            auto out = spec.forge(honest_grads, receiver);
            if (static_cast<int>(out.size()) != byz_count)
                throw std::invalid_argument("forge_gradients: custom forge count mismatch");
            return out;
        }
        case AttackStrategy::lie_gradient: {
            if (honest_grads.empty())
                throw std::invalid_argument("forge_gradients: no honest gradients observed");
            check_same_dim_finite(honest_grads, "forge_gradients");
            const std::size_t d = honest_grads.front().size();
            const double n = static_cast<double>(honest_grads.size());
            ParamVector lie(d);
            for (std::size_t c = 0; c < d; ++c) {
                double mean = 0.0;
                for (const auto& g : honest_grads) mean += g[c];
                mean /= n;
                double var = 0.0;
                for (const auto& g : honest_grads) var += (g[c] - mean) * (g[c] - mean);
                var /= n;  // population convention
                lie[c] = mean + spec.z_sigma * std::sqrt(var);
            }
            return std::vector<ParamVector>(static_cast<std::size_t>(byz_count), lie);
        }
        default:
            (void)rng;
            throw std::invalid_argument("forge_gradients: strategy is not an omniscient "
                                        "gradient forgery (use forge_model per sender)");
    }
}

}  // namespace byzsgd
