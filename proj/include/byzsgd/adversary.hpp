// Byzantine behaviors. Forging is a pure function of observed honest
// messages plus the adversary's own rng; honest state is never touched.
#pragma once

#include <functional>
#include <vector>

#include "byzsgd/rng.hpp"
#include "byzsgd/types.hpp"

namespace byzsgd {

enum class AttackTarget { server_models, worker_gradients };

enum class AttackStrategy {
    none,
    reversed,      // -scale * honest vector
    partial_drop,  // zero a random floor(drop_fraction * d) subset of coords
    random,        // i.i.d. uniform draws from [random_lo, random_hi]
    lie_model,     // z * honest vector, |z - 1| small
    lie_gradient,  // mean + z_sigma * std of the honest gradients, per coord
    mute,          // send nothing; quorums fill from others
    custom,        // caller-supplied per-receiver forgery
};

struct AttackSpec {
    AttackTarget target = AttackTarget::worker_gradients;
    AttackStrategy strategy = AttackStrategy::none;
    double scale = 1.0;          // reversed
    double drop_fraction = 0.10; // partial_drop
    double random_lo = -1.0;     // random
    double random_hi = 1.0;
    double z = 1.035;            // lie_model
    double z_sigma = 0.0;        // lie_gradient
    bool occupy_always = false;  // adversary always claims its f quorum slots

    /// custom: maps (all correct workers' gradients, receiving server) to one
    /// gradient per Byzantine worker; enables per-receiver equivocation.
    std::function<std::vector<ParamVector>(const std::vector<ParamVector>&, int)> forge;

    bool active() const { return strategy != AttackStrategy::none; }
    /// Strategies that pervert the sender's own correct message.
    bool per_sender() const {
        return strategy == AttackStrategy::reversed || strategy == AttackStrategy::partial_drop ||
               strategy == AttackStrategy::random || strategy == AttackStrategy::lie_model;
    }
};

/// Transform strategies applied to the message a correct node would have
/// sent (reversed, partial_drop, random, lie_model).
ParamVector forge_model(const AttackSpec& spec, const ParamVector& honest_model, Rng& rng);

/// Omniscient gradient forgeries: one vector per Byzantine worker, crafted
/// after observing all correct workers' gradients of this step. mute yields
/// an empty result. lie_gradient uses the population std convention.
std::vector<ParamVector> forge_gradients(const AttackSpec& spec,
                                         const std::vector<ParamVector>& honest_grads,
                                         int byz_count, int receiver, Rng& rng);

}  // namespace byzsgd
