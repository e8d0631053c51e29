// Delivering configurations: which correct senders' messages land in each
// receiver's quorum this step. Asynchrony is modeled entirely as quorum
// composition; there is no event-time queue.
#pragma once

#include <vector>

#include "byzsgd/rng.hpp"
#include "byzsgd/topology.hpp"

namespace byzsgd {

enum class Exchange { s2w, w2s, s2s };

/// One receiver's draw. For s2s the receiver's own vector always counts
/// toward the quorum, so `correct` holds peers only. byz_slots is how many
/// quorum slots are offered to the adversary (at most f); slots it declines
/// are padded with extra correct senders.
struct ReceiverQuorum {
    std::vector<int> correct;  // correct sender ids, ascending
    int byz_slots = 0;
    bool includes_self = false;
};

/// Uniform draw over every admissible correct-sender subset: sizes
/// [q - f, q] (s2s: [q - f - 1, q - 1] peers plus self). Every admissible
/// subset has probability exactly 1 / admissible_subset_count, which is the
/// positive rho the contraction argument needs. occupy_always pins the
/// correct part to its minimum so the adversary holds all f slots.
ReceiverQuorum sample_receiver_quorum(Rng& rng, const Topology& topo, Exchange ex, int receiver,
                                      bool occupy_always = false);

/// Number of admissible correct subsets per receiver (|S_j| for s2s).
long admissible_subset_count(const Topology& topo, Exchange ex);

/// Analytic minimum probability of a full delivering configuration under
/// the uniform sampler: (1/|S_j|)^(number of correct receivers).
double min_config_probability(const Topology& topo, Exchange ex);

/// Final per-receiver sender lists with the adversary occupying its offered
/// slots (Byzantine ids are n - f .. n - 1 for the sending role). Each list
/// has exactly the quorum size for the exchange.
struct DeliveringConfig {
    std::vector<std::vector<int>> senders;  // indexed by correct receiver
};

DeliveringConfig sample_delivering_config(Rng& rng, const Topology& topo, Exchange ex,
                                          bool occupy_always = false);

/// Extra correct senders (not already in the quorum) standing in for
/// adversary slots it declined to fill.
std::vector<int> pad_with_correct(Rng& rng, const ReceiverQuorum& q, int pool_size, int self,
                                  int needed);

}  // namespace byzsgd
