// Cluster shape: node counts, declared Byzantine counts, quorums, mode.
#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace byzsgd {

enum class Mode { async, sync };

struct Topology {
    int n_ps = 0;  // total parameter servers
    int f_ps = 0;  // declared Byzantine servers
    int q_ps = 0;  // parameter vectors a node waits for from servers
    int n_w = 0;   // total workers
    int f_w = 0;   // declared Byzantine workers
    int q_w = 0;   // gradients a node waits for from workers
    int d = 0;     // model dimension
    Mode mode = Mode::async;
    int gather_period = 1;  // T, steps per scatter phase

    // Filled in by validate_topology. Non-fatal.
    std::vector<std::string> warnings;

    int correct_servers() const { return n_ps - f_ps; }
    int correct_workers() const { return n_w - f_w; }

    /// The regime where the expected-contraction lemma applies:
    /// q_ps <= floor((n_ps - f_ps) / 2).
    bool strict_contraction_regime() const { return q_ps <= (n_ps - f_ps) / 2; }
};

struct TopologyError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Checks the inequality chains and returns the topology with warnings
/// attached, or throws TopologyError naming the violated constraint.
///
/// Hard bounds: positive counts, T >= 1, q_w in [2 f_w + 1, n_w - f_w],
/// q_ps <= n_ps - f_ps, async n_w >= 3 f_w + 1 (sync: 2 f_w + 1), and the
/// server floor n_ps >= 3 f_ps + 1 with q_ps >= 2 f_ps + 1. When the
/// over-provisioned window 2 f_ps + 2 <= q_ps <= n_ps - f_ps is satisfiable
/// (equivalently n_ps >= 3 f_ps + 2), its lower end is enforced as an error
/// as well; when that window is empty the topology is accepted at the
/// Median-majority floor with a "degraded regime" warning. A further
/// warning fires when q_ps > floor((n_ps - f_ps) / 2), the regime where
/// expected contraction is no longer guaranteed.
Topology validate_topology(Topology raw);

}  // namespace byzsgd
