// Deterministic seeded driver: one master seed fully determines the trace.
// Each step: (1) servers' models reach workers (async: q_ps quorums; sync:
// single filtered round-robin pull), (2) workers' gradients reach servers
// (async: q_w quorums; sync: all that deliver), (3) every T-th step runs the
// server-to-server Median exchange and re-synchronizes workers. Byzantine
// nodes run honest state machines internally; their outbound messages pass
// through the adversary, which observes all honest messages of the same
// sub-step first.
#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "byzsgd/adversary.hpp"
#include "byzsgd/aggregation.hpp"
#include "byzsgd/protocol.hpp"
#include "byzsgd/schedule.hpp"
#include "byzsgd/task.hpp"
#include "byzsgd/topology.hpp"

namespace byzsgd {

struct TaskSpec {
    TaskKind kind = TaskKind::quadratic;
    int d = 1;
    double theta_star_fill = 0.0;
    ParamVector theta_star;  // overrides the fill when non-empty
    double noise_sigma = 0.0;
    int batch_ref = 16;
    // logistic
    int samples = 200;
    double flip_rate = 0.05;
    std::uint64_t dataset_seed = 1;

    Task build() const;
};

struct SimOptions {
    bool record_models = false;         // per-step correct-server models
    bool record_mda_selection = false;  // per-step MDA picks at correct servers
};

struct SimConfig {
    Topology topology;  // validated by run()
    LrSchedule schedule;
    TaskSpec task;
    std::optional<AttackSpec> worker_attack;
    std::optional<AttackSpec> server_attack;
    long steps = 100;
    std::uint64_t seed = 1;
    int batch = 16;
    Gar gar = Gar::mda;
    double theta0_fill = 0.0;
    ParamVector theta0;  // overrides the fill when non-empty
    SimOptions options;
};

struct MetricsRecord {
    long step = 0;
    PhaseTag phase = PhaseTag::scatter;
    int server_id = 0;
    double loss = 0.0;
    double grad_norm = 0.0;
    double delta = 0.0;         // coordwise_diameter_sum over correct models
    double max_pairwise = 0.0;  // l2_diameter over correct models
    long filter_rejects = 0;    // this step, summed over correct workers
    long pulls = 0;             // this step, scatter pull attempts (sync)
};

using MetricsTrace = std::vector<MetricsRecord>;

/// Scatter-phase pull accounting at correct workers (sync mode).
struct FilterStats {
    long submitted_correct = 0;  // correct-server models put through the filters
    long rejected_correct = 0;   // false negatives
    long submitted_forged = 0;
    long rejected_forged = 0;
    long adopted_forged = 0;  // false positives
    long silent_pulls = 0;
    long total_pulls = 0;
    long adoptions = 0;
    long fallbacks = 0;

    double false_negative_ratio() const {
        const long total = submitted_correct + submitted_forged;
        return total == 0 ? 0.0
                          : static_cast<double>(rejected_correct) / static_cast<double>(total);
    }
    double wasted_pull_ratio() const {
        return total_pulls == 0 ? 0.0
                                : static_cast<double>(total_pulls - adoptions) /
                                      static_cast<double>(total_pulls);
    }
};

struct MdaPick {
    std::vector<int> selected;       // positions within the server's input list
    std::vector<int> byz_positions;  // positions holding forged gradients
};

struct SimResult {
    MetricsTrace trace;
    FilterStats filters;
    std::vector<ParamVector> final_models;                   // correct servers
    std::vector<std::vector<ParamVector>> model_history;     // if record_models
    std::vector<std::vector<MdaPick>> mda_history;           // if record_mda_selection
    std::vector<std::string> warnings;
};

SimResult run(const SimConfig& cfg);

}  // namespace byzsgd
