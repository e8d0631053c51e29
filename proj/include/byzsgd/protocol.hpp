// Node state machines: server scatter/gather steps, asynchronous worker
// steps, synchronous worker steps with the Lipschitz and Outliers filters.
// States are single-owner; all cross-node influence is explicit message
// values passed in by the driver.
#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "byzsgd/aggregation.hpp"
#include "byzsgd/task.hpp"
#include "byzsgd/topology.hpp"
#include "byzsgd/types.hpp"

namespace byzsgd {

enum class PhaseTag { scatter, gather };

/// gather iff t mod T == 0.
inline PhaseTag phase_of(long step, int gather_period) {
    return step % gather_period == 0 ? PhaseTag::gather : PhaseTag::scatter;
}

struct ServerState {
    int id = 0;
    ParamVector model;
    long step = 0;
};

struct WorkerState {
    int id = 0;
    ParamVector model;
    ParamVector last_gradient;
    ParamVector local_model;               // speculative estimate (sync)
    std::vector<double> lipschitz_history; // coefficients of fully accepted models
    int rr_offset = 0;                     // fixed random pull offset (sync)
    long step = 0;
    double eta_anchor = 0.0;               // eta at the most recent gather step
    double grad_norm_anchor = 0.0;         // ||g|| at the most recent gather step
};

/// model <- model - eta * GAR(grads). Async expects exactly q_w gradients;
/// sync accepts what was delivered (between n_w - f_w and n_w) and caps
/// MDA's f so the rule stays defined. The step counter is advanced by the
/// driver, not here.
void server_scatter_step(ServerState& s, std::span<const ParamVector> grads,
                         const Topology& topo, double eta, Gar gar = Gar::mda);

/// model <- Median(peer_models); peer_models must include s's own
/// post-update model and have exactly q_ps entries.
void server_gather_step(ServerState& s, std::span<const ParamVector> peer_models,
                        const Topology& topo);

/// model <- Median(models); last_gradient sampled at the adopted model.
void worker_async_step(WorkerState& w, std::span<const ParamVector> models,
                       const Topology& topo, const Task& task, int batch, Rng& rng);

/// Returns model - eta * last_gradient and stores it as local_model.
ParamVector worker_speculate(WorkerState& w, double eta);

struct FilterDecision {
    bool accept = false;
    double k = 0.0;
    bool k_defined = false;  // false on a degenerate stationary step
};

/// Empirical Lipschitz coefficient check:
/// k = ||new_grad - last_gradient|| / ||local_model - model||, accepted iff
/// the history is still in warm-up (shorter than n_ps) or k is at most the
/// (n_ps - f_ps)/n_ps nearest-rank quantile of the history. Zero denominator
/// accepts with k excluded. Recording into the history is the caller's job,
/// once the Outliers filter has also passed.
FilterDecision lipschitz_filter(const WorkerState& w, const ParamVector& pulled_model,
                                const ParamVector& new_grad, const Topology& topo);

/// Distance bound between the speculated local model and a pulled model:
/// ||local - pulled|| < eta_anchor * grad_norm_anchor *
///   ((3T+2)(n_w - f_w) / (4 f_w) + 2 ((t-1) mod T)).
/// f_w = 0 degenerates to always-accept.
bool outliers_filter(const WorkerState& w, const ParamVector& pulled_model, long t, int T,
                     const Topology& topo, double eta_anchor, double grad_norm_anchor);

struct PullRecord {
    int server = -1;
    bool responded = false;
    bool accepted = false;
};

struct SyncStepResult {
    int adopted_from = -1;  // -1 on fallback
    bool fallback = false;
    std::vector<PullRecord> pulls;
};

/// One synchronous scatter step: speculate with eta_prev (the rate of the
/// server update being predicted; pass 0 right after a gather), then pull
/// models round-robin starting at (rr_offset + t) mod n_ps, compute a fresh
/// gradient at each, and adopt the first model passing both filters. After
/// n_ps consecutive rejects the worker falls back to its own local_model.
/// `pull` returns nullopt for silent servers.
SyncStepResult worker_sync_step(WorkerState& w,
                                const std::function<std::optional<ParamVector>(int)>& pull,
                                const Topology& topo, const Task& task, int batch,
                                double eta_prev, Rng& rng);

/// Gather-phase re-synchronization: model <- Median(models); filters are
/// bypassed. Sync expects models from all servers that answered (n_ps -
/// f_ps .. n_ps), async exactly q_ps.
void worker_gather_step(WorkerState& w, std::span<const ParamVector> models,
                        const Topology& topo);

/// Recompute the gradient at the gather-adopted model and refresh the
/// filter anchors (eta and ||g|| at this gather step).
void worker_refresh_after_gather(WorkerState& w, const Task& task, int batch, double eta_now,
                                 Rng& rng);

}  // namespace byzsgd
