#include "byzsgd/protocol.hpp"

#include <algorithm>
#include <stdexcept>

namespace byzsgd {

void server_scatter_step(ServerState& s, std::span<const ParamVector> grads,
                         const Topology& topo, double eta, Gar gar) {
    const int m = static_cast<int>(grads.size());
    int f_used = topo.f_w;
    if (topo.mode == Mode::async) {
        if (m != topo.q_w)
            throw std::invalid_argument("server_scatter_step: expected q_w gradients");
    } else {
        if (m < topo.correct_workers() || m > topo.n_w)
            throw std::invalid_argument("server_scatter_step: sync delivery count out of range");
        f_used = std::min(topo.f_w, (m - 1) / 2);
    }
    const ParamVector agg = aggregate_gradients(gar, grads, f_used);
    axpy(s.model, -eta, agg);
}

void server_gather_step(ServerState& s, std::span<const ParamVector> peer_models,
                        const Topology& topo) {
    if (static_cast<int>(peer_models.size()) != topo.q_ps)
        throw std::invalid_argument("server_gather_step: expected q_ps models");
    s.model = median(peer_models);
}

void worker_async_step(WorkerState& w, std::span<const ParamVector> models,
                       const Topology& topo, const Task& task, int batch, Rng& rng) {
    if (static_cast<int>(models.size()) != topo.q_ps)
        throw std::invalid_argument("worker_async_step: expected q_ps models");
    w.model = median(models);
    w.last_gradient = task.sample_gradient(w.model, batch, rng);
}

ParamVector worker_speculate(WorkerState& w, double eta) {
    if (w.last_gradient.empty())
        throw std::invalid_argument("worker_speculate: last_gradient unset");
    w.local_model = w.model;
    axpy(w.local_model, -eta, w.last_gradient);
    return w.local_model;
}

FilterDecision lipschitz_filter(const WorkerState& w, const ParamVector& pulled_model,
                                const ParamVector& new_grad, const Topology& topo) {
    (void)pulled_model;  // enters through new_grad, computed at the pulled model
    FilterDecision out;
    const double den = l2_distance(w.local_model, w.model);
    if (den == 0.0) {
        // Degenerate stationary step: accept, coefficient undefined.
        out.accept = true;
        return out;
    }
    out.k = l2_distance(new_grad, w.last_gradient) / den;
    out.k_defined = true;
    const int warmup = topo.n_ps;
    if (static_cast<int>(w.lipschitz_history.size()) < warmup) {
        out.accept = true;
        return out;
    }
    const double p = static_cast<double>(topo.n_ps - topo.f_ps) / static_cast<double>(topo.n_ps);
    out.accept = out.k <= quantile(w.lipschitz_history, p);
    return out;
}

bool outliers_filter(const WorkerState& w, const ParamVector& pulled_model, long t, int T,
                     const Topology& topo, double eta_anchor, double grad_norm_anchor) {
    if (topo.f_w == 0) return true;  // bound is infinite; flagged by the driver
    const long m = ((t - 1) % T + T) % T;
    const double factor = (3.0 * T + 2.0) * static_cast<double>(topo.correct_workers()) /
                              (4.0 * static_cast<double>(topo.f_w)) +
                          2.0 * static_cast<double>(m);
    const double bound = eta_anchor * grad_norm_anchor * factor;
    return l2_distance(w.local_model, pulled_model) < bound;
}

SyncStepResult worker_sync_step(WorkerState& w,
                                const std::function<std::optional<ParamVector>(int)>& pull,
                                const Topology& topo, const Task& task, int batch,
                                double eta_prev, Rng& rng) {
    if (topo.mode != Mode::sync)
        throw std::invalid_argument("worker_sync_step: sync mode only");
    worker_speculate(w, eta_prev);

    SyncStepResult res;
    for (int i = 0; i < topo.n_ps; ++i) {
        const int idx = static_cast<int>((w.rr_offset + w.step + i) % topo.n_ps);
        PullRecord rec;
        rec.server = idx;
        std::optional<ParamVector> m = pull(idx);
        if (!m.has_value()) {
            res.pulls.push_back(rec);
            continue;
        }
        rec.responded = true;
        const ParamVector grad = task.sample_gradient(*m, batch, rng);
        const FilterDecision lip = lipschitz_filter(w, *m, grad, topo);
        const bool out_ok = outliers_filter(w, *m, w.step, topo.gather_period, topo,
                                            w.eta_anchor, w.grad_norm_anchor);
        if (lip.accept && out_ok) {
            rec.accepted = true;
            res.pulls.push_back(rec);
            if (lip.k_defined) w.lipschitz_history.push_back(lip.k);
            w.model = std::move(*m);
            w.last_gradient = grad;
            res.adopted_from = idx;
            return res;
        }
        res.pulls.push_back(rec);
    }
    // Every server rejected: keep the speculated model so the run continues.
    res.fallback = true;
    w.model = w.local_model;
    w.last_gradient = task.sample_gradient(w.model, batch, rng);
    return res;
}

void worker_gather_step(WorkerState& w, std::span<const ParamVector> models,
                        const Topology& topo) {
    const int m = static_cast<int>(models.size());
    if (topo.mode == Mode::async) {
        if (m != topo.q_ps)
            throw std::invalid_argument("worker_gather_step: expected q_ps models");
    } else {
        if (m < topo.correct_servers() || m > topo.n_ps)
            throw std::invalid_argument("worker_gather_step: sync delivery count out of range");
    }
    w.model = median(models);
}

void worker_refresh_after_gather(WorkerState& w, const Task& task, int batch, double eta_now,
                                 Rng& rng) {
    w.last_gradient = task.sample_gradient(w.model, batch, rng);
    w.eta_anchor = eta_now;
    w.grad_norm_anchor = l2_norm(w.last_gradient);
    w.local_model = w.model;
}

}  // namespace byzsgd
