#include "byzsgd/simulation.hpp"

#include <algorithm>
#include <stdexcept>

#include "byzsgd/delivery.hpp"

namespace byzsgd {

Task TaskSpec::build() const {
    if (kind == TaskKind::quadratic) {
        ParamVector star = theta_star;
        if (star.empty()) star.assign(static_cast<std::size_t>(d), theta_star_fill);
        return Task::quadratic(std::move(star), noise_sigma, batch_ref);
    }
    return Task::logistic(d, samples, dataset_seed, flip_rate, batch_ref);
}

namespace {

bool occupies(const std::optional<AttackSpec>& a) {
    return a && a->active() && a->strategy != AttackStrategy::mute && a->occupy_always;
}

bool forging(const std::optional<AttackSpec>& a) {
    return a && a->active() && a->strategy != AttackStrategy::mute;
}

struct Driver {
    const SimConfig& cfg;
    Topology topo;
    Task task;
    int h_ps, h_w;

    std::vector<ServerState> servers;  // all n_ps; ids >= h_ps are Byzantine
    std::vector<WorkerState> workers;  // all n_w;  ids >= h_w  are Byzantine

    std::vector<Rng> worker_grad, worker_delivery, worker_attack_rng;
    std::vector<Rng> server_delivery, server_attack_rng;

    SimResult result;
    long step_rejects = 0, step_pulls = 0;

    explicit Driver(const SimConfig& c)
        : cfg(c), topo(validate_topology(c.topology)), task(c.task.build()),
          h_ps(topo.correct_servers()), h_w(topo.correct_workers()) {
        if (task.dimension() != topo.d)
            throw std::invalid_argument("run: task dimension disagrees with topology d");
        result.warnings = topo.warnings;
        if (cfg.worker_attack && topo.f_w == 0)
            throw std::invalid_argument("run: worker attack configured with f_w = 0");
        if (cfg.server_attack && topo.f_ps == 0)
            throw std::invalid_argument("run: server attack configured with f_ps = 0");
        if (topo.mode == Mode::sync && topo.f_w == 0)
            result.warnings.push_back("outliers filter degenerates to always-accept (f_w = 0)");

        ParamVector theta0 = cfg.theta0;
        if (theta0.empty()) theta0.assign(static_cast<std::size_t>(topo.d), cfg.theta0_fill);
        if (static_cast<int>(theta0.size()) != topo.d)
            throw std::invalid_argument("run: theta0 dimension mismatch");

        for (int i = 0; i < topo.n_ps; ++i) servers.push_back({i, theta0, 0});
        for (int j = 0; j < topo.n_w; ++j) {
            workers.push_back({});
            workers.back().id = j;
            workers.back().model = theta0;
        }

        for (int j = 0; j < topo.n_w; ++j) {
            const auto tag = static_cast<std::uint64_t>(j);
            worker_grad.push_back(Rng::child(cfg.seed, tag, Purpose::gradient));
            worker_delivery.push_back(Rng::child(cfg.seed, tag, Purpose::delivery));
            worker_attack_rng.push_back(Rng::child(cfg.seed, tag, Purpose::attack));
        }
        for (int i = 0; i < topo.n_ps; ++i) {
            const auto tag = static_cast<std::uint64_t>(topo.n_w + i);
            server_delivery.push_back(Rng::child(cfg.seed, tag, Purpose::delivery));
            server_attack_rng.push_back(Rng::child(cfg.seed, tag, Purpose::attack));
        }

        // Sync initialization: fixed pull offsets and one backprop at theta0.
        if (topo.mode == Mode::sync) {
            for (int j = 0; j < topo.n_w; ++j) {
                Rng init = Rng::child(cfg.seed, static_cast<std::uint64_t>(j), Purpose::init);
                workers[static_cast<std::size_t>(j)].rr_offset = init.uniform_int(0, topo.n_ps - 1);
                auto& w = workers[static_cast<std::size_t>(j)];
                w.last_gradient = task.sample_gradient(w.model, cfg.batch,
                                                       worker_grad[static_cast<std::size_t>(j)]);
                w.eta_anchor = learning_rate(cfg.schedule, 0);
                w.grad_norm_anchor = l2_norm(w.last_gradient);
                w.local_model = w.model;
            }
        }
    }

    // Models delivered to worker j under a q_ps quorum (async scatter and
    // async gather). Forged entries fill the adversary's slots; declined
    // slots are padded with extra correct servers from the same stream.
    std::vector<ParamVector> server_models_for_worker(int j) {
        auto& rng = worker_delivery[static_cast<std::size_t>(j)];
        const ReceiverQuorum q =
            sample_receiver_quorum(rng, topo, Exchange::s2w, j, occupies(cfg.server_attack));
        std::vector<ParamVector> models;
        models.reserve(static_cast<std::size_t>(topo.q_ps));
        for (int id : q.correct) models.push_back(servers[static_cast<std::size_t>(id)].model);
        if (j < h_w && forging(cfg.server_attack)) {
            for (int b = 0; b < q.byz_slots; ++b) {
                const auto byz = static_cast<std::size_t>(h_ps + b);
                models.push_back(forge_model(*cfg.server_attack, servers[byz].model,
                                             worker_attack_rng[static_cast<std::size_t>(j)]));
            }
        } else {
            for (int id : pad_with_correct(rng, q, h_ps, -1, q.byz_slots))
                models.push_back(servers[static_cast<std::size_t>(id)].model);
        }
        return models;
    }

    // Gradients delivered to server i, plus which positions are forged.
    std::vector<ParamVector> gradients_for_server(int i, std::vector<int>* byz_positions) {
        std::vector<ParamVector> grads;
        if (topo.mode == Mode::async) {
            auto& rng = server_delivery[static_cast<std::size_t>(i)];
            const ReceiverQuorum q =
                sample_receiver_quorum(rng, topo, Exchange::w2s, i, occupies(cfg.worker_attack));
            grads.reserve(static_cast<std::size_t>(topo.q_w));
            for (int id : q.correct)
                grads.push_back(workers[static_cast<std::size_t>(id)].last_gradient);
            if (i < h_ps && forging(cfg.worker_attack)) {
                append_forged_gradients(i, q.byz_slots, grads, byz_positions);
            } else {
                for (int id : pad_with_correct(rng, q, h_w, -1, q.byz_slots))
                    grads.push_back(workers[static_cast<std::size_t>(id)].last_gradient);
            }
        } else {
            grads.reserve(static_cast<std::size_t>(topo.n_w));
            for (int id = 0; id < h_w; ++id)
                grads.push_back(workers[static_cast<std::size_t>(id)].last_gradient);
            if (i < h_ps && forging(cfg.worker_attack))
                append_forged_gradients(i, topo.f_w, grads, byz_positions);
        }
        return grads;
    }

    void append_forged_gradients(int receiver, int count, std::vector<ParamVector>& grads,
                                 std::vector<int>* byz_positions) {
        const AttackSpec& spec = *cfg.worker_attack;
        auto& rng = server_attack_rng[static_cast<std::size_t>(receiver)];
        std::vector<ParamVector> forged;
        if (spec.per_sender()) {
            for (int b = 0; b < count; ++b) {
                const auto byz = static_cast<std::size_t>(h_w + b);
                forged.push_back(forge_model(spec, workers[byz].last_gradient, rng));
            }
        } else {
            std::vector<ParamVector> honest;
            honest.reserve(static_cast<std::size_t>(h_w));
            for (int id = 0; id < h_w; ++id)
                honest.push_back(workers[static_cast<std::size_t>(id)].last_gradient);
            auto all = forge_gradients(spec, honest, topo.f_w, receiver, rng);
            forged.assign(all.begin(), all.begin() + count);
        }
        for (auto& g : forged) {
            if (byz_positions) byz_positions->push_back(static_cast<int>(grads.size()));
            grads.push_back(std::move(g));
        }
    }

    // Scatter-phase single pull for sync worker j.
    std::optional<ParamVector> pull_model(int j, int idx) {
        if (idx < h_ps) return servers[static_cast<std::size_t>(idx)].model;
        if (j < h_w && forging(cfg.server_attack))
            return forge_model(*cfg.server_attack, servers[static_cast<std::size_t>(idx)].model,
                               worker_attack_rng[static_cast<std::size_t>(j)]);
        return std::nullopt;  // silent Byzantine server
    }

    void account_sync(const SyncStepResult& res) {
        for (const PullRecord& p : res.pulls) {
            ++result.filters.total_pulls;
            ++step_pulls;
            if (!p.responded) {
                ++result.filters.silent_pulls;
                continue;
            }
            const bool forged = p.server >= h_ps;
            if (forged) {
                ++result.filters.submitted_forged;
                if (p.accepted) ++result.filters.adopted_forged;
                else ++result.filters.rejected_forged;
            } else {
                ++result.filters.submitted_correct;
                if (!p.accepted) ++result.filters.rejected_correct;
            }
            if (!p.accepted) ++step_rejects;
        }
        if (res.fallback) ++result.filters.fallbacks;
        else ++result.filters.adoptions;
    }

    void one_step(long t) {
        const double eta = learning_rate(cfg.schedule, t);
        const bool gather = phase_of(t, topo.gather_period) == PhaseTag::gather;
        // Rate of the server update the sync speculation predicts; zero right
        // after a gather (the worker is already synchronized).
        const bool just_synced = t == 0 || (t - 1) % topo.gather_period == 0;
        const double eta_prev = just_synced ? 0.0 : learning_rate(cfg.schedule, t - 1);
        step_rejects = step_pulls = 0;

        for (auto& s : servers) s.step = t;
        for (auto& w : workers) w.step = t;

        // (1) models reach workers
        if (topo.mode == Mode::async) {
            for (int j = 0; j < topo.n_w; ++j) {
                auto models = server_models_for_worker(j);
                worker_async_step(workers[static_cast<std::size_t>(j)], models, topo, task,
                                  cfg.batch, worker_grad[static_cast<std::size_t>(j)]);
            }
        } else if (!gather) {
            for (int j = 0; j < topo.n_w; ++j) {
                auto& w = workers[static_cast<std::size_t>(j)];
                auto pull = [this, j](int idx) { return pull_model(j, idx); };
                const SyncStepResult res = worker_sync_step(
                    w, pull, topo, task, cfg.batch, eta_prev,
                    worker_grad[static_cast<std::size_t>(j)]);
                if (j < h_w) account_sync(res);
            }
        } else {
            for (int j = 0; j < topo.n_w; ++j)
                worker_speculate(workers[static_cast<std::size_t>(j)], eta_prev);
        }

        // (2) gradients reach servers
        std::vector<MdaPick> picks;
        for (int i = 0; i < topo.n_ps; ++i) {
            std::vector<int> byz_pos;
            auto grads = gradients_for_server(i, &byz_pos);
            if (cfg.options.record_mda_selection && i < h_ps && cfg.gar == Gar::mda) {
                const int m = static_cast<int>(grads.size());
                const int f_used =
                    topo.mode == Mode::async ? topo.f_w : std::min(topo.f_w, (m - 1) / 2);
                picks.push_back({mda_select(grads, f_used).indices, byz_pos});
            }
            server_scatter_step(servers[static_cast<std::size_t>(i)], grads, topo, eta, cfg.gar);
        }
        if (cfg.options.record_mda_selection) result.mda_history.push_back(std::move(picks));

        // (3) gather: DMC between servers, then worker re-synchronization
        if (gather) {
            std::vector<ParamVector> snapshot;
            snapshot.reserve(static_cast<std::size_t>(topo.n_ps));
            for (const auto& s : servers) snapshot.push_back(s.model);

            std::vector<ParamVector> updated(static_cast<std::size_t>(topo.n_ps));
            for (int i = 0; i < topo.n_ps; ++i) {
                auto& rng = server_delivery[static_cast<std::size_t>(i)];
                const ReceiverQuorum q = sample_receiver_quorum(rng, topo, Exchange::s2s, i,
                                                                occupies(cfg.server_attack));
                std::vector<ParamVector> peers;
                peers.reserve(static_cast<std::size_t>(topo.q_ps));
                peers.push_back(snapshot[static_cast<std::size_t>(i)]);
                for (int id : q.correct) peers.push_back(snapshot[static_cast<std::size_t>(id)]);
                if (i < h_ps && forging(cfg.server_attack)) {
                    for (int b = 0; b < q.byz_slots; ++b)
                        peers.push_back(forge_model(
                            *cfg.server_attack, snapshot[static_cast<std::size_t>(h_ps + b)],
                            server_attack_rng[static_cast<std::size_t>(i)]));
                } else {
                    for (int id : pad_with_correct(rng, q, h_ps, i, q.byz_slots))
                        peers.push_back(snapshot[static_cast<std::size_t>(id)]);
                }
                ServerState tmp = servers[static_cast<std::size_t>(i)];
                server_gather_step(tmp, peers, topo);
                updated[static_cast<std::size_t>(i)] = std::move(tmp.model);
            }
            for (int i = 0; i < topo.n_ps; ++i)
                servers[static_cast<std::size_t>(i)].model =
                    std::move(updated[static_cast<std::size_t>(i)]);

            for (int j = 0; j < topo.n_w; ++j) {
                auto& w = workers[static_cast<std::size_t>(j)];
                if (topo.mode == Mode::async) {
                    auto models = server_models_for_worker(j);
                    worker_gather_step(w, models, topo);
                } else {
                    std::vector<ParamVector> models;
                    for (int id = 0; id < h_ps; ++id)
                        models.push_back(servers[static_cast<std::size_t>(id)].model);
                    if (j < h_w && forging(cfg.server_attack)) {
                        for (int b = 0; b < topo.f_ps; ++b)
                            models.push_back(forge_model(
                                *cfg.server_attack,
                                servers[static_cast<std::size_t>(h_ps + b)].model,
                                worker_attack_rng[static_cast<std::size_t>(j)]));
                    }
                    worker_gather_step(w, models, topo);
                    worker_refresh_after_gather(w, task, cfg.batch, eta,
                                                worker_grad[static_cast<std::size_t>(j)]);
                }
            }
        }

        record_metrics(t, gather);
    }

    void record_metrics(long t, bool gather) {
        std::vector<ParamVector> correct;
        correct.reserve(static_cast<std::size_t>(h_ps));
        for (int i = 0; i < h_ps; ++i)
            correct.push_back(servers[static_cast<std::size_t>(i)].model);
        const double delta = coordwise_diameter_sum(correct);
        const double maxp = l2_diameter(correct);
        for (int i = 0; i < h_ps; ++i) {
            MetricsRecord r;
            r.step = t;
            r.phase = gather ? PhaseTag::gather : PhaseTag::scatter;
            r.server_id = i;
            r.loss = task.loss(correct[static_cast<std::size_t>(i)]);
            r.grad_norm = l2_norm(task.true_gradient(correct[static_cast<std::size_t>(i)]));
            r.delta = delta;
            r.max_pairwise = maxp;
            r.filter_rejects = step_rejects;
            r.pulls = step_pulls;
            result.trace.push_back(r);
        }
        if (cfg.options.record_models) result.model_history.push_back(std::move(correct));
    }

    SimResult finish() {
        for (long t = 0; t < cfg.steps; ++t) one_step(t);
        for (int i = 0; i < h_ps; ++i)
            result.final_models.push_back(servers[static_cast<std::size_t>(i)].model);
        return std::move(result);
    }
};

}  // namespace

SimResult run(const SimConfig& cfg) {
    if (cfg.steps < 1) throw std::invalid_argument("run: steps must be positive");
    if (cfg.batch < 1) throw std::invalid_argument("run: batch must be positive");
    Driver driver(cfg);
    return driver.finish();
}

}  // namespace byzsgd
