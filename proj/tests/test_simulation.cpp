#include <cmath>

#include "byzsgd/simulation.hpp"
#include "doctest.h"

using namespace byzsgd;

namespace {

SimConfig base_async(int d = 10) {
    SimConfig cfg;
    cfg.topology.n_ps = 4;
    cfg.topology.f_ps = 0;
    cfg.topology.q_ps = 4;
    cfg.topology.n_w = 5;
    cfg.topology.f_w = 0;
    cfg.topology.q_w = 5;
    cfg.topology.d = d;
    cfg.topology.mode = Mode::async;
    cfg.topology.gather_period = 3;
    cfg.task.kind = TaskKind::quadratic;
    cfg.task.d = d;
    cfg.task.theta_star_fill = 0.0;
    cfg.task.noise_sigma = 0.0;
    cfg.task.batch_ref = 16;
    cfg.schedule = {0.1, 0.0};
    cfg.steps = 200;
    cfg.seed = 11;
    cfg.batch = 16;
    cfg.theta0_fill = 1.0;
    return cfg;
}

bool traces_equal(const MetricsTrace& a, const MetricsTrace& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const auto& x = a[i];
        const auto& y = b[i];
        if (x.step != y.step || x.phase != y.phase || x.server_id != y.server_id ||
            x.loss != y.loss || x.grad_norm != y.grad_norm || x.delta != y.delta ||
            x.max_pairwise != y.max_pairwise || x.filter_rejects != y.filter_rejects ||
            x.pulls != y.pulls)
            return false;
    }
    return true;
}

bool models_equal(const std::vector<ParamVector>& a, const std::vector<ParamVector>& b) {
    return a == b;
}

}  // namespace

TEST_CASE("zero-Byzantine run equals single-node gradient descent closed form") {
    SimConfig cfg = base_async();
    cfg.options.record_models = true;
    const SimResult res = run(cfg);

    // theta_t - theta* = prod_{s<t} (1 - eta_s) * (theta0 - theta*), coordinate-wise
    double factor = 1.0;
    for (long t = 0; t < cfg.steps; ++t) {
        factor *= 1.0 - learning_rate(cfg.schedule, t);
        const auto& models = res.model_history[(std::size_t)t];
        REQUIRE((int)models.size() == cfg.topology.n_ps);
        for (const auto& m : models)
            for (double x : m) CHECK(std::abs(x - factor) <= 1e-12);
    }
    // final gradient norm below 1e-6, matching the geometric decay closely
    const double final_norm = l2_norm(res.final_models[0]);
    CHECK(final_norm < 1e-6);
    CHECK(std::abs(final_norm - std::abs(factor) * std::sqrt(10.0)) <= 1e-10);
    // with everything identical, delta stays exactly zero
    for (const auto& r : res.trace) CHECK(r.delta == 0.0);
}

TEST_CASE("same seed gives an identical trace, different seed does not") {
    SimConfig cfg = base_async();
    cfg.task.noise_sigma = 0.05;
    cfg.topology.f_w = 1;
    cfg.topology.q_w = 3;
    cfg.topology.n_w = 5;
    const SimResult a = run(cfg);
    const SimResult b = run(cfg);
    CHECK(traces_equal(a.trace, b.trace));
    CHECK(models_equal(a.final_models, b.final_models));

    SimConfig other = cfg;
    other.seed = 12;
    const SimResult c = run(other);
    CHECK_FALSE(traces_equal(a.trace, c.trace));
}

TEST_CASE("mute everywhere matches the attack-free run with the same seeds") {
    SimConfig cfg = base_async();
    cfg.task.noise_sigma = 0.1;
    cfg.topology.n_ps = 5;
    cfg.topology.f_ps = 1;
    cfg.topology.q_ps = 4;
    cfg.topology.n_w = 7;
    cfg.topology.f_w = 2;
    cfg.topology.q_w = 5;
    const SimResult bare = run(cfg);

    SimConfig muted = cfg;
    AttackSpec wa;
    wa.target = AttackTarget::worker_gradients;
    wa.strategy = AttackStrategy::mute;
    muted.worker_attack = wa;
    AttackSpec sa;
    sa.target = AttackTarget::server_models;
    sa.strategy = AttackStrategy::mute;
    muted.server_attack = sa;
    const SimResult quiet = run(muted);

    CHECK(traces_equal(bare.trace, quiet.trace));
    CHECK(models_equal(bare.final_models, quiet.final_models));
}

TEST_CASE("reversed-gradient workers with zero noise never enter the MDA subset") {
    SimConfig cfg = base_async();
    cfg.task.noise_sigma = 0.0;
    cfg.topology.n_w = 7;
    cfg.topology.f_w = 2;
    cfg.topology.q_w = 5;
    cfg.steps = 60;
    cfg.options.record_mda_selection = true;

    SimConfig attacked = cfg;
    AttackSpec wa;
    wa.target = AttackTarget::worker_gradients;
    wa.strategy = AttackStrategy::reversed;
    attacked.worker_attack = wa;

    const SimResult bare = run(cfg);
    const SimResult hit = run(attacked);

    // per-step MDA selection excludes every forged position
    for (const auto& step_picks : hit.mda_history)
        for (const auto& pick : step_picks)
            for (int byz : pick.byz_positions)
                CHECK(std::find(pick.selected.begin(), pick.selected.end(), byz) ==
                      pick.selected.end());

    CHECK(models_equal(bare.final_models, hit.final_models));
}

TEST_CASE("metrics invariants hold under an aggressive random-model server attack") {
    SimConfig cfg = base_async(4);
    cfg.task.d = 4;
    cfg.task.noise_sigma = 0.2;
    cfg.topology.n_ps = 9;
    cfg.topology.f_ps = 1;
    cfg.topology.q_ps = 4;
    cfg.topology.n_w = 7;
    cfg.topology.f_w = 2;
    cfg.topology.q_w = 5;
    cfg.topology.gather_period = 1;  // gather every step
    cfg.steps = 300;
    AttackSpec sa;
    sa.target = AttackTarget::server_models;
    sa.strategy = AttackStrategy::random;
    sa.random_lo = -1e6;
    sa.random_hi = 1e6;
    cfg.server_attack = sa;
    cfg.options.record_models = true;

    const SimResult res = run(cfg);
    CHECK((long)res.model_history.size() == cfg.steps);
    CHECK(res.final_models.size() == 8);
    for (const auto& r : res.trace) {
        CHECK(r.delta >= 0.0);
        CHECK(r.max_pairwise <= r.delta + 1e-12);
    }
}

TEST_CASE("drift plateau shrinks when the learning rate is halved") {
    SimConfig cfg = base_async(4);
    cfg.task.d = 4;
    cfg.task.noise_sigma = 0.5;
    cfg.topology.n_ps = 9;
    cfg.topology.f_ps = 1;
    cfg.topology.q_ps = 4;
    cfg.topology.n_w = 7;
    cfg.topology.f_w = 2;
    cfg.topology.q_w = 5;
    cfg.topology.gather_period = 8;
    cfg.steps = 1200;
    cfg.schedule = {0.08, 0.0};
    cfg.theta0_fill = 1.0;

    auto scatter_plateau = [](const SimResult& r) {
        double sum = 0.0;
        long count = 0;
        for (const auto& rec : r.trace) {
            if (rec.server_id != 0 || rec.step < 400) continue;
            if (rec.phase == PhaseTag::scatter) {
                sum += rec.delta;
                ++count;
            }
        }
        return sum / (double)count;
    };

    const double full = scatter_plateau(run(cfg));
    SimConfig halved = cfg;
    halved.schedule.eta0 = 0.04;
    const double half = scatter_plateau(run(halved));
    CHECK(full >= 1.5 * half);
}

TEST_CASE("per-receiver equivocation diverges server models unless DMC contracts them") {
    SimConfig cfg = base_async(4);
    cfg.task.d = 4;
    cfg.task.noise_sigma = 0.05;
    cfg.topology.n_ps = 5;
    cfg.topology.f_ps = 1;
    cfg.topology.q_ps = 4;
    cfg.topology.n_w = 7;
    cfg.topology.f_w = 2;
    cfg.topology.q_w = 5;
    cfg.steps = 400;
    cfg.schedule = {0.05, 0.0};

    // Stealthy split: Byzantine workers nudge even-indexed servers one way
    // and odd-indexed ones the other, staying inside the honest cloud.
    AttackSpec wa;
    wa.target = AttackTarget::worker_gradients;
    wa.strategy = AttackStrategy::custom;
    wa.occupy_always = true;
    wa.forge = [](const std::vector<ParamVector>& honest, int receiver) {
        ParamVector mean = average(honest);
        ParamVector tilt(mean.size(), receiver % 2 == 0 ? 0.03 : -0.03);
        return std::vector<ParamVector>(2, add(mean, tilt));
    };
    cfg.worker_attack = wa;

    auto mean_delta = [](const SimResult& r) {
        double sum = 0.0;
        long n = 0;
        for (const auto& rec : r.trace) {
            if (rec.server_id != 0 || rec.step < 100) continue;
            sum += rec.delta;
            ++n;
        }
        return sum / (double)n;
    };

    SimConfig rare_gather = cfg;
    rare_gather.topology.gather_period = 10;
    SimConfig dmc_every_step = cfg;
    dmc_every_step.topology.gather_period = 1;

    const double drifting = mean_delta(run(rare_gather));
    const double contracted = mean_delta(run(dmc_every_step));
    CHECK(drifting > 2.0 * contracted);
}

TEST_CASE("logistic task end to end") {
    SimConfig cfg;
    cfg.topology.n_ps = 4;
    cfg.topology.f_ps = 0;
    cfg.topology.q_ps = 4;
    cfg.topology.n_w = 5;
    cfg.topology.f_w = 0;
    cfg.topology.q_w = 5;
    cfg.topology.d = 4;
    cfg.topology.mode = Mode::async;
    cfg.topology.gather_period = 2;
    cfg.task.kind = TaskKind::logistic;
    cfg.task.d = 4;
    cfg.task.samples = 150;
    cfg.task.dataset_seed = 9;
    cfg.schedule = {0.5, 0.002};
    cfg.steps = 400;
    cfg.batch = 32;
    cfg.seed = 21;
    const Task task = cfg.task.build();
    const SimResult res = run(cfg);
    const double final_loss = res.trace.back().loss;
    CHECK(final_loss < std::log(2.0));  // below the all-zero starting loss
    CHECK(res.trace.back().grad_norm < 0.1);
    CHECK(task.lipschitz_constant() > 0.0);
}

TEST_CASE("attack configuration against a zero-f topology is rejected") {
    SimConfig cfg = base_async();
    AttackSpec wa;
    wa.target = AttackTarget::worker_gradients;
    wa.strategy = AttackStrategy::reversed;
    cfg.worker_attack = wa;  // but f_w = 0
    CHECK_THROWS_AS(run(cfg), std::invalid_argument);
}
