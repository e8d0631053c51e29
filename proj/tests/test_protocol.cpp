#include <optional>

#include "byzsgd/protocol.hpp"
#include "doctest.h"

using namespace byzsgd;
using V = ParamVector;
using Vs = std::vector<ParamVector>;

namespace {

Topology topo_async(int n_ps, int f_ps, int q_ps, int n_w, int f_w, int q_w, int d, int T = 3) {
    Topology t;
    t.n_ps = n_ps;
    t.f_ps = f_ps;
    t.q_ps = q_ps;
    t.n_w = n_w;
    t.f_w = f_w;
    t.q_w = q_w;
    t.d = d;
    t.mode = Mode::async;
    t.gather_period = T;
    return validate_topology(t);
}

Topology topo_sync(int n_ps, int f_ps, int n_w, int f_w, int d, int T = 3) {
    Topology t;
    t.n_ps = n_ps;
    t.f_ps = f_ps;
    t.q_ps = std::min(2 * f_ps + 2, n_ps - f_ps);
    t.n_w = n_w;
    t.f_w = f_w;
    t.q_w = n_w - f_w;
    t.d = d;
    t.mode = Mode::sync;
    t.gather_period = T;
    return validate_topology(t);
}

}  // namespace

TEST_CASE("server_scatter_step: examples") {
    const Topology t = topo_async(4, 0, 2, 4, 1, 3, 1);

    ServerState s{0, {5.0}, 0};
    server_scatter_step(s, Vs{{0.0}, {0.0}, {0.0}}, t, 0.1);
    CHECK(s.model == V{5.0});

    s.model = {5.0};
    server_scatter_step(s, Vs{{1.0}, {1.0}, {1.0}}, t, 0.1);
    CHECK(s.model[0] == doctest::Approx(4.9));

    s.model = {0.0};
    server_scatter_step(s, Vs{{1.0}, {1.1}, {-50.0}}, t, 1.0);
    CHECK(s.model[0] == doctest::Approx(-1.05));

    CHECK_THROWS_AS(server_scatter_step(s, Vs{{1.0}}, t, 0.1), std::invalid_argument);
}

TEST_CASE("server_gather_step: examples") {
    const Topology t = topo_async(9, 1, 4, 7, 2, 5, 1);
    ServerState s{0, {1.0}, 0};
    server_gather_step(s, Vs{{2.0}, {2.0}, {2.0}, {2.0}}, t);
    CHECK(s.model == V{2.0});
    server_gather_step(s, Vs{{1.0}, {2.0}, {3.0}, {100.0}}, t);
    CHECK(s.model == V{2.5});
    CHECK_THROWS_AS(server_gather_step(s, Vs{{1.0}}, t), std::invalid_argument);
}

TEST_CASE("median-based steps never leave the correct hull, even-count included") {
    const Topology t = topo_async(9, 1, 4, 7, 2, 5, 1);
    Rng rng(4);
    for (int trial = 0; trial < 1000; ++trial) {
        Vs models;
        double lo = 1e300, hi = -1e300;
        for (int i = 0; i < 3; ++i) {  // strict majority of the 4 inputs is correct
            const double x = rng.uniform(-10.0, 10.0);
            models.push_back({x});
            lo = std::min(lo, x);
            hi = std::max(hi, x);
        }
        models.push_back({rng.uniform(-1e6, 1e6)});
        ServerState s{0, {0.0}, 0};
        server_gather_step(s, models, t);
        CHECK(s.model[0] >= lo);
        CHECK(s.model[0] <= hi);
    }
}

TEST_CASE("worker_async_step: examples") {
    const Topology t = topo_async(4, 0, 3, 3, 0, 3, 1);
    const Task task = Task::quadratic({0.0}, 0.0, 16);
    Rng rng(5);

    WorkerState w;
    w.model = {7.0};
    worker_async_step(w, Vs{{4.0}, {4.0}, {4.0}}, t, task, 4, rng);
    CHECK(w.model == V{4.0});

    worker_async_step(w, Vs{{0.0}, {2.0}, {9.0}}, t, task, 4, rng);
    CHECK(w.model == V{2.0});
    CHECK(w.last_gradient == task.true_gradient({2.0}));

    CHECK_THROWS_AS(worker_async_step(w, Vs{{0.0}}, t, task, 4, rng), std::invalid_argument);
}

TEST_CASE("worker_speculate") {
    WorkerState w;
    w.model = {1.0};
    w.last_gradient = {2.0};
    CHECK(worker_speculate(w, 0.25) == V{0.5});
    CHECK(w.local_model == V{0.5});

    w.last_gradient = {0.0};
    CHECK(worker_speculate(w, 0.9) == w.model);
}

TEST_CASE("lipschitz_filter: warm-up, quantile accept and reject, zero denominator") {
    const Topology t = topo_sync(4, 1, 5, 1, 1);
    WorkerState w;
    w.model = {0.0};
    w.local_model = {1.0};      // denominator 1
    w.last_gradient = {0.0};

    SUBCASE("warm-up accepts anything while history is short") {
        w.lipschitz_history = {0.1, 0.2, 0.3};  // shorter than n_ps = 4
        CHECK(lipschitz_filter(w, {1.0}, {100.0}, t).accept);
    }

    SUBCASE("quantile threshold at p = 3/4") {
        w.lipschitz_history = {0.9, 1.0, 1.1, 5.0};
        const FilterDecision ok = lipschitz_filter(w, {1.0}, {1.05}, t);
        CHECK(ok.accept);
        CHECK(ok.k == doctest::Approx(1.05));
        const FilterDecision bad = lipschitz_filter(w, {1.0}, {4.0}, t);
        CHECK_FALSE(bad.accept);
    }

    SUBCASE("stationary step accepts with k excluded") {
        w.local_model = w.model;
        w.lipschitz_history = {0.1, 0.1, 0.1, 0.1};
        const FilterDecision d = lipschitz_filter(w, {1.0}, {100.0}, t);
        CHECK(d.accept);
        CHECK_FALSE(d.k_defined);
    }
}

TEST_CASE("outliers_filter: threshold formula and degenerate f_w = 0") {
    const Topology t = topo_sync(5, 1, 4, 1, 1, 3);
    WorkerState w;
    w.model = {0.0};
    w.local_model = {0.0};
    // T=3, n_w=4, f_w=1, eta=0.1, ||g||=2, (t-1) mod T = 1
    // threshold = 0.2 * (11 * 3/4 + 2) = 2.05
    const long step = 5;
    w.local_model = {0.0};
    CHECK(outliers_filter(w, {2.0}, step, 3, t, 0.1, 2.0));        // distance 2.0 < 2.05
    CHECK_FALSE(outliers_filter(w, {2.1}, step, 3, t, 0.1, 2.0));  // 2.1 > 2.05
    CHECK(outliers_filter(w, w.local_model, step, 3, t, 0.1, 2.0));
    CHECK_FALSE(outliers_filter(w, {2050.0}, step, 3, t, 0.1, 2.0));

    Topology t0 = t;
    t0.f_w = 0;
    t0.q_w = t0.n_w;
    t0 = validate_topology(t0);
    CHECK(outliers_filter(w, {1e9}, step, 3, t0, 0.1, 2.0));
}

TEST_CASE("worker_sync_step: accept, skip Byzantine, fallback") {
    const Topology t = topo_sync(4, 1, 4, 1, 1, 5);
    const Task task = Task::quadratic({0.0}, 0.0, 16);

    WorkerState w;
    w.model = {10.0};
    w.last_gradient = task.true_gradient(w.model);
    w.rr_offset = 0;
    w.step = 1;
    w.eta_anchor = 0.1;
    w.grad_norm_anchor = l2_norm(w.last_gradient);

    const V honest{9.0};  // one eta * g step from 10.0 at eta = 0.1

    SUBCASE("all servers correct: first pull accepted") {
        Rng rng(1);
        auto res = worker_sync_step(
            w, [&](int) { return std::optional<V>(honest); }, t, task, 4, 0.1, rng);
        CHECK(res.adopted_from == 1);  // (rr + step) mod n_ps
        CHECK_FALSE(res.fallback);
        CHECK(res.pulls.size() == 1);
        CHECK(w.model == honest);
        CHECK(w.lipschitz_history.size() == 1);
    }

    SUBCASE("a wild model at the first index costs exactly one extra pull") {
        Rng rng(1);
        auto res = worker_sync_step(
            w,
            [&](int idx) {
                return std::optional<V>(idx == 1 ? V{1e6} : honest);
            },
            t, task, 4, 0.1, rng);
        CHECK(res.adopted_from == 2);
        CHECK(res.pulls.size() == 2);
        CHECK_FALSE(res.pulls[0].accepted);
        CHECK(res.pulls[1].accepted);
    }

    SUBCASE("total rejection falls back to the speculated local model") {
        Rng rng(1);
        auto res = worker_sync_step(
            w, [&](int) { return std::optional<V>(V{1e6}); }, t, task, 4, 0.1, rng);
        CHECK(res.fallback);
        CHECK(res.adopted_from == -1);
        CHECK(res.pulls.size() == 4);
        CHECK(w.model == w.local_model);
        CHECK(w.lipschitz_history.empty());
    }

    SUBCASE("silent servers are skipped and recorded") {
        Rng rng(1);
        auto res = worker_sync_step(
            w,
            [&](int idx) {
                return idx == 1 ? std::optional<V>{} : std::optional<V>(honest);
            },
            t, task, 4, 0.1, rng);
        CHECK(res.adopted_from == 2);
        REQUIRE(res.pulls.size() == 2);
        CHECK_FALSE(res.pulls[0].responded);
        CHECK(res.pulls[1].responded);
    }
}

TEST_CASE("worker_gather_step: median adoption, filters bypassed") {
    const Topology t = topo_async(9, 1, 4, 7, 2, 5, 1);
    WorkerState w;
    w.model = {0.0};
    worker_gather_step(w, Vs{{3.0}, {3.0}, {3.0}, {3.0}}, t);
    CHECK(w.model == V{3.0});
    worker_gather_step(w, Vs{{0.0}, {2.0}, {9.0}, {4.0}}, t);
    CHECK(w.model == V{3.0});
    CHECK_THROWS_AS(worker_gather_step(w, Vs{{1.0}}, t), std::invalid_argument);

    const Topology ts = topo_sync(4, 1, 4, 1, 1);
    worker_gather_step(w, Vs{{1.0}, {2.0}, {5.0}}, ts);  // n_ps - f_ps models are enough
    CHECK(w.model == V{2.0});
}

TEST_CASE("gather idempotence: identical inputs are a fixed point") {
    const Topology t = topo_async(9, 1, 4, 7, 2, 5, 2);
    ServerState s{0, {1.0, -2.0}, 0};
    const Vs peers(4, V{1.0, -2.0});
    server_gather_step(s, peers, t);
    const V once = s.model;
    server_gather_step(s, peers, t);
    CHECK(s.model == once);
    CHECK(s.model == V{1.0, -2.0});
}

TEST_CASE("speculation then zero-noise pull equals the server update") {
    // Single-server regime with all-equal worker gradients: the pulled model
    // must equal the speculated one since MDA of identical gradients is that
    // gradient.
    const Task task = Task::quadratic({0.0, 0.0}, 0.0, 16);
    Topology t;
    t.n_ps = 4;
    t.f_ps = 0;
    t.q_ps = 2;
    t.n_w = 4;
    t.f_w = 1;
    t.q_w = 3;
    t.d = 2;
    t.mode = Mode::sync;
    t.gather_period = 4;
    t = validate_topology(t);

    WorkerState w;
    w.model = {4.0, -2.0};
    w.last_gradient = task.true_gradient(w.model);

    const double eta = 0.25;
    const V local = worker_speculate(w, eta);

    ServerState s{0, {4.0, -2.0}, 0};
    const Vs grads(3, task.true_gradient(s.model));
    server_scatter_step(s, grads, t, eta);
    CHECK(s.model == local);
}
