#include <cmath>

#include "byzsgd/adversary.hpp"
#include "doctest.h"

using namespace byzsgd;
using V = ParamVector;
using Vs = std::vector<ParamVector>;

namespace {
AttackSpec spec_for(AttackStrategy s) {
    AttackSpec a;
    a.strategy = s;
    return a;
}
}  // namespace

TEST_CASE("forge_model: reversed") {
    Rng rng(1);
    AttackSpec a = spec_for(AttackStrategy::reversed);
    CHECK(forge_model(a, {1.0, -2.0}, rng) == V{-1.0, 2.0});
    // involution at scale 1
    const V m{0.25, -3.5, 7.0};
    CHECK(forge_model(a, forge_model(a, m, rng), rng) == m);
    a.scale = 2.0;
    CHECK(forge_model(a, {1.0}, rng) == V{-2.0});
}

TEST_CASE("forge_model: lie_model scales by z") {
    Rng rng(1);
    AttackSpec a = spec_for(AttackStrategy::lie_model);
    a.z = 1.035;
    const V got = forge_model(a, {2.0, 0.0}, rng);
    CHECK(got[0] == doctest::Approx(2.07));
    CHECK(got[1] == 0.0);
}

TEST_CASE("forge_model: partial_drop zeroes exactly floor(0.1 d) coordinates") {
    Rng rng(9);
    AttackSpec a = spec_for(AttackStrategy::partial_drop);
    const V m(10, 3.25);
    for (int trial = 0; trial < 50; ++trial) {
        const V got = forge_model(a, m, rng);
        int zeros = 0;
        for (std::size_t i = 0; i < got.size(); ++i) {
            if (got[i] == 0.0) ++zeros;
            else CHECK(got[i] == m[i]);
        }
        CHECK(zeros == 1);
    }
}

TEST_CASE("forge_model: random stays in the configured range") {
    Rng rng(4);
    AttackSpec a = spec_for(AttackStrategy::random);
    a.random_lo = -0.5;
    a.random_hi = 0.25;
    for (int trial = 0; trial < 20; ++trial) {
        const V got = forge_model(a, V(6, 1.0), rng);
        for (double x : got) {
            CHECK(x >= -0.5);
            CHECK(x <= 0.25);
        }
    }
}

TEST_CASE("forge_gradients: lie_gradient uses mean + z_sigma * population std") {
    Rng rng(2);
    AttackSpec a = spec_for(AttackStrategy::lie_gradient);

    a.z_sigma = 0.0;
    auto out = forge_gradients(a, Vs{{1.0}, {2.0}, {3.0}}, 2, 0, rng);
    REQUIRE(out.size() == 2);
    CHECK(out[0] == V{2.0});
    CHECK(out[1] == V{2.0});

    a.z_sigma = 1.5;
    out = forge_gradients(a, Vs{{1.0}, {2.0}, {3.0}}, 2, 0, rng);
    const double pop_std = std::sqrt(2.0 / 3.0);
    CHECK(out[0][0] == doctest::Approx(2.0 + 1.5 * pop_std));
}

TEST_CASE("forge_gradients: mute sends nothing, custom equivocates per receiver") {
    Rng rng(3);
    CHECK(forge_gradients(spec_for(AttackStrategy::mute), Vs{{1.0}}, 3, 0, rng).empty());

    AttackSpec a = spec_for(AttackStrategy::custom);
    a.forge = [](const Vs& honest, int receiver) {
        const double sign = receiver == 0 ? 1.0 : -1.0;
        return Vs{scaled(honest.front(), sign)};
    };
    CHECK(forge_gradients(a, Vs{{5.0}}, 1, 0, rng) == Vs{{5.0}});
    CHECK(forge_gradients(a, Vs{{5.0}}, 1, 1, rng) == Vs{{-5.0}});
}

TEST_CASE("forging never mutates the observed honest messages") {
    Rng rng(6);
    const Vs honest{{1.0, 2.0}, {3.0, 4.0}};
    Vs copy = honest;
    AttackSpec a = spec_for(AttackStrategy::lie_gradient);
    a.z_sigma = 2.0;
    (void)forge_gradients(a, copy, 1, 0, rng);
    CHECK(copy == honest);
    const V m{1.0, -1.0};
    V mc = m;
    (void)forge_model(spec_for(AttackStrategy::reversed), mc, rng);
    CHECK(mc == m);
}
