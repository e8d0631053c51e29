#include "byzsgd/topology.hpp"

#include <string>

namespace byzsgd {

namespace {

[[noreturn]] void fail(const std::string& msg) { throw TopologyError(msg); }

std::string num(int v) { return std::to_string(v); }

}  // namespace

Topology validate_topology(Topology t) {
    t.warnings.clear();

    if (t.n_ps < 1) fail("n_ps must be positive");
    if (t.n_w < 1) fail("n_w must be positive");
    if (t.d < 1) fail("d must be positive");
    if (t.f_ps < 0) fail("f_ps must be non-negative");
    if (t.f_w < 0) fail("f_w must be non-negative");
    if (t.q_ps < 1) fail("q_ps must be positive");
    if (t.q_w < 1) fail("q_w must be positive");
    if (t.gather_period < 1) fail("T must be at least 1");

    if (t.q_ps > t.n_ps - t.f_ps)
        fail("q_ps = " + num(t.q_ps) + " exceeds n_ps - f_ps = " + num(t.n_ps - t.f_ps));

    const bool strict_window = 2 * t.f_ps + 2 <= t.n_ps - t.f_ps;  // iff n_ps >= 3 f_ps + 2
    if (strict_window) {
        if (t.q_ps < 2 * t.f_ps + 2)
            fail("q_ps = " + num(t.q_ps) + " below 2*f_ps + 2 = " + num(2 * t.f_ps + 2));
    } else {
        if (t.q_ps < 2 * t.f_ps + 1)
            fail("q_ps = " + num(t.q_ps) + " below Median majority floor 2*f_ps + 1 = " +
                 num(2 * t.f_ps + 1));
        t.warnings.push_back("degraded regime: n_ps < 3*f_ps + 2, q_ps accepted at the "
                             "2*f_ps + 1 Median floor without server over-provisioning");
    }

    if (t.q_w < 2 * t.f_w + 1)
        fail("q_w = " + num(t.q_w) + " below 2*f_w + 1 = " + num(2 * t.f_w + 1));
    if (t.q_w > t.n_w - t.f_w)
        fail("q_w = " + num(t.q_w) + " exceeds n_w - f_w = " + num(t.n_w - t.f_w));

    if (t.mode == Mode::async) {
        if (t.n_w < 3 * t.f_w + 1)
            fail("async mode needs n_w >= 3*f_w + 1 = " + num(3 * t.f_w + 1));
    } else {
        if (t.n_w < 2 * t.f_w + 1)
            fail("sync mode needs n_w >= 2*f_w + 1 = " + num(2 * t.f_w + 1));
    }
    if (t.n_ps < 3 * t.f_ps + 1)
        fail("n_ps = " + num(t.n_ps) + " below 3*f_ps + 1 = " + num(3 * t.f_ps + 1));

    if (!t.strict_contraction_regime())
        t.warnings.push_back("q_ps > floor((n_ps - f_ps)/2): expected-contraction lemma "
                             "conditions not met; safety still holds");

    return t;
}

}  // namespace byzsgd
