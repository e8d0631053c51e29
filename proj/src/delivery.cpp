#include "byzsgd/delivery.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace byzsgd {

namespace {

struct ExchangeShape {
    int pool;       // correct senders eligible for the draw
    int quorum;     // messages the receiver waits for
    int f;          // declared Byzantine senders
    int lo, hi;     // admissible correct-subset sizes (peers only for s2s)
    bool self;      // receiver's own vector occupies one slot
    int receivers;  // correct receivers of this exchange
    int n_senders;  // total senders incl. Byzantine
};

ExchangeShape shape_of(const Topology& t, Exchange ex, int receiver) {
    ExchangeShape s{};
    switch (ex) {
        case Exchange::s2w:
            s = {t.correct_servers(), t.q_ps, t.f_ps, 0, 0, false, t.correct_workers(), t.n_ps};
            s.lo = t.q_ps - t.f_ps;
            s.hi = t.q_ps;
            break;
        case Exchange::w2s:
            s = {t.correct_workers(), t.q_w, t.f_w, 0, 0, false, t.correct_servers(), t.n_w};
            s.lo = t.q_w - t.f_w;
            s.hi = t.q_w;
            break;
        case Exchange::s2s:
            s = {t.correct_servers() - 1, t.q_ps, t.f_ps, 0, 0, true, t.correct_servers(),
                 t.n_ps};
            s.lo = t.q_ps - t.f_ps - 1;
            s.hi = t.q_ps - 1;
            break;
    }
    (void)receiver;
    s.lo = std::max(s.lo, 0);
    s.hi = std::min(s.hi, s.pool);
    if (s.lo > s.hi) throw std::invalid_argument("delivery: unsatisfiable quorum");
    return s;
}

long binom(int n, int k) {
    if (k < 0 || k > n) return 0;
    k = std::min(k, n - k);
    long r = 1;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

// Uniform k-subset of {0..pool-1} via partial Fisher-Yates, returned sorted.
std::vector<int> uniform_subset(Rng& rng, int pool, int k) {
    std::vector<int> ids(static_cast<std::size_t>(pool));
    std::iota(ids.begin(), ids.end(), 0);
    for (int i = 0; i < k; ++i) {
        const int j = rng.uniform_int(i, pool - 1);
        std::swap(ids[static_cast<std::size_t>(i)], ids[static_cast<std::size_t>(j)]);
    }
    ids.resize(static_cast<std::size_t>(k));
    std::sort(ids.begin(), ids.end());
    return ids;
}

}  // namespace

long admissible_subset_count(const Topology& topo, Exchange ex) {
    const ExchangeShape s = shape_of(topo, ex, 0);
    long total = 0;
    for (int k = s.lo; k <= s.hi; ++k) total += binom(s.pool, k);
    return total;
}

double min_config_probability(const Topology& topo, Exchange ex) {
    const ExchangeShape s = shape_of(topo, ex, 0);
    const double per = 1.0 / static_cast<double>(admissible_subset_count(topo, ex));
    return std::pow(per, s.receivers);
}

ReceiverQuorum sample_receiver_quorum(Rng& rng, const Topology& topo, Exchange ex, int receiver,
                                      bool occupy_always) {
    const ExchangeShape s = shape_of(topo, ex, receiver);
    int k;
    if (occupy_always) {
        k = s.lo;
    } else {
        // size weighted by subset count => uniform over the whole union
        long total = 0;
        for (int i = s.lo; i <= s.hi; ++i) total += binom(s.pool, i);
        long r = static_cast<long>(rng.uniform_int(0, static_cast<int>(total) - 1));
        k = s.lo;
        for (int i = s.lo; i <= s.hi; ++i) {
            const long c = binom(s.pool, i);
            if (r < c) {
                k = i;
                break;
            }
            r -= c;
        }
    }

    std::vector<int> picked = uniform_subset(rng, s.pool, k);
    ReceiverQuorum q;
    q.includes_self = s.self;
    if (s.self) {
        // Pool positions skip the receiver itself; map back to server ids.
        q.correct.reserve(picked.size());
        for (int p : picked) q.correct.push_back(p < receiver ? p : p + 1);
        q.byz_slots = s.quorum - 1 - k;
    } else {
        q.correct = std::move(picked);
        q.byz_slots = s.quorum - k;
    }
    return q;
}

std::vector<int> pad_with_correct(Rng& rng, const ReceiverQuorum& q, int pool_size, int self,
                                  int needed) {
    std::vector<int> remaining;
    for (int i = 0; i < pool_size; ++i) {
        if (q.includes_self && i == self) continue;
        if (std::find(q.correct.begin(), q.correct.end(), i) != q.correct.end()) continue;
        remaining.push_back(i);
    }
    if (needed > static_cast<int>(remaining.size()))
        throw std::invalid_argument("pad_with_correct: not enough correct senders");
    for (int i = 0; i < needed; ++i) {
        const int j = rng.uniform_int(i, static_cast<int>(remaining.size()) - 1);
        std::swap(remaining[static_cast<std::size_t>(i)], remaining[static_cast<std::size_t>(j)]);
    }
    remaining.resize(static_cast<std::size_t>(needed));
    std::sort(remaining.begin(), remaining.end());
    return remaining;
}

DeliveringConfig sample_delivering_config(Rng& rng, const Topology& topo, Exchange ex,
                                          bool occupy_always) {
    const ExchangeShape s = shape_of(topo, ex, 0);
    const int byz_base = s.n_senders - s.f;
    DeliveringConfig cfg;
    cfg.senders.resize(static_cast<std::size_t>(s.receivers));
    for (int r = 0; r < s.receivers; ++r) {
        ReceiverQuorum q = sample_receiver_quorum(rng, topo, ex, r, occupy_always);
        auto& list = cfg.senders[static_cast<std::size_t>(r)];
        if (q.includes_self) list.push_back(r);
        list.insert(list.end(), q.correct.begin(), q.correct.end());
        for (int b = 0; b < q.byz_slots; ++b) list.push_back(byz_base + b);
    }
    return cfg;
}

}  // namespace byzsgd
