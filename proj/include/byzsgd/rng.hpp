// Seeded random streams with a documented splitting rule.
//
// One master seed fully determines a simulation. Every (node, purpose) pair
// gets its own mt19937_64 stream whose seed is derived by splitmix64-mixing
// master ^ node_tag ^ purpose. Node tags: worker j -> j, server i -> n_w + i,
// driver-level streams use tags past n_w + n_ps. Adding a consumer of a new
// purpose never perturbs existing streams.
#pragma once

#include <cstdint>
#include <random>

namespace byzsgd {

enum class Purpose : std::uint64_t {
    init = 0x9e01,
    gradient = 0x9e02,
    delivery = 0x9e03,
    attack = 0x9e04,
    measure = 0x9e05,
};

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t node_tag, Purpose purpose) {
    std::uint64_t s = splitmix64(master);
    s = splitmix64(s ^ (node_tag * 0xd1342543de82ef95ULL));
    s = splitmix64(s ^ static_cast<std::uint64_t>(purpose));
    return s;
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    static Rng child(std::uint64_t master, std::uint64_t node_tag, Purpose purpose) {
        return Rng(derive_seed(master, node_tag, purpose));
    }

    double normal() { return std::normal_distribution<double>{0.0, 1.0}(eng_); }

    double uniform(double lo = 0.0, double hi = 1.0) {
        return std::uniform_real_distribution<double>{lo, hi}(eng_);
    }

    /// Inclusive on both ends.
    int uniform_int(int lo, int hi) {
        return std::uniform_int_distribution<int>{lo, hi}(eng_);
    }

    std::mt19937_64& engine() { return eng_; }

private:
    std::mt19937_64 eng_;
};

}  // namespace byzsgd
