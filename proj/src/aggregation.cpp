#include "byzsgd/aggregation.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>

namespace byzsgd {

void check_same_dim_finite(std::span<const ParamVector> vs, const char* who) {
    if (vs.empty()) throw std::invalid_argument(std::string(who) + ": empty input");
    const std::size_t d = vs.front().size();
    for (const auto& v : vs) {
        if (v.size() != d) throw std::invalid_argument(std::string(who) + ": dimension mismatch");
        if (!is_finite(v)) throw std::invalid_argument(std::string(who) + ": non-finite coordinate");
    }
}

ParamVector average(std::span<const ParamVector> vs) {
    check_same_dim_finite(vs, "average");
    const std::size_t d = vs.front().size();
    ParamVector out(d, 0.0);
    for (const auto& v : vs)
        for (std::size_t i = 0; i < d; ++i) out[i] += v[i];
    const double inv = 1.0 / static_cast<double>(vs.size());
    for (double& x : out) x *= inv;
    return out;
}

ParamVector median(std::span<const ParamVector> vs) {
    check_same_dim_finite(vs, "median");
    const std::size_t d = vs.front().size();
    const std::size_t q = vs.size();
    ParamVector out(d);
    std::vector<double> coord(q);
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = 0; j < q; ++j) coord[j] = vs[j][i];
        std::sort(coord.begin(), coord.end());
        if (q % 2 == 1) {
            out[i] = coord[q / 2];
        } else {
            out[i] = 0.5 * (coord[q / 2 - 1] + coord[q / 2]);
        }
    }
    return out;
}

double l2_diameter(std::span<const ParamVector> vs) {
    check_same_dim_finite(vs, "l2_diameter");
    double best = 0.0;
    for (std::size_t a = 0; a < vs.size(); ++a)
        for (std::size_t b = a + 1; b < vs.size(); ++b)
            best = std::max(best, l2_distance(vs[a], vs[b]));
    return best;
}

double coordwise_diameter_sum(std::span<const ParamVector> vs) {
    check_same_dim_finite(vs, "coordwise_diameter_sum");
    const std::size_t d = vs.front().size();
    double sum = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
        double lo = vs.front()[i], hi = vs.front()[i];
        for (const auto& v : vs) {
            lo = std::min(lo, v[i]);
            hi = std::max(hi, v[i]);
        }
        sum += hi - lo;
    }
    return sum;
}

double quantile(std::vector<double> values, double p) {
    if (values.empty()) throw std::invalid_argument("quantile: empty input");
    if (p < 0.0 || p > 1.0) throw std::invalid_argument("quantile: p out of [0,1]");
    std::sort(values.begin(), values.end());
    const long n = static_cast<long>(values.size());
    long idx = static_cast<long>(std::ceil(p * static_cast<double>(n))) - 1;
    idx = std::clamp(idx, 0L, n - 1);
    return values[static_cast<std::size_t>(idx)];
}

namespace {

// Sorted-value-sequence comparison used for diameter ties: makes the
// selected mean independent of input order.
bool value_tuple_less(std::span<const ParamVector> vs, const std::vector<int>& a,
                      const std::vector<int>& b) {
    std::vector<const ParamVector*> va, vb;
    va.reserve(a.size());
    vb.reserve(b.size());
    for (int i : a) va.push_back(&vs[static_cast<std::size_t>(i)]);
    for (int i : b) vb.push_back(&vs[static_cast<std::size_t>(i)]);
    auto lex = [](const ParamVector* x, const ParamVector* y) {
        return std::lexicographical_compare(x->begin(), x->end(), y->begin(), y->end());
    };
    std::sort(va.begin(), va.end(), lex);
    std::sort(vb.begin(), vb.end(), lex);
    for (std::size_t i = 0; i < va.size(); ++i) {
        if (lex(va[i], vb[i])) return true;
        if (lex(vb[i], va[i])) return false;
    }
    return false;
}

double subset_diameter(std::span<const ParamVector> vs, const std::vector<int>& idx) {
    double best = 0.0;
    for (std::size_t a = 0; a < idx.size(); ++a)
        for (std::size_t b = a + 1; b < idx.size(); ++b)
            best = std::max(best, l2_distance(vs[static_cast<std::size_t>(idx[a])],
                                              vs[static_cast<std::size_t>(idx[b])]));
    return best;
}

}  // namespace

MdaResult mda_select(std::span<const ParamVector> vs, int f) {
    check_same_dim_finite(vs, "mda");
    const int q = static_cast<int>(vs.size());
    if (f < 0) throw std::invalid_argument("mda: negative f");
    if (q < 2 * f + 1) throw std::invalid_argument("mda: needs at least 2f + 1 inputs");
    const int k = q - f;

    std::vector<int> idx(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) idx[static_cast<std::size_t>(i)] = i;

    MdaResult best;
    bool have = false;
    // Lexicographic enumeration of ascending index tuples.
    while (true) {
        const double diam = subset_diameter(vs, idx);
        if (!have || diam < best.diameter ||
            (diam == best.diameter && value_tuple_less(vs, idx, best.indices))) {
            best.indices = idx;
            best.diameter = diam;
            have = true;
        }
        int i = k - 1;
        while (i >= 0 && idx[static_cast<std::size_t>(i)] == q - k + i) --i;
        if (i < 0) break;
        ++idx[static_cast<std::size_t>(i)];
        for (int j = i + 1; j < k; ++j)
            idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
    }

    // Accumulate in lexicographic value order so the returned point is
    // bit-identical under input permutation.
    std::vector<const ParamVector*> sel;
    sel.reserve(best.indices.size());
    for (int i : best.indices) sel.push_back(&vs[static_cast<std::size_t>(i)]);
    std::sort(sel.begin(), sel.end(), [](const ParamVector* a, const ParamVector* b) {
        return std::lexicographical_compare(a->begin(), a->end(), b->begin(), b->end());
    });
    const std::size_t d = vs.front().size();
    best.mean.assign(d, 0.0);
    for (const ParamVector* v : sel)
        for (std::size_t c = 0; c < d; ++c) best.mean[c] += (*v)[c];
    for (double& x : best.mean) x /= static_cast<double>(k);
    return best;
}

ParamVector mda(std::span<const ParamVector> vs, int f) { return mda_select(vs, f).mean; }

ParamVector aggregate_gradients(Gar gar, std::span<const ParamVector> vs, int f) {
    switch (gar) {
        case Gar::mda: return mda(vs, f);
        case Gar::average: return average(vs);
    }
    throw std::logic_error("aggregate_gradients: unknown rule");
}

}  // namespace byzsgd
