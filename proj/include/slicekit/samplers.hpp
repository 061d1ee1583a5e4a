// Copyright 2026 The slicekit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cmath>
#include <functional>
#include <istream>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "slicekit/core.hpp"
#include "slicekit/distribution.hpp"
#include "slicekit/local_function.hpp"
#include "slicekit/numeric.hpp"

namespace slicekit {

/// Unnormalized outcome measure used while assembling structural laws.
using Measure = std::map<Outcome, Rational>;

namespace detail {

/// Concatenation of independent parts: a's bits lead, b contributes wb low bits.
inline Measure concat(const Measure &a, const Measure &b, unsigned wb) {
    Measure out;
    for (const auto &[x, p] : a) {
        for (const auto &[y, w] : b) {
            out[(x << wb) | y] += p * w;
        }
    }
    return out;
}

inline void add_scaled(Measure &acc, const Measure &m, const Rational &w) {
    if (w == 0) {
        return;
    }
    for (const auto &[x, p] : m) {
        acc[x] += p * w;
    }
}

inline std::uint64_t low_bits(std::uint64_t v, unsigned start, unsigned bits) {
    if (bits == 0) {
        return 0;
    }
    std::uint64_t mask = bits >= 64 ? ~std::uint64_t{0} : ((std::uint64_t{1} << bits) - 1);
    return (v >> start) & mask;
}

/// Gate over the given inputs, pruned to the inputs it actually reads.
inline Gate make_gate(std::vector<size_t> inputs, GateRule rule) {
    Gate g(std::move(inputs), std::move(rule));
    return g.has_table() ? g.pruned() : g;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Discretization onto uniform random bits
// ---------------------------------------------------------------------------

/// A distribution rounded to multiples of 2^-bits. Input pattern idx maps to
/// outcome i when it falls in the i-th run of counts, in the supplied order.
struct Discretization {
    unsigned bits = 0;
    std::vector<Outcome> outcomes;
    std::vector<std::uint64_t> counts;
    std::vector<Rational> target;
    Rational target_tvd = 0;

    Outcome lookup(std::uint64_t idx) const {
        std::uint64_t acc = 0;
        for (size_t i = 0; i < counts.size(); ++i) {
            acc += counts[i];
            if (idx < acc) {
                return outcomes[i];
            }
        }
        throw std::logic_error("discretization index out of range");
    }

    Rational mass_at(size_t i) const { return Rational(counts[i]) / pow2(bits); }

    Measure masses() const {
        Measure m;
        for (size_t i = 0; i < counts.size(); ++i) {
            if (counts[i]) {
                m[outcomes[i]] += mass_at(i);
            }
        }
        return m;
    }

    ExactDistribution law(OutcomeKind kind, unsigned width) const { return ExactDistribution::from_map(kind, width, masses()); }
};

/// Rounds a distribution given in a fixed outcome order: the first s-1
/// outcomes get floor(B*D_i)/B, the last takes the remainder, with
/// B = 2^ceil(log2(s/eps)). Zero-mass outcomes are skipped.
inline Discretization distr_approx(const std::vector<std::pair<Outcome, Rational>> &ordered, const Rational &eps) {
    if (eps <= 0 || eps > 1) {
        throw ArgumentError("distr_approx needs eps in (0,1], got " + rational_str(eps));
    }
    Discretization d;
    Rational total = 0;
    for (const auto &[x, p] : ordered) {
        if (p < 0) {
            throw ArgumentError("negative mass");
        }
        if (p > 0) {
            d.outcomes.push_back(x);
            d.target.push_back(p);
            total += p;
        }
    }
    if (total != 1 || d.outcomes.empty()) {
        throw ArgumentError("distr_approx target masses must sum to 1");
    }
    size_t s = d.outcomes.size();
    d.bits = s == 1 ? 0 : ceil_log2(Rational(s) / eps);
    if (d.bits > 62) {
        throw CapacityError("discretization needs " + std::to_string(d.bits) + " bits");
    }
    std::uint64_t B = std::uint64_t{1} << d.bits;
    std::uint64_t used = 0;
    for (size_t i = 0; i + 1 < s; ++i) {
        auto c = floor_rational(d.target[i] * Rational(B)).convert_to<std::uint64_t>();
        d.counts.push_back(c);
        used += c;
    }
    d.counts.push_back(B - used);
    Rational dist = 0;
    for (size_t i = 0; i < s; ++i) {
        dist += abs(d.mass_at(i) - d.target[i]);
    }
    d.target_tvd = dist / 2;
    if (d.target_tvd > eps) {
        throw std::logic_error("discretization error exceeds its budget");
    }
    return d;
}

inline Discretization distr_approx(const ExactDistribution &target, const Rational &eps) {
    return distr_approx(target.entries(), eps);
}

/// Gates writing the outcome code of d on `width` output bits (first bit is
/// the most significant), reading inputs [first_input, first_input + bits).
inline std::vector<Gate> discretization_gates(const Discretization &d, unsigned width, size_t first_input) {
    auto dp = std::make_shared<const Discretization>(d);
    std::vector<size_t> inputs;
    for (unsigned b = 0; b < d.bits; ++b) {
        inputs.push_back(first_input + b);
    }
    std::vector<Gate> gates;
    for (unsigned i = 0; i < width; ++i) {
        gates.push_back(detail::make_gate(inputs, [dp, width, i](std::uint64_t local) {
            return bit_of(dp->lookup(local), width, i) != 0;
        }));
    }
    return gates;
}

inline LocalFunction distr_approx_circuit(const Discretization &d, unsigned width) {
    return LocalFunction(d.bits, discretization_gates(d, width, 0));
}

// ---------------------------------------------------------------------------
// Binary split tree: recursive placement of a fixed number of ones
// ---------------------------------------------------------------------------

/// Node over positions [lo, lo + size). For each count of ones that can reach
/// the node, `split` holds the rounded law of the count sent to the left child.
struct SplitNode {
    size_t lo = 0;
    size_t size = 0;
    int left = -1;
    int right = -1;
    size_t offset = 0;
    unsigned bits = 0;
    std::map<unsigned, Discretization> split;
};

struct SplitTree {
    size_t positions = 0;
    Rational node_eps = 0;
    std::vector<SplitNode> nodes;
    size_t total_bits = 0;

    unsigned max_node_bits() const {
        unsigned b = 0;
        for (const auto &nd : nodes) {
            b = std::max(b, nd.bits);
        }
        return b;
    }

    /// Node indices from the root to the leaf holding `position`.
    std::vector<int> path(size_t position) const {
        std::vector<int> out;
        int v = 0;
        while (v >= 0) {
            out.push_back(v);
            const auto &nd = nodes[v];
            if (nd.left < 0) {
                break;
            }
            v = position < nodes[nd.left].lo + nodes[nd.left].size ? nd.left : nd.right;
        }
        return out;
    }

    size_t path_bits(size_t position) const {
        size_t b = 0;
        for (int v : path(position)) {
            b += nodes[v].bits;
        }
        return b;
    }

    /// Sum over internal nodes of the worst rounding error at that node.
    Rational error_sum() const {
        Rational s = 0;
        for (const auto &nd : nodes) {
            Rational worst = 0;
            for (const auto &[l, d] : nd.split) {
                worst = std::max(worst, d.target_tvd);
            }
            s += worst;
        }
        return s;
    }
};

/// Law of the number of ones among the first `left` of `size` positions when
/// `ones` ones are placed uniformly.
inline std::vector<std::pair<Outcome, Rational>> hypergeometric(unsigned size, unsigned left, unsigned ones) {
    unsigned right = size - left;
    unsigned lo = ones > right ? ones - right : 0;
    unsigned hi = std::min(ones, left);
    BigInt denom = binomial(size, ones);
    std::vector<std::pair<Outcome, Rational>> out;
    for (unsigned a = lo; a <= hi; ++a) {
        out.emplace_back(a, Rational(binomial(left, a) * binomial(right, ones - a), denom));
    }
    return out;
}

namespace detail {

inline int grow_split_tree(SplitTree &t, size_t lo, size_t size, const std::set<unsigned> &counts, size_t &next_bit) {
    int id = static_cast<int>(t.nodes.size());
    t.nodes.push_back({});
    t.nodes[id].lo = lo;
    t.nodes[id].size = size;
    if (size < 2) {
        return id;
    }
    unsigned left = static_cast<unsigned>(size / 2);
    std::set<unsigned> lc, rc;
    std::map<unsigned, Discretization> split;
    unsigned bits = 0;
    for (unsigned l : counts) {
        auto d = distr_approx(hypergeometric(static_cast<unsigned>(size), left, l), t.node_eps);
        for (size_t i = 0; i < d.outcomes.size(); ++i) {
            if (d.counts[i]) {
                lc.insert(static_cast<unsigned>(d.outcomes[i]));
                rc.insert(l - static_cast<unsigned>(d.outcomes[i]));
            }
        }
        bits = std::max(bits, d.bits);
        split.emplace(l, std::move(d));
    }
    t.nodes[id].split = std::move(split);
    t.nodes[id].bits = bits;
    t.nodes[id].offset = next_bit;
    next_bit += bits;
    int l = grow_split_tree(t, lo, left, lc, next_bit);
    int r = grow_split_tree(t, lo + left, size - left, rc, next_bit);
    t.nodes[id].left = l;
    t.nodes[id].right = r;
    return id;
}

}  // namespace detail

/// Splits [0, positions) in halves (left half floor(size/2)) down to single
/// positions; each node rounds its hypergeometric split law to node_eps.
/// Random-bit offsets are assigned in preorder, relative to the tree.
inline SplitTree build_split_tree(size_t positions, const std::set<unsigned> &root_counts, const Rational &node_eps) {
    if (positions == 0) {
        throw ArgumentError("split tree needs at least one position");
    }
    for (unsigned c : root_counts) {
        if (c > positions) {
            throw ArgumentError("count of ones exceeds the number of positions");
        }
    }
    SplitTree t;
    t.positions = positions;
    t.node_eps = node_eps;
    size_t next = 0;
    detail::grow_split_tree(t, 0, positions, root_counts, next);
    t.total_bits = next;
    return t;
}

/// Exact law over the node's positions given `ones` ones arrive there.
inline const Measure &split_tree_law(const SplitTree &t, int node, unsigned ones,
                                     std::map<std::pair<int, unsigned>, Measure> &memo) {
    auto key = std::make_pair(node, ones);
    auto it = memo.find(key);
    if (it != memo.end()) {
        return it->second;
    }
    const auto &nd = t.nodes[node];
    Measure out;
    if (nd.left < 0) {
        out[ones] = 1;
    } else {
        const auto &d = nd.split.at(ones);
        unsigned wr = static_cast<unsigned>(t.nodes[nd.right].size);
        for (size_t i = 0; i < d.outcomes.size(); ++i) {
            if (!d.counts[i]) {
                continue;
            }
            unsigned a = static_cast<unsigned>(d.outcomes[i]);
            Measure part = detail::concat(split_tree_law(t, nd.left, a, memo), split_tree_law(t, nd.right, ones - a, memo), wr);
            detail::add_scaled(out, part, d.mass_at(i));
        }
    }
    return memo.emplace(key, std::move(out)).first->second;
}

namespace detail {

/// Input slots of one root-to-leaf walk: node ids and their local bit starts.
struct PathSlots {
    std::vector<int> nodes;
    std::vector<unsigned> start;
};

inline PathSlots append_path_inputs(const SplitTree &t, size_t position, size_t base, std::vector<size_t> &inputs) {
    PathSlots ps;
    for (int v : t.path(position)) {
        ps.nodes.push_back(v);
        ps.start.push_back(static_cast<unsigned>(inputs.size()));
        for (unsigned b = 0; b < t.nodes[v].bits; ++b) {
            inputs.push_back(base + t.nodes[v].offset + b);
        }
    }
    return ps;
}

/// Follows the counts down the path and returns the bit at `position`.
inline bool walk_split_tree(const SplitTree &t, size_t position, unsigned ones, const PathSlots &ps, std::uint64_t local) {
    for (size_t k = 0; k < ps.nodes.size(); ++k) {
        const auto &nd = t.nodes[ps.nodes[k]];
        if (nd.left < 0) {
            break;
        }
        const auto &d = nd.split.at(ones);
        auto a = static_cast<unsigned>(d.lookup(low_bits(local, ps.start[k], d.bits)));
        const auto &l = t.nodes[nd.left];
        ones = position < l.lo + l.size ? a : ones - a;
    }
    return ones != 0;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Plans
// ---------------------------------------------------------------------------

enum class SamplerKind { parity_mod2, biased_truncated, slice_recursive, slice_sparse, mod_sampler, direct_approx };

inline const char *kind_name(SamplerKind k) {
    switch (k) {
    case SamplerKind::parity_mod2:
        return "parity_mod2";
    case SamplerKind::biased_truncated:
        return "biased_truncated";
    case SamplerKind::slice_recursive:
        return "slice_recursive";
    case SamplerKind::slice_sparse:
        return "slice_sparse";
    case SamplerKind::mod_sampler:
        return "mod_sampler";
    case SamplerKind::direct_approx:
        return "direct_approx";
    }
    return "?";
}

inline SamplerKind parse_kind(const std::string &s) {
    if (s == "parity" || s == "parity_mod2") {
        return SamplerKind::parity_mod2;
    }
    if (s == "biased" || s == "biased_truncated") {
        return SamplerKind::biased_truncated;
    }
    if (s == "slice" || s == "slice_recursive") {
        return SamplerKind::slice_recursive;
    }
    if (s == "sparse" || s == "slice_sparse") {
        return SamplerKind::slice_sparse;
    }
    if (s == "mod" || s == "mod_sampler") {
        return SamplerKind::mod_sampler;
    }
    if (s == "direct" || s == "direct_approx") {
        return SamplerKind::direct_approx;
    }
    throw ArgumentError("unknown sampler kind '" + s + "'");
}

/// Target specs: "uniform", "slice:K", "periodic:Q:L1,L2,...", "biased:G".
inline ExactDistribution target_from_spec(unsigned n, const std::string &spec) {
    auto fields = [&] {
        std::vector<std::string> f;
        std::stringstream ss(spec);
        std::string item;
        while (std::getline(ss, item, ':')) {
            f.push_back(item);
        }
        return f;
    }();
    auto num = [&](const std::string &s) {
        if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos) {
            throw ParseError("bad number '" + s + "' in target '" + spec + "'");
        }
        return static_cast<unsigned>(std::stoul(s));
    };
    if (fields.size() == 1 && fields[0] == "uniform") {
        return build_uniform(n);
    }
    if (fields.size() == 2 && fields[0] == "slice") {
        return build_slice(n, num(fields[1]));
    }
    if (fields.size() == 2 && fields[0] == "biased") {
        return build_biased(n, parse_rational(fields[1]));
    }
    if (fields.size() == 3 && fields[0] == "periodic") {
        std::vector<unsigned> lam;
        std::stringstream ss(fields[2]);
        std::string item;
        while (std::getline(ss, item, ',')) {
            lam.push_back(num(item));
        }
        return build_periodic(n, num(fields[1]), lam);
    }
    throw ParseError("bad target spec '" + spec + "'");
}

/// Everything needed to rebuild a sampler deterministically.
struct SamplerRequest {
    SamplerKind kind = SamplerKind::parity_mod2;
    unsigned n = 0;
    unsigned k = 0;
    unsigned q = 0;
    unsigned d = 0;
    std::vector<unsigned> lambda;
    Rational eps = 0;
    Rational gamma = 0;
    std::optional<unsigned> t_override;
    Rational t_const = 1;
    std::string target;
};

struct BitBudget {
    std::string stage;
    unsigned bits = 0;
};

struct ErrorLine {
    std::string stage;
    Rational budget = 0;
    Rational measured = 0;
};

/// Sparse slice layout: block selection tree over t blocks, then one
/// rounded uniform position inside every block.
struct SparseLayout {
    unsigned k = 0;
    SplitTree selection;
    std::vector<size_t> block_start;
    std::vector<size_t> block_size;
    std::vector<Discretization> placement;
    std::vector<size_t> placement_offset;
};

/// Periodic slice layout: residue choice, per-block uniform labels x_i,
/// block weights conditioned on y_i = x_i - x_{i+1} (mod q), and placement.
struct ModLayout {
    unsigned q = 0;
    Discretization residue;
    Discretization label;
    std::vector<size_t> label_offset;
    std::vector<size_t> block_start;
    std::vector<size_t> block_size;
    std::map<std::pair<unsigned, unsigned>, Discretization> block_weight;
    std::map<unsigned, unsigned> weight_bits;
    std::vector<size_t> weight_offset;
    std::map<unsigned, SplitTree> placement;
    std::vector<size_t> placement_offset;
};

struct SamplerPlan {
    SamplerRequest request;
    SamplerKind construction = SamplerKind::parity_mod2;
    unsigned n = 0;
    size_t random_bits = 0;
    size_t declared_locality = 0;
    std::vector<BitBudget> budgets;
    std::vector<ErrorLine> errors;
    std::vector<std::string> notes;
    std::vector<size_t> separator;

    bool parity_odd = false;
    BigInt biased_numerator = 0;
    unsigned biased_bits = 0;
    unsigned slice_ones = 0;
    SplitTree tree;
    SparseLayout sparse;
    ModLayout mod;
    Discretization direct;

    Rational budget_total() const {
        Rational s = 0;
        for (const auto &e : errors) {
            s += e.budget;
        }
        return s;
    }
};

struct BuiltSampler {
    LocalFunction circuit;
    SamplerPlan plan;
};

// ---------------------------------------------------------------------------
// Builders
// ---------------------------------------------------------------------------

namespace detail {

inline BuiltSampler parity_sampler(unsigned n, bool odd) {
    if (n < 2) {
        throw ArgumentError("parity sampler needs n >= 2");
    }
    std::vector<Gate> gates;
    for (unsigned i = 0; i < n; ++i) {
        bool flip = odd && i + 1 == n;
        gates.emplace_back(std::vector<size_t>{i, (i + 1) % n},
                           flip ? std::vector<std::uint8_t>{1, 0, 0, 1} : std::vector<std::uint8_t>{0, 1, 1, 0});
    }
    BuiltSampler s{LocalFunction(n, std::move(gates)), {}};
    s.plan.construction = SamplerKind::parity_mod2;
    s.plan.n = n;
    s.plan.parity_odd = odd;
    s.plan.random_bits = n;
    s.plan.declared_locality = 2;
    s.plan.budgets.push_back({"cyclic xor inputs", n});
    s.plan.errors.push_back({"linear image", 0, 0});
    return s;
}

inline BuiltSampler biased_sampler(unsigned n, const Rational &gamma, unsigned d) {
    if (d < 1 || d > 62) {
        throw ArgumentError("biased sampler needs 1 <= d <= 62");
    }
    if (gamma < 0 || gamma > 1) {
        throw ArgumentError("biased sampler needs gamma in [0,1]");
    }
    BigInt c = nearest_dyadic_numerator(gamma, d);
    auto threshold = (pow2_int(d) - c).convert_to<std::uint64_t>();
    std::vector<Gate> gates;
    for (unsigned i = 0; i < n; ++i) {
        std::vector<size_t> ins;
        for (unsigned b = 0; b < d; ++b) {
            ins.push_back(size_t{i} * d + b);
        }
        gates.push_back(detail::make_gate(ins, [threshold](std::uint64_t local) { return local >= threshold; }));
    }
    BuiltSampler s{LocalFunction(size_t{n} * d, std::move(gates)), {}};
    s.plan.construction = SamplerKind::biased_truncated;
    s.plan.n = n;
    s.plan.biased_numerator = c;
    s.plan.biased_bits = d;
    s.plan.random_bits = size_t{n} * d;
    s.plan.declared_locality = d;
    s.plan.budgets.push_back({"per-bit threshold", d});
    Rational p = Rational(c) / pow2(d);
    s.plan.errors.push_back({"per-bit dyadic rounding", err(gamma, d), abs(p - gamma)});
    return s;
}

inline std::vector<Gate> slice_tree_gates(const SplitTree &tree, unsigned ones) {
    auto tp = std::make_shared<const SplitTree>(tree);
    std::vector<Gate> gates;
    for (size_t p = 0; p < tree.positions; ++p) {
        std::vector<size_t> ins;
        auto ps = append_path_inputs(*tp, p, 0, ins);
        gates.push_back(make_gate(ins, [tp, ps, p, ones](std::uint64_t local) {
            return walk_split_tree(*tp, p, ones, ps, local);
        }));
    }
    return gates;
}

inline unsigned ceil_log2_size(size_t n) {
    return n <= 1 ? 0 : ceil_log2(Rational(static_cast<long long>(n)));
}

}  // namespace detail

/// Cyclic xor circuit (x1^x2, x2^x3, ..., xn^x1); its output is uniform on
/// even-weight strings.
inline LocalFunction build_parity_mod2(unsigned n) {
    return detail::parity_sampler(n, false).circuit;
}

/// Each bit reads d fresh inputs and is 1 with the nearest d-bit dyadic
/// probability to gamma.
inline LocalFunction build_biased_truncated(unsigned n, const Rational &gamma, unsigned d) {
    return detail::biased_sampler(n, gamma, d).circuit;
}

inline BuiltSampler build_slice_recursive(unsigned n, unsigned k, const Rational &eps) {
    if (n < 1 || k > n) {
        throw ArgumentError("slice sampler needs 1 <= n and k <= n");
    }
    if (eps <= 0 || eps > 1) {
        throw ArgumentError("slice sampler needs eps in (0,1]");
    }
    Rational node_eps = eps / n;
    SplitTree tree = build_split_tree(n, {k}, node_eps);
    BuiltSampler s{LocalFunction(tree.total_bits, detail::slice_tree_gates(tree, k)), {}};
    auto &pl = s.plan;
    pl.construction = SamplerKind::slice_recursive;
    pl.n = n;
    pl.slice_ones = k;
    pl.random_bits = tree.total_bits;
    pl.declared_locality = detail::ceil_log2_size(n) * tree.max_node_bits();
    for (const auto &nd : tree.nodes) {
        if (nd.left < 0) {
            continue;
        }
        std::string stage = "split [" + std::to_string(nd.lo + 1) + "," + std::to_string(nd.lo + nd.size) + "]";
        pl.budgets.push_back({stage, nd.bits});
        Rational worst = 0;
        for (const auto &[l, d] : nd.split) {
            worst = std::max(worst, d.target_tvd);
        }
        pl.errors.push_back({stage, node_eps, worst});
    }
    if (!tree.nodes.empty()) {
        for (unsigned b = 0; b < tree.nodes[0].bits; ++b) {
            pl.separator.push_back(tree.nodes[0].offset + b);
        }
    }
    pl.tree = std::move(tree);
    pl.request.kind = SamplerKind::slice_recursive;
    pl.request.n = n;
    pl.request.k = k;
    pl.request.eps = eps;
    return s;
}

/// Probability that a uniform weight-k string puts two ones in one block.
inline Rational collision_probability(const std::vector<size_t> &block_size, unsigned k) {
    // e_k of the block sizes counts the strings with at most one one per block.
    std::vector<BigInt> e(k + 1, 0);
    e[0] = 1;
    size_t n = 0;
    for (size_t h : block_size) {
        n += h;
        for (unsigned j = k; j >= 1; --j) {
            e[j] += e[j - 1] * BigInt(h);
        }
    }
    if (k > n) {
        throw ArgumentError("k exceeds the total length");
    }
    return 1 - Rational(e[k], binomial(static_cast<unsigned>(n), k));
}

inline BuiltSampler build_slice_sparse(unsigned n, unsigned k, const Rational &eps) {
    if (k > n || n < 1) {
        throw ArgumentError("sparse slice sampler needs 1 <= n and k <= n");
    }
    if (eps <= 0 || eps > 1) {
        throw ArgumentError("sparse slice sampler needs eps in (0,1]");
    }
    BuiltSampler s;
    auto &pl = s.plan;
    pl.construction = SamplerKind::slice_sparse;
    pl.n = n;
    pl.slice_ones = k;
    pl.request.kind = SamplerKind::slice_sparse;
    pl.request.n = n;
    pl.request.k = k;
    pl.request.eps = eps;
    if (k == 0) {
        s.circuit = LocalFunction(0, std::vector<Gate>(n, Gate::constant(false)));
        pl.notes.push_back("k=0: constant all-zero circuit");
        pl.errors.push_back({"constant", 0, 0});
        pl.sparse.k = 0;
        pl.sparse.block_start = {0};
        pl.sparse.block_size = {n};
        return s;
    }
    BigInt tb = ceil_rational(Rational(2 * k * k) / eps);
    if (tb > n) {
        throw ArgumentError("sparse slice sampler needs t = ceil(2k^2/eps) = " + tb.str() + " <= n = " +
                            std::to_string(n) + "; use slice_recursive instead");
    }
    auto t = tb.convert_to<unsigned>();
    auto &L = pl.sparse;
    L.k = k;
    L.selection = build_split_tree(t, {k}, eps / 4 / t);
    size_t next = L.selection.total_bits;
    size_t big = n % t;
    size_t pos = 0;
    Rational place_eps = eps / (4 * k);
    unsigned max_place = 0;
    Rational worst_place = 0;
    for (size_t b = 0; b < t; ++b) {
        size_t h = n / t + (b < big ? 1 : 0);
        L.block_start.push_back(pos);
        L.block_size.push_back(h);
        pos += h;
        std::vector<std::pair<Outcome, Rational>> uni;
        for (size_t p = 0; p < h; ++p) {
            uni.emplace_back(p, Rational(1, static_cast<long long>(h)));
        }
        L.placement.push_back(distr_approx(uni, place_eps));
        L.placement_offset.push_back(next);
        next += L.placement.back().bits;
        max_place = std::max(max_place, L.placement.back().bits);
        worst_place = std::max(worst_place, L.placement.back().target_tvd);
    }
    auto lp = std::make_shared<const SparseLayout>(L);
    std::vector<Gate> gates;
    for (size_t b = 0; b < t; ++b) {
        for (size_t p = 0; p < L.block_size[b]; ++p) {
            std::vector<size_t> ins;
            auto ps = detail::append_path_inputs(lp->selection, b, 0, ins);
            unsigned pstart = static_cast<unsigned>(ins.size());
            for (unsigned j = 0; j < L.placement[b].bits; ++j) {
                ins.push_back(L.placement_offset[b] + j);
            }
            gates.push_back(detail::make_gate(ins, [lp, ps, b, p, pstart](std::uint64_t local) {
                if (!detail::walk_split_tree(lp->selection, b, lp->k, ps, local)) {
                    return false;
                }
                const auto &d = lp->placement[b];
                return d.lookup(detail::low_bits(local, pstart, d.bits)) == p;
            }));
        }
    }
    s.circuit = LocalFunction(next, std::move(gates));
    pl.random_bits = next;
    pl.declared_locality = detail::ceil_log2_size(t) * L.selection.max_node_bits() + max_place;
    pl.budgets.push_back({"block selection tree over t=" + std::to_string(t), static_cast<unsigned>(L.selection.total_bits)});
    pl.budgets.push_back({"placement per block (max)", max_place});
    Rational sel_measured = L.selection.error_sum();
    if (t <= kMaxDistBits) {
        std::map<std::pair<int, unsigned>, Measure> memo;
        auto law = ExactDistribution::bits(t, split_tree_law(L.selection, 0, k, memo));
        sel_measured = tvd(law, build_slice(t, k));
    }
    pl.errors.push_back({"block selection", eps / 4, sel_measured});
    pl.errors.push_back({"placement", eps / 4, worst_place * k});
    Rational coll = collision_probability(L.block_size, k);
    Rational coll_budget = Rational(k * k, t);
    if (coll_budget > eps / 2 || coll > coll_budget) {
        throw std::logic_error("collision term exceeds its budget");
    }
    pl.errors.push_back({"collision", eps / 2, coll});
    if (n % t != 0) {
        pl.notes.push_back("unequal block sizes: the collision probability bounds the ideal gap but is not equal to it");
    }
    for (unsigned b = 0; b < L.selection.nodes[0].bits; ++b) {
        pl.separator.push_back(L.selection.nodes[0].offset + b);
    }
    return s;
}

/// Samples the whole output at once from a rounded copy of the target.
inline BuiltSampler direct_approx_sampler(const ExactDistribution &target, const Rational &eps) {
    if (target.kind() != OutcomeKind::bits) {
        throw DomainError("direct sampler needs a bitstring target");
    }
    Discretization d = distr_approx(target, eps);
    BuiltSampler s{distr_approx_circuit(d, target.width()), {}};
    auto &pl = s.plan;
    pl.construction = SamplerKind::direct_approx;
    pl.n = target.width();
    pl.random_bits = d.bits;
    pl.declared_locality = d.bits;
    pl.budgets.push_back({"whole output", d.bits});
    pl.errors.push_back({"whole-output rounding", eps, d.target_tvd});
    pl.direct = std::move(d);
    return s;
}

/// Ideal gap between the block-residue process and the periodic slice for a
/// fixed residue r: 1/2 * sum over residue vectors v with sum r of
/// |q^-(b-1) - prod_i Z(h_i, v_i) / N_r|.
inline Rational mod_ideal_gap(const std::vector<size_t> &block_size, unsigned q, unsigned r) {
    size_t nb = block_size.size();
    size_t n = 0;
    for (size_t h : block_size) {
        n += h;
    }
    auto residue_count = [&](size_t h, unsigned v) {
        BigInt z = 0;
        for (size_t w = v; w <= h; w += q) {
            z += binomial(static_cast<unsigned>(h), static_cast<unsigned>(w));
        }
        return z;
    };
    BigInt Nr = residue_count(n, r);
    if (Nr == 0) {
        throw ArgumentError("residue has empty support");
    }
    double combos = std::pow(static_cast<double>(q), static_cast<double>(nb - 1));
    if (combos > 5e6) {
        throw CapacityError("too many residue vectors for the exact gap");
    }
    std::vector<std::vector<BigInt>> Z(nb, std::vector<BigInt>(q));
    for (size_t i = 0; i < nb; ++i) {
        for (unsigned v = 0; v < q; ++v) {
            Z[i][v] = residue_count(block_size[i], v);
        }
    }
    Rational base = Rational(1) / Rational(BigInt(boost::multiprecision::pow(BigInt(q), static_cast<unsigned>(nb - 1))));
    std::vector<unsigned> v(nb - 1, 0);
    Rational total = 0;
    for (;;) {
        unsigned sum = 0;
        BigInt prod = 1;
        for (size_t i = 0; i + 1 < nb; ++i) {
            sum += v[i];
            prod *= Z[i][v[i]];
        }
        unsigned last = ((r + q * nb - sum % q) % q);
        prod *= Z[nb - 1][last];
        total += abs(base - Rational(prod, Nr));
        size_t i = 0;
        while (i < v.size() && ++v[i] == q) {
            v[i++] = 0;
        }
        if (i == v.size()) {
            break;
        }
    }
    return total / 2;
}

namespace detail {

inline BuiltSampler mod_sampler_impl(unsigned n, unsigned q, const std::vector<unsigned> &lambda, const Rational &eps,
                                     std::optional<unsigned> t_override, const Rational &t_const) {
    auto res = normalize_residues(q, lambda);
    if (n < 1) {
        throw ArgumentError("mod sampler needs n >= 1");
    }
    if (eps <= 0 || eps > 1) {
        throw ArgumentError("mod sampler needs eps in (0,1]");
    }
    if (res.size() == q) {
        auto s = biased_sampler(n, Rational(1, 2), 1);
        s.plan.notes.push_back("full residue set: identity circuit, output uniform");
        return s;
    }
    if (q == 2) {
        auto s = parity_sampler(n, *res.begin() == 1);
        s.plan.notes.push_back("q=2: cyclic xor circuit");
        return s;
    }
    unsigned t = 0;
    if (t_override) {
        t = *t_override;
    } else {
        double v = to_double(t_const) * q * q * std::log2(static_cast<double>(n) / to_double(eps));
        t = static_cast<unsigned>(std::max(1.0, std::ceil(v)));
    }
    if (t == 0) {
        throw ArgumentError("block length must be positive");
    }
    unsigned nb = n / t;
    std::vector<unsigned> lam(res.begin(), res.end());
    if (nb < 2) {
        auto s = direct_approx_sampler(build_periodic(n, q, lam), eps);
        s.plan.notes.push_back("block length " + std::to_string(t) + " leaves fewer than 2 blocks: direct sampler");
        return s;
    }
    BuiltSampler s;
    auto &pl = s.plan;
    pl.construction = SamplerKind::mod_sampler;
    pl.n = n;
    auto &L = pl.mod;
    L.q = q;
    for (unsigned b = 0; b < nb; ++b) {
        size_t h = n / nb + (b < n % nb ? 1 : 0);
        if (h + 1 < q) {
            throw ArgumentError("mod sampler needs block sizes >= q-1");
        }
        L.block_start.push_back(b == 0 ? 0 : L.block_start.back() + L.block_size.back());
        L.block_size.push_back(h);
    }
    // Residue r with probability proportional to the support of its slice.
    BigInt supp_all = periodic_support_size(n, q, lam);
    if (supp_all == 0) {
        throw ArgumentError("empty target support");
    }
    std::vector<std::pair<Outcome, Rational>> rlaw;
    for (unsigned r : lam) {
        rlaw.emplace_back(r, Rational(periodic_support_size(n, q, {r}), supp_all));
    }
    L.residue = distr_approx(rlaw, eps / 2);
    Rational eps_inner = eps / 2;
    Rational eps_p = Rational(t) * eps_inner / (6 * n);
    std::vector<std::pair<Outcome, Rational>> xlaw;
    for (unsigned x = 0; x < q; ++x) {
        xlaw.emplace_back(x, Rational(1, q));
    }
    L.label = distr_approx(xlaw, eps_p);
    size_t next = L.residue.bits;
    for (unsigned b = 0; b < nb; ++b) {
        L.label_offset.push_back(next);
        next += L.label.bits;
    }
    std::set<unsigned> sizes(L.block_size.begin(), L.block_size.end());
    for (unsigned h : sizes) {
        unsigned wb = 0;
        for (unsigned y = 0; y < q; ++y) {
            BigInt z = 0;
            for (unsigned w = y; w <= h; w += q) {
                z += binomial(h, w);
            }
            std::vector<std::pair<Outcome, Rational>> wl;
            for (unsigned w = y; w <= h; w += q) {
                wl.emplace_back(w, Rational(binomial(h, w), z));
            }
            auto d = distr_approx(wl, eps_p);
            wb = std::max(wb, d.bits);
            L.block_weight.emplace(std::make_pair(h, y), std::move(d));
        }
        L.weight_bits[h] = wb;
        std::set<unsigned> all;
        for (unsigned w = 0; w <= h; ++w) {
            all.insert(w);
        }
        L.placement.emplace(h, build_split_tree(h, all, eps_p / h));
    }
    for (unsigned b = 0; b < nb; ++b) {
        unsigned h = static_cast<unsigned>(L.block_size[b]);
        L.weight_offset.push_back(next);
        next += L.weight_bits[h];
        L.placement_offset.push_back(next);
        next += L.placement.at(h).total_bits;
    }
    auto lp = std::make_shared<const ModLayout>(L);
    std::vector<Gate> gates;
    for (unsigned b = 0; b < nb; ++b) {
        unsigned h = static_cast<unsigned>(L.block_size[b]);
        bool last = b + 1 == nb;
        unsigned nxt = last ? 0 : b + 1;
        for (size_t p = 0; p < h; ++p) {
            std::vector<size_t> ins;
            auto add = [&](size_t off, unsigned bits) {
                unsigned st = static_cast<unsigned>(ins.size());
                for (unsigned j = 0; j < bits; ++j) {
                    ins.push_back(off + j);
                }
                return st;
            };
            unsigned xs = add(L.label_offset[b], L.label.bits);
            unsigned ns = add(L.label_offset[nxt], L.label.bits);
            unsigned rs = last ? add(0, L.residue.bits) : 0;
            unsigned ws = add(L.weight_offset[b], L.weight_bits[h]);
            auto ps = detail::append_path_inputs(L.placement.at(h), p, L.placement_offset[b], ins);
            gates.push_back(detail::make_gate(ins, [lp, ps, h, p, last, xs, ns, rs, ws](std::uint64_t local) {
                unsigned q = lp->q;
                auto xi = static_cast<unsigned>(lp->label.lookup(detail::low_bits(local, xs, lp->label.bits)));
                auto xn = static_cast<unsigned>(lp->label.lookup(detail::low_bits(local, ns, lp->label.bits)));
                unsigned r = last ? static_cast<unsigned>(lp->residue.lookup(detail::low_bits(local, rs, lp->residue.bits))) : 0;
                unsigned y = (xi + q - xn + r) % q;
                const auto &wd = lp->block_weight.at({h, y});
                auto w = static_cast<unsigned>(wd.lookup(detail::low_bits(local, ws, wd.bits)));
                return walk_split_tree(lp->placement.at(h), p, w, ps, local);
            }));
        }
    }
    s.circuit = LocalFunction(next, std::move(gates));
    pl.random_bits = next;
    unsigned max_w = 0;
    size_t max_place = 0;
    Rational worst_w = 0;
    for (const auto &[h, b] : L.weight_bits) {
        max_w = std::max(max_w, b);
        const auto &tr = L.placement.at(h);
        max_place = std::max(max_place, size_t{detail::ceil_log2_size(h)} * tr.max_node_bits());
    }
    for (const auto &[key, d] : L.block_weight) {
        worst_w = std::max(worst_w, d.target_tvd);
    }
    pl.declared_locality = 2 * L.label.bits + max_w + max_place + L.residue.bits;
    pl.budgets.push_back({"residue choice", L.residue.bits});
    pl.budgets.push_back({"block label x_i", L.label.bits});
    pl.budgets.push_back({"block weight (max)", max_w});
    pl.budgets.push_back({"block placement path (max)", static_cast<unsigned>(max_place)});
    pl.errors.push_back({"residue choice", eps / 2, L.residue.target_tvd});
    Rational gap = 0;
    for (size_t i = 0; i < L.residue.outcomes.size(); ++i) {
        gap += L.residue.mass_at(i) * mod_ideal_gap(L.block_size, q, static_cast<unsigned>(L.residue.outcomes[i]));
    }
    pl.errors.push_back({"ideal block residues", eps / 4, gap});
    if (gap > eps / 4) {
        pl.notes.push_back("ideal block-residue gap " + decimal_str(to_double(gap)) +
                           " exceeds its budget at block length " + std::to_string(t));
    }
    Rational disc = 0;
    for (unsigned b = 0; b < nb; ++b) {
        disc += L.label.target_tvd + worst_w + L.placement.at(static_cast<unsigned>(L.block_size[b])).error_sum();
    }
    pl.errors.push_back({"block discretization", eps / 4, disc});
    if (disc > eps / 4) {
        throw std::logic_error("block discretization exceeds its budget");
    }
    for (unsigned j = 0; j < L.residue.bits; ++j) {
        pl.separator.push_back(j);
    }
    for (unsigned b = 0; b < nb; ++b) {
        for (unsigned j = 0; j < L.label.bits; ++j) {
            pl.separator.push_back(L.label_offset[b] + j);
        }
    }
    pl.notes.push_back("block length t=" + std::to_string(t) + ", " + std::to_string(nb) + " blocks");
    return s;
}

}  // namespace detail

/// Periodic-slice sampler. Full residue sets give the identity circuit, q=2
/// gives the cyclic xor circuit, and fewer than two blocks give the direct
/// sampler; the route taken is noted in the plan.
inline BuiltSampler build_mod_sampler(unsigned n, unsigned q, const std::vector<unsigned> &lambda, const Rational &eps,
                                      std::optional<unsigned> t_override = {}, const Rational &t_const = 1) {
    auto s = detail::mod_sampler_impl(n, q, lambda, eps, t_override, t_const);
    auto &rq = s.plan.request;
    rq.kind = SamplerKind::mod_sampler;
    rq.n = n;
    rq.q = q;
    rq.lambda = lambda;
    rq.eps = eps;
    rq.t_override = t_override;
    rq.t_const = t_const;
    return s;
}

inline BuiltSampler build_sampler(const SamplerRequest &rq) {
    BuiltSampler s;
    switch (rq.kind) {
    case SamplerKind::parity_mod2:
        s = detail::parity_sampler(rq.n, false);
        break;
    case SamplerKind::biased_truncated:
        s = detail::biased_sampler(rq.n, rq.gamma, rq.d);
        break;
    case SamplerKind::slice_recursive:
        s = build_slice_recursive(rq.n, rq.k, rq.eps);
        break;
    case SamplerKind::slice_sparse:
        s = build_slice_sparse(rq.n, rq.k, rq.eps);
        break;
    case SamplerKind::mod_sampler:
        s = build_mod_sampler(rq.n, rq.q, rq.lambda, rq.eps, rq.t_override, rq.t_const);
        break;
    case SamplerKind::direct_approx:
        s = direct_approx_sampler(target_from_spec(rq.n, rq.target), rq.eps);
        break;
    }
    s.plan.request = rq;
    if (s.plan.budget_total() > rq.eps && rq.kind != SamplerKind::biased_truncated &&
        rq.kind != SamplerKind::parity_mod2) {
        throw std::logic_error("stage budgets exceed the declared error");
    }
    return s;
}

// ---------------------------------------------------------------------------
// Structural output laws (no input enumeration)
// ---------------------------------------------------------------------------

namespace detail {

/// Uniform law on the row space of the cyclic xor map, shifted for odd parity.
inline ExactDistribution parity_law(unsigned n, bool odd) {
    std::vector<Outcome> basis;
    for (unsigned j = 0; j < n; ++j) {
        Outcome v = with_bit(with_bit(0, n, j), n, (j + n - 1) % n);
        for (Outcome b : basis) {
            v = std::min(v, v ^ b);
        }
        if (v) {
            basis.push_back(v);
            std::sort(basis.rbegin(), basis.rend());
        }
    }
    Outcome shift = odd ? with_bit(0, n, n - 1) : 0;
    Rational p = inv_pow2(static_cast<unsigned>(basis.size()));
    std::map<Outcome, Rational> m;
    for (std::uint64_t c = 0; c < (std::uint64_t{1} << basis.size()); ++c) {
        Outcome v = shift;
        for (size_t i = 0; i < basis.size(); ++i) {
            if (c >> i & 1u) {
                v ^= basis[i];
            }
        }
        m[v] += p;
    }
    return ExactDistribution::bits(n, m);
}

inline Measure one_hot(const Discretization &d, unsigned h) {
    Measure m;
    for (size_t i = 0; i < d.outcomes.size(); ++i) {
        if (d.counts[i]) {
            m[Outcome{1} << (h - 1 - d.outcomes[i])] += d.mass_at(i);
        }
    }
    return m;
}

inline ExactDistribution sparse_law(const SamplerPlan &pl) {
    const auto &L = pl.sparse;
    unsigned n = pl.n;
    if (L.k == 0) {
        return ExactDistribution::point(n, 0);
    }
    size_t t = L.block_size.size();
    std::map<std::pair<int, unsigned>, Measure> memo;
    const Measure &sel = split_tree_law(L.selection, 0, L.k, memo);
    std::vector<Measure> hot(t);
    for (size_t b = 0; b < t; ++b) {
        hot[b] = one_hot(L.placement[b], static_cast<unsigned>(L.block_size[b]));
    }
    Measure total;
    for (const auto &[chosen, w] : sel) {
        Measure acc{{0, Rational(1)}};
        for (size_t b = 0; b < t; ++b) {
            unsigned h = static_cast<unsigned>(L.block_size[b]);
            if (bit_of(chosen, static_cast<unsigned>(t), static_cast<unsigned>(b))) {
                acc = concat(acc, hot[b], h);
            } else {
                Measure shifted;
                for (const auto &[x, p] : acc) {
                    shifted[x << h] = p;
                }
                acc = std::move(shifted);
            }
        }
        add_scaled(total, acc, w);
    }
    return ExactDistribution::bits(n, total);
}

inline ExactDistribution mod_law(const SamplerPlan &pl) {
    const auto &L = pl.mod;
    unsigned q = L.q;
    size_t nb = L.block_size.size();
    std::map<unsigned, std::map<std::pair<int, unsigned>, Measure>> memos;
    std::map<std::pair<unsigned, unsigned>, Measure> block_cache;
    auto block_law = [&](unsigned h, unsigned y) -> const Measure & {
        auto key = std::make_pair(h, y);
        auto it = block_cache.find(key);
        if (it != block_cache.end()) {
            return it->second;
        }
        const auto &wd = L.block_weight.at(key);
        const auto &tree = L.placement.at(h);
        Measure m;
        for (size_t i = 0; i < wd.outcomes.size(); ++i) {
            if (wd.counts[i]) {
                add_scaled(m, split_tree_law(tree, 0, static_cast<unsigned>(wd.outcomes[i]), memos[h]), wd.mass_at(i));
            }
        }
        return block_cache.emplace(key, std::move(m)).first->second;
    };
    auto label = L.label.masses();
    Measure total;
    for (const auto &[r, pr] : L.residue.masses()) {
        for (const auto &[x0, p0] : label) {
            // Prefix law over blocks 0..i-1 keyed by the current label x_i.
            std::map<unsigned, Measure> F;
            F[static_cast<unsigned>(x0)] = Measure{{0, Rational(1)}};
            for (size_t i = 0; i + 1 < nb; ++i) {
                unsigned h = static_cast<unsigned>(L.block_size[i]);
                std::map<unsigned, Measure> G;
                for (const auto &[xi, pre] : F) {
                    for (const auto &[xn, pn] : label) {
                        unsigned y = (xi + q - static_cast<unsigned>(xn)) % q;
                        add_scaled(G[static_cast<unsigned>(xn)], concat(pre, block_law(h, y), h), pn);
                    }
                }
                F = std::move(G);
            }
            unsigned h = static_cast<unsigned>(L.block_size[nb - 1]);
            Measure fin;
            for (const auto &[xl, pre] : F) {
                unsigned y = (xl + q - static_cast<unsigned>(x0) + static_cast<unsigned>(r)) % q;
                add_scaled(fin, concat(pre, block_law(h, y), h), 1);
            }
            add_scaled(total, fin, pr * p0);
        }
    }
    return ExactDistribution::bits(pl.n, total);
}

}  // namespace detail

/// Exact output law computed from the plan's stored structures alone.
inline ExactDistribution structural_distribution(const SamplerPlan &pl) {
    if (pl.n > kMaxDistBits) {
        throw CapacityError("output width exceeds the distribution cap");
    }
    switch (pl.construction) {
    case SamplerKind::parity_mod2:
        return detail::parity_law(pl.n, pl.parity_odd);
    case SamplerKind::biased_truncated:
        return build_biased(pl.n, Rational(pl.biased_numerator) / pow2(pl.biased_bits));
    case SamplerKind::slice_recursive: {
        std::map<std::pair<int, unsigned>, Measure> memo;
        return ExactDistribution::bits(pl.n, split_tree_law(pl.tree, 0, pl.slice_ones, memo));
    }
    case SamplerKind::slice_sparse:
        return detail::sparse_law(pl);
    case SamplerKind::mod_sampler:
        return detail::mod_law(pl);
    case SamplerKind::direct_approx:
        return pl.direct.law(OutcomeKind::bits, pl.n);
    }
    throw std::logic_error("unknown construction");
}

/// Law of the sparse construction with exact block selection and exact
/// uniform placement.
inline ExactDistribution ideal_sparse_distribution(const std::vector<size_t> &block_size, unsigned k) {
    size_t n = 0;
    for (size_t h : block_size) {
        n += h;
    }
    unsigned t = static_cast<unsigned>(block_size.size());
    Rational pick = Rational(1) / Rational(binomial(t, k));
    Measure total;
    for (Outcome chosen : detail::words_of_weight(t, k)) {
        Measure acc{{0, Rational(1)}};
        for (unsigned b = 0; b < t; ++b) {
            unsigned h = static_cast<unsigned>(block_size[b]);
            Measure part;
            if (bit_of(chosen, t, b)) {
                for (unsigned p = 0; p < h; ++p) {
                    part[Outcome{1} << (h - 1 - p)] = Rational(1, h);
                }
            } else {
                part[0] = 1;
            }
            acc = detail::concat(acc, part, h);
        }
        detail::add_scaled(total, acc, pick);
    }
    return ExactDistribution::bits(static_cast<unsigned>(n), total);
}

// ---------------------------------------------------------------------------
// Plan report
// ---------------------------------------------------------------------------

inline void write_plan(std::ostream &os, const SamplerPlan &pl) {
    const auto &rq = pl.request;
    os << "PLAN v1 kind=" << kind_name(rq.kind) << " n=" << rq.n << " k=" << rq.k << " q=" << rq.q << " lambda=";
    for (size_t i = 0; i < rq.lambda.size(); ++i) {
        os << (i ? "," : "") << rq.lambda[i];
    }
    os << " eps=" << rational_str(rq.eps) << " gamma=" << rational_str(rq.gamma) << " d=" << rq.d
       << " t=" << (rq.t_override ? *rq.t_override : 0) << " tconst=" << rational_str(rq.t_const)
       << " target=" << (rq.target.empty() ? "-" : rq.target) << "\n";
    os << "construction " << kind_name(pl.construction) << "\n";
    os << "random_bits " << pl.random_bits << "\n";
    os << "declared_locality " << pl.declared_locality << "\n";
    for (const auto &b : pl.budgets) {
        os << "budget bits=" << b.bits << " granularity=2^" << b.bits << " stage=" << b.stage << "\n";
    }
    for (const auto &e : pl.errors) {
        os << "error budget=" << rational_str(e.budget) << " measured=" << rational_str(e.measured)
           << " measured_decimal=" << decimal_str(to_double(e.measured)) << " stage=" << e.stage << "\n";
    }
    os << "error_total budget=" << rational_str(pl.budget_total()) << "\n";
    for (const auto &n : pl.notes) {
        os << "note " << n << "\n";
    }
}

/// Reads the request line of a plan report.
inline SamplerRequest read_plan_request(std::istream &is) {
    std::string line;
    if (!std::getline(is, line)) {
        throw ParseError("missing PLAN header");
    }
    std::istringstream hs(line);
    std::string tag, ver, field;
    hs >> tag >> ver;
    if (tag != "PLAN" || ver != "v1") {
        throw ParseError("bad PLAN header '" + line + "'");
    }
    std::map<std::string, std::string> kv;
    while (hs >> field) {
        auto eq = field.find('=');
        if (eq == std::string::npos) {
            throw ParseError("bad PLAN field '" + field + "'");
        }
        kv[field.substr(0, eq)] = field.substr(eq + 1);
    }
    auto get = [&](const std::string &key) {
        auto it = kv.find(key);
        if (it == kv.end()) {
            throw ParseError("PLAN header lacks '" + key + "'");
        }
        return it->second;
    };
    auto count = [&](const std::string &key) {
        return static_cast<unsigned>(detail::parse_count_field(key + "=" + get(key), key));
    };
    SamplerRequest rq;
    try {
        rq.kind = parse_kind(get("kind"));
        rq.eps = parse_rational(get("eps"));
        rq.gamma = parse_rational(get("gamma"));
        rq.t_const = parse_rational(get("tconst"));
    } catch (const ArgumentError &e) {
        throw ParseError(e.what());
    }
    rq.n = count("n");
    rq.k = count("k");
    rq.q = count("q");
    rq.d = count("d");
    unsigned t = count("t");
    if (t) {
        rq.t_override = t;
    }
    std::string lam = get("lambda");
    if (!lam.empty()) {
        std::stringstream ss(lam);
        std::string item;
        while (std::getline(ss, item, ',')) {
            rq.lambda.push_back(static_cast<unsigned>(detail::parse_count_field("l=" + item, "l")));
        }
    }
    rq.target = get("target") == "-" ? "" : get("target");
    return rq;
}

}  // namespace slicekit
