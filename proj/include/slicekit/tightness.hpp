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

#include <algorithm>
#include <cstdint>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "slicekit/core.hpp"
#include "slicekit/elimination.hpp"
#include "slicekit/graph.hpp"
#include "slicekit/parallel.hpp"

namespace slicekit {

/// Largest left side the generators will build.
inline constexpr size_t kMaxTightLeft = size_t{1} << 20;

enum class TightKind { vtx, neigh };

struct TightGraphSpec {
    TightKind kind = TightKind::vtx;
    unsigned beta = 2;
    unsigned d = 1;
    size_t n = 0;
    size_t m = 0;
};

inline TightGraphSpec tight_vtx_spec(unsigned beta, unsigned d) {
    if (beta < 2 || d < 1) {
        throw ArgumentError("vertex construction needs beta >= 2 and d >= 1");
    }
    TightGraphSpec s{TightKind::vtx, beta, d, 1, 0};
    size_t level = 1;
    for (unsigned i = 0; i < d; ++i) {
        s.m += level;
        if (level > kMaxTightLeft / (beta - 1)) {
            throw CapacityError("(beta-1)^d leaves exceed capacity");
        }
        level *= beta - 1;
    }
    s.n = level;
    return s;
}

/// Leaves of a complete (beta-1)-ary tree of depth d on the left, internal
/// nodes on the right (breadth-first ids), each leaf joined to every ancestor.
inline BipartiteGraph gen_tight_vtx(unsigned beta, unsigned d) {
    auto spec = tight_vtx_spec(beta, d);
    const size_t arity = beta - 1;
    std::vector<std::vector<size_t>> adj(spec.n);
    size_t level_start = 0, level_size = 1;
    for (unsigned depth = 0; depth < d; ++depth) {
        size_t span = spec.n / level_size;
        for (size_t p = 0; p < level_size; ++p) {
            for (size_t leaf = p * span; leaf < (p + 1) * span; ++leaf) {
                adj[leaf].push_back(level_start + p);
            }
        }
        level_start += level_size;
        level_size *= arity;
    }
    return BipartiteGraph(spec.n, spec.m, std::move(adj));
}

namespace detail {

inline size_t small_tower(unsigned h) {
    size_t v = 1;
    for (unsigned i = 0; i < h; ++i) {
        if (v >= 64) {
            throw CapacityError("tower exceeds capacity");
        }
        v = size_t{1} << v;
    }
    return v;
}

inline unsigned exact_log2(size_t v) {
    unsigned e = 0;
    while ((size_t{1} << e) < v) {
        ++e;
    }
    return e;
}

}  // namespace detail

inline TightGraphSpec tight_neigh_spec(unsigned d) {
    if (d < 2 || d % 2 != 0) {
        throw ArgumentError("neighborhood construction needs even d >= 2");
    }
    if (d >= 10) {
        throw CapacityError("neighborhood construction supports d <= 8");
    }
    TightGraphSpec s{TightKind::neigh, 0, d, detail::small_tower(d / 2), 0};
    return s;
}

/// Tree of depth k = d/2 whose depth-i nodes have tow(k-i)/tow(k-i-1)
/// children; every internal node v also gets a binary tree B_v over its
/// children whose depth-l node is joined to leaf l of each child subtree below it.
inline BipartiteGraph gen_tight_neigh(unsigned d) {
    auto spec = tight_neigh_spec(d);
    const unsigned k = d / 2;
    std::vector<size_t> b(k + 1);
    for (unsigned i = 0; i <= k; ++i) {
        b[i] = detail::small_tower(k - i);
    }
    std::vector<std::vector<size_t>> adj(spec.n);
    size_t next_id = 0;
    // Pass 1: tree nodes breadth-first, so the root is right vertex 0.
    for (unsigned i = 0; i < k; ++i) {
        for (size_t lo = 0; lo < spec.n; lo += b[i]) {
            size_t id = next_id++;
            for (size_t leaf = lo; leaf < lo + b[i]; ++leaf) {
                adj[leaf].push_back(id);
            }
        }
    }
    // Pass 2: the binary trees B_v.
    for (unsigned i = 0; i < k; ++i) {
        size_t a = b[i] / b[i + 1];
        unsigned depth = detail::exact_log2(a);
        for (size_t lo = 0; lo < spec.n; lo += b[i]) {
            for (unsigned l = 0; l < depth; ++l) {
                size_t nodes = size_t{1} << l;
                size_t span = a / nodes;
                for (size_t p = 0; p < nodes; ++p) {
                    size_t id = next_id++;
                    for (size_t j = p * span; j < (p + 1) * span; ++j) {
                        adj[lo + j * b[i + 1] + l].push_back(id);
                    }
                }
            }
        }
    }
    for (auto &row : adj) {
        std::sort(row.begin(), row.end());
    }
    return BipartiteGraph(spec.n, next_id, std::move(adj));
}

/// Right vertex adjacent to every left vertex, or m_right() if none.
inline size_t all_adjacent_right_vertex(const BipartiteGraph &g) {
    for (size_t v = 0; v < g.m_right(); ++v) {
        if (g.degree(v) == g.n_left()) {
            return v;
        }
    }
    return g.m_right();
}

struct TightRow {
    std::vector<size_t> deleted;
    size_t max_nonconnected = 0;
    size_t bound = 0;
    bool ok = true;
};

struct TightReport {
    Flavor flavor = Flavor::vertices;
    bool exhaustive = true;
    std::vector<TightRow> rows;
    size_t violations = 0;

    bool ok() const { return violations == 0; }
};

struct TightMode {
    bool exhaustive = true;
    size_t trials = 0;
    std::uint64_t seed = 0;

    static TightMode all() { return {}; }
    static TightMode sampled(size_t trials, std::uint64_t seed) { return {false, trials, seed}; }
};

namespace detail {

inline TightReport verify_tight(const BipartiteGraph &g, Flavor flavor, size_t slope, const TightMode &mode,
                                unsigned jobs) {
    if (g.n_left() > 64) {
        throw CapacityError("tightness verification needs n_left <= 64");
    }
    TightReport rep;
    rep.flavor = flavor;
    rep.exhaustive = mode.exhaustive;
    const size_t m = g.m_right();
    std::vector<std::vector<size_t>> subsets;
    if (mode.exhaustive) {
        if (m > 20) {
            throw CapacityError("exhaustive tightness verification needs m_right <= 20");
        }
        for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << m); ++mask) {
            subsets.push_back(mask_to_indices(mask));
        }
    } else {
        std::mt19937_64 rng(mode.seed);
        std::bernoulli_distribution coin(0.5);
        for (size_t t = 0; t < mode.trials; ++t) {
            std::vector<size_t> s;
            for (size_t v = 0; v < m; ++v) {
                if (coin(rng)) {
                    s.push_back(v);
                }
            }
            subsets.push_back(std::move(s));
        }
    }
    rep.rows.resize(subsets.size());
    parallel_for(subsets.size(), jobs, [&](std::uint64_t i) {
        TightRow &row = rep.rows[i];
        row.deleted = subsets[i];
        row.max_nonconnected = max_nonconnected(g.without_right(row.deleted), flavor).size();
        row.bound = std::max<size_t>(1, slope * row.deleted.size());
        row.ok = row.max_nonconnected <= row.bound;
    });
    for (const auto &row : rep.rows) {
        rep.violations += row.ok ? 0 : 1;
    }
    return rep;
}

}  // namespace detail

/// Checks that deleting any S leaves at most max{1, (beta-1)|S|} pairwise
/// non-connected left vertices.
inline TightReport verify_tight_vtx(const BipartiteGraph &g, unsigned beta, const TightMode &mode = TightMode::all(),
                                    unsigned jobs = 1) {
    if (beta < 2) {
        throw ArgumentError("beta must be >= 2");
    }
    return detail::verify_tight(g, Flavor::vertices, beta - 1, mode, jobs);
}

/// Checks that deleting any S leaves at most max{1, |S|} pairwise
/// non-connected left neighborhoods.
inline TightReport verify_tight_neigh(const BipartiteGraph &g, const TightMode &mode = TightMode::all(),
                                      unsigned jobs = 1) {
    return detail::verify_tight(g, Flavor::neighborhoods, 1, mode, jobs);
}

/// Whether some deletion set S meets beta|S| <= r and lambda r >= n, where
/// r is the best non-connected left vertex count after deleting S.
inline bool vertex_property_attainable(const BipartiteGraph &g, const Rational &beta, const Rational &lambda) {
    if (g.m_right() > 20) {
        throw CapacityError("exhaustive property search needs m_right <= 20");
    }
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << g.m_right()); ++mask) {
        auto s = mask_to_indices(mask);
        size_t r = max_nonconnected(g.without_right(s), Flavor::vertices).size();
        if (beta * s.size() <= r && lambda * r >= g.n_left()) {
            return true;
        }
    }
    return false;
}

/// CSV rows `|S|,max_nonconnected,bound,ok`.
inline void write_tight_csv(std::ostream &os, const TightReport &rep) {
    os << "|S|,max_nonconnected,bound,ok\n";
    for (const auto &row : rep.rows) {
        os << row.deleted.size() << "," << row.max_nonconnected << "," << row.bound << ","
           << (row.ok ? "true" : "false") << "\n";
    }
}

}  // namespace slicekit
