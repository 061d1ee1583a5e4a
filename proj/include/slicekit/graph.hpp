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
#include <bit>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "slicekit/core.hpp"

namespace slicekit {

/// Bipartite graph with left vertices [0, n) and right vertices [0, m).
/// Left vertex i is adjacent to the sorted right list adjacency(i).
class BipartiteGraph {
  public:
    BipartiteGraph() = default;

    BipartiteGraph(size_t n_left, size_t m_right, std::vector<std::vector<size_t>> adjacency)
        : n_(n_left), m_(m_right), adj_(std::move(adjacency)) {
        if (adj_.size() != n_) {
            throw ArgumentError("adjacency list count differs from n_left");
        }
        deg_.assign(m_, 0);
        for (auto &row : adj_) {
            std::sort(row.begin(), row.end());
            if (std::adjacent_find(row.begin(), row.end()) != row.end()) {
                throw ArgumentError("duplicate edge");
            }
            for (size_t j : row) {
                if (j >= m_) {
                    throw ArgumentError("right vertex out of range");
                }
                ++deg_[j];
            }
        }
    }

    size_t n_left() const { return n_; }
    size_t m_right() const { return m_; }
    const std::vector<size_t> &inputs(size_t i) const { return adj_[i]; }
    const std::vector<std::vector<size_t>> &adjacency() const { return adj_; }
    size_t degree(size_t j) const { return deg_[j]; }

    size_t max_left_degree() const {
        size_t d = 0;
        for (const auto &row : adj_) {
            d = std::max(d, row.size());
        }
        return d;
    }

    size_t edge_count() const {
        size_t e = 0;
        for (const auto &row : adj_) {
            e += row.size();
        }
        return e;
    }

    /// Same vertex sets, with every edge into S removed.
    BipartiteGraph without_right(const std::vector<size_t> &S) const {
        std::vector<char> gone(m_, 0);
        for (size_t j : S) {
            if (j >= m_) {
                throw ArgumentError("deleted right vertex out of range");
            }
            gone[j] = 1;
        }
        std::vector<std::vector<size_t>> rows(n_);
        for (size_t i = 0; i < n_; ++i) {
            for (size_t j : adj_[i]) {
                if (!gone[j]) {
                    rows[i].push_back(j);
                }
            }
        }
        return BipartiteGraph(n_, m_, std::move(rows));
    }

    bool connected(size_t a, size_t b) const {
        const auto &x = adj_[a];
        const auto &y = adj_[b];
        size_t i = 0, j = 0;
        while (i < x.size() && j < y.size()) {
            if (x[i] == y[j]) {
                return true;
            }
            x[i] < y[j] ? ++i : ++j;
        }
        return false;
    }

    /// Left vertices sharing a right neighbor with i; always contains i.
    std::vector<size_t> neighborhood(size_t i) const {
        std::vector<size_t> out;
        for (size_t k = 0; k < n_; ++k) {
            if (k == i || connected(i, k)) {
                out.push_back(k);
            }
        }
        return out;
    }

    /// Right vertices read by some member of N(i).
    std::vector<size_t> neighborhood_inputs(size_t i) const {
        std::set<size_t> s;
        for (size_t k : neighborhood(i)) {
            s.insert(adj_[k].begin(), adj_[k].end());
        }
        return {s.begin(), s.end()};
    }

    bool neighborhoods_connected(size_t a, size_t b) const {
        auto x = neighborhood_inputs(a);
        auto y = neighborhood_inputs(b);
        size_t i = 0, j = 0;
        while (i < x.size() && j < y.size()) {
            if (x[i] == y[j]) {
                return true;
            }
            x[i] < y[j] ? ++i : ++j;
        }
        return false;
    }

    bool operator==(const BipartiteGraph &o) const { return n_ == o.n_ && m_ == o.m_ && adj_ == o.adj_; }

  private:
    size_t n_ = 0;
    size_t m_ = 0;
    std::vector<std::vector<size_t>> adj_;
    std::vector<size_t> deg_;
};

enum class Flavor { vertices, neighborhoods };

inline const char *flavor_name(Flavor f) {
    return f == Flavor::vertices ? "vertices" : "neighborhoods";
}

/// True when the listed left objects are pairwise non-connected.
inline bool non_connected(const BipartiteGraph &g, const std::vector<size_t> &objects, Flavor flavor) {
    for (size_t a = 0; a < objects.size(); ++a) {
        for (size_t b = a + 1; b < objects.size(); ++b) {
            if (objects[a] == objects[b]) {
                return false;
            }
            bool c = flavor == Flavor::vertices ? g.connected(objects[a], objects[b])
                                                : g.neighborhoods_connected(objects[a], objects[b]);
            if (c) {
                return false;
            }
        }
    }
    return true;
}

/// Conflict masks of the connection graph on left vertices (n <= 64).
inline std::vector<std::uint64_t> conflict_masks(const BipartiteGraph &g, Flavor flavor) {
    size_t n = g.n_left();
    if (n > 64) {
        throw CapacityError("conflict masks support at most 64 left vertices");
    }
    std::vector<std::vector<size_t>> closure(n);
    for (size_t i = 0; i < n; ++i) {
        closure[i] = flavor == Flavor::vertices ? g.inputs(i) : g.neighborhood_inputs(i);
    }
    std::vector<std::uint64_t> masks(n, 0);
    for (size_t a = 0; a < n; ++a) {
        for (size_t b = a + 1; b < n; ++b) {
            const auto &x = closure[a];
            const auto &y = closure[b];
            size_t i = 0, j = 0;
            bool hit = false;
            while (i < x.size() && j < y.size() && !hit) {
                if (x[i] == y[j]) {
                    hit = true;
                } else {
                    x[i] < y[j] ? ++i : ++j;
                }
            }
            if (hit) {
                masks[a] |= std::uint64_t{1} << b;
                masks[b] |= std::uint64_t{1} << a;
            }
        }
    }
    return masks;
}

namespace detail {

inline void mis_search(const std::vector<std::uint64_t> &adj, std::uint64_t cand, std::uint64_t chosen,
                       std::uint64_t &best) {
    if (cand == 0) {
        if (std::popcount(chosen) > std::popcount(best) ||
            (std::popcount(chosen) == std::popcount(best) && chosen < best)) {
            best = chosen;
        }
        return;
    }
    if (std::popcount(chosen) + std::popcount(cand) < std::popcount(best)) {
        return;
    }
    // Vertices with no conflicts among candidates are always taken.
    std::uint64_t free_mask = 0;
    for (std::uint64_t c = cand; c; c &= c - 1) {
        int v = std::countr_zero(c);
        if ((adj[v] & cand) == 0) {
            free_mask |= std::uint64_t{1} << v;
        }
    }
    if (free_mask) {
        mis_search(adj, cand & ~free_mask, chosen | free_mask, best);
        return;
    }
    int v = std::countr_zero(cand);
    std::uint64_t bit = std::uint64_t{1} << v;
    mis_search(adj, cand & ~bit & ~adj[v], chosen | bit, best);
    mis_search(adj, cand & ~bit, chosen, best);
}

}  // namespace detail

/// Maximum independent set of a graph given by neighbor masks (n <= 64).
inline std::uint64_t max_independent_set(const std::vector<std::uint64_t> &adj) {
    size_t n = adj.size();
    std::uint64_t all = n == 64 ? ~std::uint64_t{0} : ((std::uint64_t{1} << n) - 1);
    std::uint64_t best = 0;
    detail::mis_search(adj, all, 0, best);
    return best;
}

inline std::vector<size_t> mask_to_indices(std::uint64_t mask) {
    std::vector<size_t> out;
    for (; mask; mask &= mask - 1) {
        out.push_back(static_cast<size_t>(std::countr_zero(mask)));
    }
    return out;
}

/// BIGRAPH v1 text format; vertex indices are 1-based in the file.
inline void write_graph(std::ostream &os, const BipartiteGraph &g) {
    os << "BIGRAPH v1 n=" << g.n_left() << " m=" << g.m_right() << "\n";
    for (size_t i = 0; i < g.n_left(); ++i) {
        os << "left " << (i + 1) << ":";
        const auto &row = g.inputs(i);
        for (size_t k = 0; k < row.size(); ++k) {
            os << (k ? "," : " ") << (row[k] + 1);
        }
        os << "\n";
    }
}

namespace detail {

inline size_t parse_count_field(const std::string &field, const std::string &key) {
    if (field.rfind(key + "=", 0) != 0) {
        throw ParseError("expected '" + key + "=' field, got '" + field + "'");
    }
    std::string v = field.substr(key.size() + 1);
    if (v.empty() || v.find_first_not_of("0123456789") != std::string::npos) {
        throw ParseError("bad count '" + field + "'");
    }
    return std::stoul(v);
}

inline std::vector<size_t> parse_index_list(const std::string &text, size_t limit) {
    std::vector<size_t> out;
    std::string s;
    for (char c : text) {
        if (!std::isspace(static_cast<unsigned char>(c))) {
            s.push_back(c);
        }
    }
    if (s.empty()) {
        return out;
    }
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty() || item.find_first_not_of("0123456789") != std::string::npos) {
            throw ParseError("bad index '" + item + "'");
        }
        size_t v = std::stoul(item);
        if (v < 1 || v > limit) {
            throw ParseError("index " + item + " out of range");
        }
        out.push_back(v - 1);
    }
    return out;
}

}  // namespace detail

inline BipartiteGraph read_graph(std::istream &is) {
    std::string line;
    if (!std::getline(is, line)) {
        throw ParseError("missing BIGRAPH header");
    }
    std::istringstream hs(line);
    std::string tag, ver, nf, mf;
    hs >> tag >> ver >> nf >> mf;
    if (tag != "BIGRAPH" || ver != "v1") {
        throw ParseError("bad BIGRAPH header '" + line + "'");
    }
    size_t n = detail::parse_count_field(nf, "n");
    size_t m = detail::parse_count_field(mf, "m");
    std::vector<std::vector<size_t>> adj(n);
    std::vector<char> seen(n, 0);
    while (std::getline(is, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        auto colon = line.find(':');
        if (line.rfind("left ", 0) != 0 || colon == std::string::npos) {
            throw ParseError("bad BIGRAPH record '" + line + "'");
        }
        auto idx = detail::parse_index_list(line.substr(5, colon - 5), n);
        if (idx.size() != 1 || seen[idx[0]]) {
            throw ParseError("bad or repeated left index in '" + line + "'");
        }
        seen[idx[0]] = 1;
        adj[idx[0]] = detail::parse_index_list(line.substr(colon + 1), m);
    }
    for (size_t i = 0; i < n; ++i) {
        if (!seen[i]) {
            throw ParseError("left vertex " + std::to_string(i + 1) + " missing");
        }
    }
    try {
        return BipartiteGraph(n, m, std::move(adj));
    } catch (const ArgumentError &e) {
        throw ParseError(e.what());
    }
}

}  // namespace slicekit
