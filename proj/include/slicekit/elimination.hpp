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
#include <limits>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "slicekit/core.hpp"
#include "slicekit/graph.hpp"
#include "slicekit/parallel.hpp"

namespace slicekit {

/// Relative slack for real-valued schedule comparisons.
inline constexpr double kRelTol = 1e-9;

inline bool real_leq(double a, double b) {
    if (std::isinf(b) && b > 0) {
        return true;
    }
    if (std::isinf(a) && a > 0) {
        return false;
    }
    return a <= b + kRelTol * std::max({1.0, std::fabs(a), std::fabs(b)});
}

struct EliminationResult {
    Flavor flavor = Flavor::vertices;
    std::vector<size_t> deleted;
    std::vector<size_t> selected;
    size_t r = 0;
    size_t t = 0;  // neighborhood flavor only
    std::string params;
    size_t batches = 0;
    bool trivial_branch = false;
    /// True when a degree-threshold deletion beat the schedule's own result.
    bool refined = false;
};

/// Scans left vertices in order and keeps those compatible with every kept one.
/// `candidates` restricts the scan; `size_cap` bounds |N(i)| (neighborhood flavor).
inline std::vector<size_t> greedy_nonconnected(const BipartiteGraph &g, Flavor flavor,
                                               std::optional<double> size_cap = {},
                                               const std::optional<std::vector<size_t>> &candidates = {}) {
    std::vector<size_t> order;
    if (candidates) {
        order = *candidates;
        std::sort(order.begin(), order.end());
    } else {
        for (size_t i = 0; i < g.n_left(); ++i) {
            order.push_back(i);
        }
    }
    std::vector<char> used(g.m_right(), 0);
    std::vector<size_t> kept;
    for (size_t i : order) {
        std::vector<size_t> reads;
        if (flavor == Flavor::vertices) {
            reads = g.inputs(i);
        } else {
            if (size_cap && !real_leq(static_cast<double>(g.neighborhood(i).size()), *size_cap)) {
                continue;
            }
            reads = g.neighborhood_inputs(i);
        }
        bool clash = false;
        for (size_t j : reads) {
            if (used[j]) {
                clash = true;
                break;
            }
        }
        if (clash) {
            continue;
        }
        for (size_t j : reads) {
            used[j] = 1;
        }
        kept.push_back(i);
    }
    return kept;
}

namespace detail {

/// The dichotomy step shared by both flavors: right vertices outside U of
/// degree at least s, if they carry at least half the left vertices' worth of edges.
inline std::optional<std::vector<size_t>> heavy_batch(const BipartiteGraph &g, const std::vector<size_t> &U, double s) {
    std::set<size_t> in_u(U.begin(), U.end());
    double n = static_cast<double>(g.n_left());
    std::vector<size_t> A;
    double total = 0;
    for (size_t j = 0; j < g.m_right(); ++j) {
        if (!in_u.count(j) && real_leq(s, static_cast<double>(g.degree(j)))) {
            A.push_back(j);
            total += static_cast<double>(g.degree(j));
        }
    }
    if (!real_leq(n / 2.0, total)) {
        return std::nullopt;
    }
    double cap = std::floor(n / s + kRelTol * std::max(1.0, n / s));
    if (static_cast<double>(A.size()) > cap) {
        A.resize(static_cast<size_t>(cap));
    }
    return A;
}

/// Left vertices whose remaining inputs all have degree below s in g.
inline std::vector<size_t> small_left_vertices(const BipartiteGraph &g, double s) {
    std::vector<size_t> out;
    for (size_t i = 0; i < g.n_left(); ++i) {
        bool small = true;
        for (size_t j : g.inputs(i)) {
            if (real_leq(s, static_cast<double>(g.degree(j)))) {
                small = false;
                break;
            }
        }
        if (small) {
            out.push_back(i);
        }
    }
    return out;
}

inline size_t effective_degree_bound(const BipartiteGraph &g) {
    return std::max<size_t>(1, g.max_left_degree());
}

inline size_t max_selected_neighborhood(const BipartiteGraph &g, const std::vector<size_t> &selected) {
    size_t t = 0;
    for (size_t i : selected) {
        t = std::max(t, g.neighborhood(i).size());
    }
    return t;
}

/// Degree thresholds used as alternative deletion sets: every distinct degree >= 2.
inline std::vector<std::vector<size_t>> threshold_deletions(const BipartiteGraph &g) {
    std::set<size_t> degs;
    for (size_t j = 0; j < g.m_right(); ++j) {
        if (g.degree(j) >= 2) {
            degs.insert(g.degree(j));
        }
    }
    std::vector<std::vector<size_t>> out{{}};
    for (auto it = degs.rbegin(); it != degs.rend(); ++it) {
        std::vector<size_t> S;
        for (size_t j = 0; j < g.m_right(); ++j) {
            if (g.degree(j) >= *it) {
                S.push_back(j);
            }
        }
        out.push_back(std::move(S));
    }
    return out;
}

}  // namespace detail

inline bool satisfies_vertex_property(const BipartiteGraph &g, const EliminationResult &res, double beta, double lambda) {
    if (res.selected.size() != res.r) {
        return false;
    }
    if (!non_connected(g.without_right(res.deleted), res.selected, Flavor::vertices)) {
        return false;
    }
    double n = static_cast<double>(g.n_left());
    return real_leq(static_cast<double>(res.deleted.size()), static_cast<double>(res.r) / beta) &&
           real_leq(n / lambda, static_cast<double>(res.r));
}

inline std::optional<std::vector<size_t>> find_heavy_batch_vtx(const BipartiteGraph &g, const std::vector<size_t> &U,
                                                               double alpha, double beta, double lambda, double d) {
    double n = static_cast<double>(g.n_left());
    double s = std::min({n, lambda / (2 * d), alpha / (2 * d * beta)});
    if (!real_leq(1.0, s)) {
        throw PreconditionError("heavy batch needs s >= 1 (s = " + std::to_string(s) + ")");
    }
    if (!real_leq(static_cast<double>(U.size()), n / alpha)) {
        throw PreconditionError("heavy batch needs |U| <= n/alpha");
    }
    return detail::heavy_batch(g, U, s);
}

/// Deletes few right vertices so that many left vertices become pairwise
/// non-connected: |S| <= r/beta and r >= n/lambda.
inline EliminationResult eliminate_vertices(const BipartiteGraph &g, double beta, double lambda) {
    const double d = static_cast<double>(detail::effective_degree_bound(g));
    const double n = static_cast<double>(g.n_left());
    if (!(beta >= 1) || !(lambda >= 1)) {
        throw ArgumentError("vertex elimination needs beta, lambda >= 1");
    }
    const double base = 2 * d * beta + 1;
    const double need = 2 * d * std::pow(base, 2 * d);
    if (!real_leq(need, lambda)) {
        throw ArgumentError("vertex elimination needs lambda >= 2d(2d*beta+1)^{2d} = " + std::to_string(need));
    }
    std::ostringstream ps;
    ps.precision(12);
    ps << "beta=" << beta << " lambda=" << lambda << " d=" << d;

    EliminationResult res;
    res.flavor = Flavor::vertices;
    res.params = ps.str();
    if (g.n_left() == 0) {
        return res;
    }
    if (real_leq(n, lambda)) {
        res.selected = {0};
        res.r = 1;
        res.trivial_branch = true;
    } else {
        std::vector<size_t> U;
        std::optional<double> stop_s;
        for (int i = 0; i <= 2 * static_cast<int>(d); ++i) {
            double alpha = std::pow(base, 2 * d - i) * 2 * d * beta;
            double s = std::min({n, lambda / (2 * d), alpha / (2 * d * beta)});
            auto V = find_heavy_batch_vtx(g, U, alpha, beta, lambda, d);
            if (!V) {
                stop_s = s;
                break;
            }
            U.insert(U.end(), V->begin(), V->end());
            ++res.batches;
        }
        if (!stop_s) {
            throw std::logic_error("heavy batches did not stop within 2d+1 rounds");
        }
        std::sort(U.begin(), U.end());
        auto rest = g.without_right(U);
        auto small = detail::small_left_vertices(rest, *stop_s);
        res.deleted = U;
        res.selected = greedy_nonconnected(rest, Flavor::vertices, std::nullopt, small);
        res.r = res.selected.size();
        if (!satisfies_vertex_property(g, res, beta, lambda)) {
            throw std::logic_error("vertex elimination result violates its guarantee");
        }
    }
    for (auto &S : detail::threshold_deletions(g)) {
        EliminationResult alt = res;
        alt.deleted = S;
        alt.selected = greedy_nonconnected(g.without_right(S), Flavor::vertices);
        alt.r = alt.selected.size();
        alt.refined = true;
        bool better = alt.r > res.r || (alt.r == res.r && alt.deleted.size() < res.deleted.size());
        if (better && satisfies_vertex_property(g, alt, beta, lambda)) {
            res = alt;
        }
    }
    return res;
}

/// A growth function evaluated in log space: ln f(x) from ln x.
using LogMap = std::function<double(double)>;

/// Parameters of the neighborhood elimination; huge quantities are logarithms.
struct NeighborhoodParams {
    double ln_lambda = 0;
    double ln_kappa = 0;
    /// F(x), possibly +inf.
    std::function<double(double)> F;
    /// ln H(x) as a function of ln x.
    LogMap ln_H;
    double L = 1;
    std::string description;
    /// Extra points x >= L at which H >= max(2x, F~(x)) is checked.
    std::vector<double> sample_grid;
};

inline bool satisfies_neighborhood_property(const BipartiteGraph &g, const EliminationResult &res,
                                            const NeighborhoodParams &p) {
    if (res.selected.size() != res.r) {
        return false;
    }
    auto rest = g.without_right(res.deleted);
    if (!non_connected(rest, res.selected, Flavor::neighborhoods)) {
        return false;
    }
    if (detail::max_selected_neighborhood(rest, res.selected) > res.t) {
        return false;
    }
    double n = static_cast<double>(g.n_left());
    double ft = p.F(static_cast<double>(res.t));
    bool size_ok = res.deleted.empty() || real_leq(static_cast<double>(res.deleted.size()) * ft, static_cast<double>(res.r));
    bool r_ok = real_leq(std::log(n) - p.ln_lambda, std::log(static_cast<double>(res.r)));
    bool t_ok = real_leq(std::log(static_cast<double>(std::max<size_t>(res.t, 1))), p.ln_kappa);
    return size_ok && r_ok && t_ok;
}

inline std::optional<std::vector<size_t>> find_heavy_batch_neigh(const BipartiteGraph &g, const std::vector<size_t> &U,
                                                                 double ln_alpha, double s, double ln_lambda,
                                                                 double ln_kappa,
                                                                 const std::function<double(double)> &F) {
    const double d = static_cast<double>(detail::effective_degree_bound(g));
    const double n = static_cast<double>(g.n_left());
    const double fds = F(d * s);
    if (!real_leq(1.0, s) || !real_leq(s, n) || !real_leq(std::log(s), ln_kappa - std::log(d))) {
        throw PreconditionError("heavy batch needs 1 <= s <= min{n, kappa/d}");
    }
    if (!real_leq(0.0, ln_alpha) || !real_leq(ln_alpha, std::log(2.0) + ln_lambda + std::log(fds))) {
        throw PreconditionError("heavy batch needs 1 <= alpha <= 2*lambda*F(d*s)");
    }
    if (!real_leq(8 * std::pow(d, 4) * s * s * fds, ln_alpha + std::log(d))) {
        throw PreconditionError("heavy batch needs ln(alpha*d) >= 8 d^4 s^2 F(d*s)");
    }
    if (!U.empty() && !real_leq(std::log(static_cast<double>(U.size())), std::log(n) - ln_alpha)) {
        throw PreconditionError("heavy batch needs |U| <= n/alpha");
    }
    return detail::heavy_batch(g, U, s);
}

namespace detail {

/// One pass of the neighborhood schedule (ln alpha_i, s_i); no hypothesis checks.
inline EliminationResult neighborhood_schedule(const BipartiteGraph &g, const std::vector<double> &ln_alphas,
                                               const std::vector<double> &ss, double ln_lambda, double ln_kappa,
                                               const std::function<double(double)> &F) {
    const double d = static_cast<double>(effective_degree_bound(g));
    EliminationResult res;
    res.flavor = Flavor::neighborhoods;
    std::vector<size_t> U;
    std::optional<double> stop_s;
    for (size_t i = 0; i < ss.size(); ++i) {
        auto V = find_heavy_batch_neigh(g, U, ln_alphas[i], ss[i], ln_lambda, ln_kappa, F);
        if (!V) {
            stop_s = ss[i];
            break;
        }
        U.insert(U.end(), V->begin(), V->end());
        ++res.batches;
    }
    if (!stop_s) {
        throw std::logic_error("heavy batches did not stop within the schedule");
    }
    std::sort(U.begin(), U.end());
    auto rest = g.without_right(U);
    res.deleted = U;
    res.selected = greedy_nonconnected(rest, Flavor::neighborhoods, d * *stop_s, small_left_vertices(rest, *stop_s));
    res.r = res.selected.size();
    res.t = max_selected_neighborhood(rest, res.selected);
    return res;
}

}  // namespace detail

/// ln of the k-th iterate H^{(k)}(L).
inline double ln_H_iterate(const NeighborhoodParams &p, unsigned k) {
    double v = std::log(p.L);
    for (unsigned i = 0; i < k; ++i) {
        v = p.ln_H(v);
    }
    return v;
}

/// Deletes few right vertices so that many small left neighborhoods become
/// pairwise non-connected: |S| <= r/F(t), r >= n/lambda, t <= kappa.
inline EliminationResult eliminate_neighborhoods(const BipartiteGraph &g, const NeighborhoodParams &p) {
    const double d = static_cast<double>(detail::effective_degree_bound(g));
    const double n = static_cast<double>(g.n_left());
    const unsigned D = static_cast<unsigned>(d);
    if (!p.F || !p.ln_H || !(p.L >= 1)) {
        throw ArgumentError("neighborhood elimination needs F, H and L >= 1");
    }
    // F >= 1 and non-decreasing on a grid.
    double prev = 0;
    for (double x = 1; x <= 64; x += 1) {
        double fx = p.F(x);
        if (!(fx >= 1) || fx < prev) {
            throw ArgumentError("hypothesis F(x) >= 1 and increasing fails at x=" + std::to_string(x));
        }
        prev = fx;
    }
    auto ln_F_tilde = [&](double ln_x) {
        double x = std::exp(ln_x);
        return -std::log(d) + 32 * std::pow(d, 4) * x * x * p.F(2 * d * x);
    };
    auto check_h_at = [&](double ln_x) {
        double lh = p.ln_H(ln_x);
        if (!real_leq(std::log(2.0) + ln_x, lh)) {
            throw ArgumentError("hypothesis H(x) >= 2x fails at ln x=" + std::to_string(ln_x));
        }
        if (!real_leq(ln_F_tilde(ln_x), lh)) {
            throw ArgumentError("hypothesis H(x) >= F~(x) fails at ln x=" + std::to_string(ln_x));
        }
    };
    for (unsigned k = 0; k <= 2 * D + 1; ++k) {
        check_h_at(ln_H_iterate(p, k));
    }
    for (double x : p.sample_grid) {
        if (x >= p.L) {
            check_h_at(std::log(x));
        }
    }
    double ln_top = std::log(d) + ln_H_iterate(p, 2 * D + 2);
    if (!real_leq(p.ln_lambda, p.ln_kappa)) {
        throw ArgumentError("hypothesis kappa >= lambda fails");
    }
    if (!real_leq(ln_top, p.ln_lambda)) {
        throw ArgumentError("hypothesis lambda >= d*H^{(2d+2)}(L) fails");
    }

    EliminationResult res;
    res.flavor = Flavor::neighborhoods;
    res.params = p.description;
    if (g.n_left() == 0) {
        return res;
    }
    if (real_leq(std::log(n), p.ln_lambda)) {
        res.selected = {0};
        res.r = 1;
        res.t = g.n_left();
        res.trivial_branch = true;
    } else {
        std::vector<double> ln_alphas, ss;
        for (unsigned i = 0; i <= 2 * D; ++i) {
            ln_alphas.push_back(ln_H_iterate(p, 2 * D + 2 - i));
            ss.push_back(2 * std::exp(ln_H_iterate(p, 2 * D + 1 - i)));
        }
        auto run = detail::neighborhood_schedule(g, ln_alphas, ss, p.ln_lambda, p.ln_kappa, p.F);
        run.params = p.description;
        if (!satisfies_neighborhood_property(g, run, p)) {
            throw std::logic_error("neighborhood elimination result violates its guarantee");
        }
        res = run;
    }
    for (auto &S : detail::threshold_deletions(g)) {
        EliminationResult alt = res;
        auto rest = g.without_right(S);
        alt.deleted = S;
        alt.selected = greedy_nonconnected(rest, Flavor::neighborhoods);
        alt.r = alt.selected.size();
        alt.t = detail::max_selected_neighborhood(rest, alt.selected);
        alt.trivial_branch = false;
        alt.refined = true;
        bool better = alt.r > res.r || (alt.r == res.r && alt.deleted.size() < res.deleted.size());
        if (better && satisfies_neighborhood_property(g, alt, p)) {
            res = alt;
        }
    }
    return res;
}

struct BruteForceResult {
    std::vector<size_t> deleted;
    std::vector<size_t> selected;
    size_t r = 0;
};

/// Largest pairwise non-connected selection in g (exact search).
inline std::vector<size_t> max_nonconnected(const BipartiteGraph &g, Flavor flavor) {
    return mask_to_indices(max_independent_set(conflict_masks(g, flavor)));
}

/// Best selection over all deletion sets of size <= budget.
inline BruteForceResult brute_force_best_elimination(const BipartiteGraph &g, size_t budget, Flavor flavor,
                                                     unsigned jobs = 1) {
    if (g.m_right() > 20 || g.n_left() > 64) {
        throw CapacityError("brute force needs m_right <= 20 and n_left <= 64");
    }
    const std::uint64_t total = std::uint64_t{1} << g.m_right();
    std::vector<size_t> best_r(total, 0);
    std::vector<std::uint64_t> best_sel(total, 0);
    parallel_for(total, jobs, [&](std::uint64_t mask) {
        if (static_cast<size_t>(std::popcount(mask)) > budget) {
            return;
        }
        auto sel = max_independent_set(conflict_masks(g.without_right(mask_to_indices(mask)), flavor));
        best_r[mask] = static_cast<size_t>(std::popcount(sel));
        best_sel[mask] = sel;
    });
    BruteForceResult out;
    bool have = false;
    for (std::uint64_t mask = 0; mask < total; ++mask) {
        if (static_cast<size_t>(std::popcount(mask)) > budget) {
            continue;
        }
        if (!have || best_r[mask] > out.r) {
            have = true;
            out.r = best_r[mask];
            out.deleted = mask_to_indices(mask);
            out.selected = mask_to_indices(best_sel[mask]);
        }
    }
    return out;
}

inline std::string format_result(const EliminationResult &res) {
    std::ostringstream os;
    auto list = [&](const std::vector<size_t> &v) {
        os << "{";
        for (size_t k = 0; k < v.size(); ++k) {
            os << (k ? "," : "") << (v[k] + 1);
        }
        os << "}";
    };
    os << "flavor: " << flavor_name(res.flavor) << "\n";
    os << "params: " << res.params << "\n";
    os << "deleted: ";
    list(res.deleted);
    os << "\nselected: ";
    list(res.selected);
    os << "\nr: " << res.r << "\n";
    if (res.flavor == Flavor::neighborhoods) {
        os << "t: " << res.t << "\n";
    }
    os << "batches: " << res.batches << "\n";
    os << "branch: " << (res.trivial_branch ? "small-n" : res.refined ? "degree-threshold" : "schedule") << "\n";
    return os.str();
}

}  // namespace slicekit
