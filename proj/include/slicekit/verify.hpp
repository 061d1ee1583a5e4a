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

#include <cstdint>
#include <limits>
#include <optional>
#include <ostream>
#include <set>
#include <stdexcept>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "slicekit/bounds.hpp"
#include "slicekit/core.hpp"
#include "slicekit/distribution.hpp"
#include "slicekit/local_function.hpp"
#include "slicekit/parallel.hpp"
#include "slicekit/samplers.hpp"

namespace slicekit {

// ---------------------------------------------------------------------------
// Exhaustive search over small local circuits
// ---------------------------------------------------------------------------

inline constexpr std::uint64_t kMaxSearchCircuits = 10'000'000;

/// Every gate of fan-in <= d over m inputs: sorted input subsets by size then
/// lexicographically, each with all truth tables in increasing order.
inline std::vector<Gate> gate_universe(size_t m, unsigned d) {
    if (d > 4) {
        throw CapacityError("gate universe supports fan-in <= 4");
    }
    std::vector<Gate> out;
    for (unsigned s = 0; s <= d && s <= m; ++s) {
        std::vector<size_t> pick(s);
        for (unsigned i = 0; i < s; ++i) {
            pick[i] = i;
        }
        for (;;) {
            size_t len = size_t{1} << s;
            for (std::uint64_t t = 0; t < (std::uint64_t{1} << len); ++t) {
                std::vector<std::uint8_t> table(len);
                for (size_t idx = 0; idx < len; ++idx) {
                    table[idx] = static_cast<std::uint8_t>(t >> idx & 1u);
                }
                out.emplace_back(pick, std::move(table));
            }
            // Next s-subset in lexicographic order.
            int i = static_cast<int>(s) - 1;
            while (i >= 0 && pick[i] == m - s + i) {
                --i;
            }
            if (i < 0) {
                break;
            }
            ++pick[i];
            for (unsigned j = i + 1; j < s; ++j) {
                pick[j] = pick[j - 1] + 1;
            }
        }
    }
    return out;
}

struct SearchResult {
    LocalFunction best;
    Rational min_tvd = 0;
    std::uint64_t circuits = 0;
    std::uint64_t best_index = 0;
};

/// Exact minimum of tvd(f(input law), target) over all d-local f with n
/// outputs and m inputs. Ties go to the first circuit in enumeration order.
inline SearchResult exhaustive_min_tvd(unsigned n, size_t m, unsigned d, const ExactDistribution &target,
                                       std::optional<InputBiases> biases = {}, unsigned jobs = 1) {
    if (target.kind() != OutcomeKind::bits || target.width() != n) {
        throw ArgumentError("target must be a law over n bits");
    }
    if (m > 16 || n > 16) {
        throw CapacityError("exhaustive search supports n, m <= 16");
    }
    InputBiases b = biases ? *biases : uniform_biases(m);
    if (b.size() != m) {
        throw ArgumentError("input law has the wrong length");
    }
    auto gates = gate_universe(m, d);
    const std::uint64_t U = gates.size();
    std::uint64_t total = 1;
    for (unsigned i = 0; i < n; ++i) {
        if (total > kMaxSearchCircuits / U) {
            throw CapacityError("search space exceeds 10^7 circuits");
        }
        total *= U;
    }
    const size_t inputs = size_t{1} << m;
    std::vector<Rational> px(inputs, 1);
    for (size_t x = 0; x < inputs; ++x) {
        for (size_t j = 0; j < m; ++j) {
            px[x] *= (x >> j & 1u) ? b[j] : Rational(1 - b[j]);
        }
    }
    // out[g][x]: gate g on input x, where bit j of x is input j.
    std::vector<std::vector<std::uint8_t>> out(U, std::vector<std::uint8_t>(inputs));
    for (size_t g = 0; g < U; ++g) {
        for (size_t x = 0; x < inputs; ++x) {
            std::uint64_t local = 0;
            const auto &ins = gates[g].inputs();
            for (size_t t = 0; t < ins.size(); ++t) {
                local |= static_cast<std::uint64_t>(x >> ins[t] & 1u) << t;
            }
            out[g][x] = gates[g].eval_local(local);
        }
    }
    const size_t outcomes = size_t{1} << n;
    std::vector<Rational> tgt(outcomes, 0);
    for (const auto &[y, p] : target.entries()) {
        tgt[y] = p;
    }

    const std::uint64_t chunks = std::min<std::uint64_t>(total, 256);
    std::vector<std::pair<Rational, std::uint64_t>> best(chunks, {Rational(2), 0});
    parallel_for(chunks, jobs, [&](std::uint64_t c) {
        std::uint64_t lo = total * c / chunks, hi = total * (c + 1) / chunks;
        std::vector<Rational> law(outcomes);
        std::vector<size_t> pick(n);
        for (std::uint64_t idx = lo; idx < hi; ++idx) {
            std::uint64_t v = idx;
            for (unsigned i = n; i-- > 0;) {
                pick[i] = v % U;
                v /= U;
            }
            std::fill(law.begin(), law.end(), Rational(0));
            for (size_t x = 0; x < inputs; ++x) {
                if (px[x] == 0) {
                    continue;
                }
                Outcome y = 0;
                for (unsigned i = 0; i < n; ++i) {
                    y = (y << 1) | out[pick[i]][x];
                }
                law[y] += px[x];
            }
            Rational dist = 0;
            for (size_t y = 0; y < outcomes; ++y) {
                dist += abs(law[y] - tgt[y]);
            }
            dist /= 2;
            if (dist < best[c].first) {
                best[c] = {dist, idx};
            }
        }
    });
    SearchResult r;
    r.circuits = total;
    r.min_tvd = 2;
    for (const auto &[dist, idx] : best) {
        if (dist < r.min_tvd) {
            r.min_tvd = dist;
            r.best_index = idx;
        }
    }
    std::vector<Gate> chosen(n);
    std::uint64_t v = r.best_index;
    for (unsigned i = n; i-- > 0;) {
        chosen[i] = gates[v % U];
        v /= U;
    }
    r.best = LocalFunction(m, std::move(chosen));
    return r;
}

/// Largest per-bit floor: every output bit of a d-local circuit on fair
/// coins has a multiple of 2^-d as its marginal.
inline Rational per_bit_floor(const ExactDistribution &target, unsigned d) {
    if (target.kind() != OutcomeKind::bits) {
        throw ArgumentError("per-bit floor needs a law over bits");
    }
    Rational best = 0;
    for (unsigned i = 0; i < target.width(); ++i) {
        Rational p = target.probability([&](Outcome y) { return bit_of(y, target.width(), i) == 1; });
        best = std::max(best, err(p, d));
    }
    return best;
}

// ---------------------------------------------------------------------------
// Structural law against input enumeration
// ---------------------------------------------------------------------------

inline constexpr size_t kCrosscheckEnumBits = 20;

struct CrosscheckReport {
    bool equal = true;
    std::string method;
    std::optional<Outcome> first_difference;
    Rational structural_mass = 0;
    Rational oracle_mass = 0;
    unsigned width = 0;

    std::string describe() const {
        if (equal) {
            return "structural law matches " + method;
        }
        if (!first_difference) {
            return "discrepancy (" + method + ")";
        }
        return "discrepancy (" + method + ") at " + bits_string(*first_difference, width) +
               ": structural=" + rational_str(structural_mass) + " oracle=" + rational_str(oracle_mass);
    }
};

/// Compares the plan's structural law with the circuit's law on fair coins:
/// full enumeration up to 20 random bits, otherwise conditioning on the
/// plan's separator inputs.
inline CrosscheckReport oracle_tvd_crosscheck(const LocalFunction &circuit, const SamplerPlan &plan) {
    if (circuit.n() != plan.n) {
        throw ArgumentError("circuit output count differs from the plan");
    }
    CrosscheckReport rep;
    rep.width = plan.n;
    ExactDistribution oracle;
    auto biases = uniform_biases(circuit.m());
    if (circuit.m() <= kCrosscheckEnumBits) {
        rep.method = "enumeration";
        oracle = output_distribution_enum(circuit, biases);
    } else if (!plan.separator.empty()) {
        rep.method = "factored";
        oracle = output_distribution_factored(circuit, biases, plan.separator);
    } else {
        throw CapacityError("more than 20 random bits and no separator to factor on");
    }
    ExactDistribution structural;
    try {
        structural = structural_distribution(plan);
    } catch (const std::out_of_range &) {
        rep.equal = false;
        rep.method += ", plan references missing stage";
        return rep;
    }
    if (structural == oracle) {
        return rep;
    }
    rep.equal = false;
    std::set<Outcome> keys;
    for (const auto &[y, p] : structural.entries()) {
        keys.insert(y);
    }
    for (const auto &[y, p] : oracle.entries()) {
        keys.insert(y);
    }
    for (Outcome y : keys) {
        if (structural.mass(y) != oracle.mass(y)) {
            rep.first_difference = y;
            rep.structural_mass = structural.mass(y);
            rep.oracle_mass = oracle.mass(y);
            break;
        }
    }
    return rep;
}

inline CrosscheckReport oracle_tvd_crosscheck(const BuiltSampler &s) {
    return oracle_tvd_crosscheck(s.circuit, s.plan);
}

// ---------------------------------------------------------------------------
// Lower bounds against built samplers
// ---------------------------------------------------------------------------

/// Exact law a request is meant to approximate.
inline ExactDistribution request_target(const SamplerRequest &rq) {
    switch (rq.kind) {
    case SamplerKind::parity_mod2:
        return build_periodic(rq.n, 2, {0});
    case SamplerKind::biased_truncated:
        return build_biased(rq.n, rq.gamma);
    case SamplerKind::slice_recursive:
    case SamplerKind::slice_sparse:
        return build_slice(rq.n, rq.k);
    case SamplerKind::mod_sampler:
        return build_periodic(rq.n, rq.q, rq.lambda);
    case SamplerKind::direct_approx:
        return target_from_spec(rq.n, rq.target);
    }
    throw std::logic_error("unknown sampler kind");
}

inline std::string request_label(const SamplerRequest &rq) {
    std::string s = std::string(kind_name(rq.kind)) + " n=" + std::to_string(rq.n);
    switch (rq.kind) {
    case SamplerKind::parity_mod2:
        break;
    case SamplerKind::biased_truncated:
        s += " gamma=" + rational_str(rq.gamma) + " d=" + std::to_string(rq.d);
        break;
    case SamplerKind::slice_recursive:
    case SamplerKind::slice_sparse:
        s += " k=" + std::to_string(rq.k) + " eps=" + rational_str(rq.eps);
        break;
    case SamplerKind::mod_sampler:
        s += " q=" + std::to_string(rq.q) + " Lambda=" + detail::residues_str(normalize_residues(rq.q, rq.lambda)) +
             " eps=" + rational_str(rq.eps);
        if (rq.t_override) {
            s += " t=" + std::to_string(*rq.t_override);
        }
        break;
    case SamplerKind::direct_approx:
        s += " target=" + rq.target + " eps=" + rational_str(rq.eps);
        break;
    }
    return s;
}

struct SweepRow {
    std::string sampler;
    size_t random_bits = 0;
    size_t locality = 0;
    Rational measured_tvd = 0;
    BoundReport bound;
    bool applicable = false;
    bool ok = true;
    std::string note;
};

struct SweepReport {
    std::vector<SweepRow> rows;
    size_t fatal = 0;
};

/// Desk-scale grid covering every construction.
inline std::vector<SamplerRequest> default_sweep_grid() {
    std::vector<SamplerRequest> g;
    auto slice = [&](SamplerKind kind, unsigned n, unsigned k, Rational eps) {
        SamplerRequest r;
        r.kind = kind;
        r.n = n;
        r.k = k;
        r.eps = eps;
        g.push_back(r);
    };
    for (unsigned n : {3u, 6u, 9u}) {
        SamplerRequest r;
        r.kind = SamplerKind::parity_mod2;
        r.n = n;
        g.push_back(r);
    }
    for (unsigned d : {1u, 2u, 3u}) {
        for (unsigned n : {3u, 6u}) {
            SamplerRequest r;
            r.kind = SamplerKind::biased_truncated;
            r.n = n;
            r.d = d;
            r.gamma = Rational(1, 3);
            g.push_back(r);
        }
    }
    slice(SamplerKind::slice_recursive, 2, 1, Rational(1, 2));
    slice(SamplerKind::slice_recursive, 4, 2, Rational(1, 4));
    slice(SamplerKind::slice_recursive, 6, 2, Rational(1, 4));
    slice(SamplerKind::slice_recursive, 8, 4, Rational(1, 4));
    slice(SamplerKind::slice_recursive, 8, 2, Rational(1, 4));
    slice(SamplerKind::slice_recursive, 9, 3, Rational(1, 8));
    slice(SamplerKind::slice_sparse, 4, 1, Rational(1, 2));
    slice(SamplerKind::slice_sparse, 16, 2, Rational(1, 2));
    for (auto [n, q, lam, eps, t] : std::vector<std::tuple<unsigned, unsigned, std::vector<unsigned>, Rational, unsigned>>{
             {8, 3, {0}, Rational(1, 2), 4}, {6, 3, {1}, Rational(1, 2), 2}, {12, 3, {0}, Rational(1, 10), 3},
             {12, 4, {0, 2}, Rational(1, 2), 4}}) {
        SamplerRequest r;
        r.kind = SamplerKind::mod_sampler;
        r.n = n;
        r.q = q;
        r.lambda = lam;
        r.eps = eps;
        r.t_override = t;
        g.push_back(r);
    }
    for (auto [n, spec] : std::vector<std::pair<unsigned, std::string>>{{12, "periodic:3:0"}, {10, "slice:3"}, {6, "biased:1/3"}}) {
        SamplerRequest r;
        r.kind = SamplerKind::direct_approx;
        r.n = n;
        r.target = spec;
        r.eps = Rational(1, 10);
        g.push_back(r);
    }
    return g;
}

namespace detail {

/// Bounds that speak about the request's target at locality d.
inline std::vector<BoundReport> target_bounds(const SamplerRequest &rq, const ExactDistribution &target, unsigned d) {
    std::vector<BoundReport> out;
    BoundReport floor;
    floor.theorem = "per_bit_floor";
    floor.value = to_double(per_bit_floor(target, d));
    floor.params = {{"d", std::to_string(d)}};
    floor.conditions = {{"fair coin inputs", true}};
    floor.vacuous = !(floor.value > 0);
    out.push_back(floor);

    auto slice_like = [&](unsigned n, unsigned k) {
        if (k >= 1 && k + 1 <= n) {
            double delta = to_double(err(Rational(k, n), d));
            if (delta > 0) {
                out.push_back(thm_nondyadic_bound(n, d, delta));
            }
            unsigned kk = std::min(k, n - k);
            out.push_back(thm_slice_bound(n, d, kk, std::sqrt(static_cast<double>(n))));
        }
    };
    switch (rq.kind) {
    case SamplerKind::biased_truncated: {
        double delta = to_double(err(rq.gamma, d));
        if (delta > 0) {
            out.push_back(thm_biased_bound(rq.n, d, delta));
        }
        break;
    }
    case SamplerKind::slice_recursive:
    case SamplerKind::slice_sparse:
        slice_like(rq.n, rq.k);
        break;
    case SamplerKind::mod_sampler:
        if (rq.q >= 3) {
            out.push_back(thm_mod_slice_bound(rq.n, d, rq.q, rq.lambda));
        }
        break;
    case SamplerKind::direct_approx: {
        auto colon = rq.target.find(':');
        std::string head = rq.target.substr(0, colon);
        if (head == "slice") {
            slice_like(rq.n, static_cast<unsigned>(std::stoul(rq.target.substr(colon + 1))));
        } else if (head == "periodic") {
            auto rest = rq.target.substr(colon + 1);
            auto c2 = rest.find(':');
            unsigned q = static_cast<unsigned>(std::stoul(rest.substr(0, c2)));
            std::vector<unsigned> lam;
            std::stringstream ss(rest.substr(c2 + 1));
            for (std::string item; std::getline(ss, item, ',');) {
                lam.push_back(static_cast<unsigned>(std::stoul(item)));
            }
            if (q >= 3) {
                out.push_back(thm_mod_slice_bound(rq.n, d, q, lam));
            }
        } else if (head == "biased") {
            double delta = to_double(err(parse_rational(rq.target.substr(colon + 1)), d));
            if (delta > 0) {
                out.push_back(thm_biased_bound(rq.n, d, delta));
            }
        }
        break;
    }
    case SamplerKind::parity_mod2:
        break;
    }
    return out;
}

}  // namespace detail

/// Builds every sampler in the grid, measures its exact distance and
/// locality, and checks that no applicable lower bound exceeds the distance.
inline SweepReport lower_vs_upper_sweep(const std::vector<SamplerRequest> &grid, unsigned jobs = 1) {
    std::vector<std::vector<SweepRow>> per(grid.size());
    parallel_for(grid.size(), jobs, [&](std::uint64_t i) {
        const auto &rq = grid[i];
        auto s = build_sampler(rq);
        auto target = request_target(rq);
        Rational dist = tvd(structural_distribution(s.plan), target);
        unsigned d = static_cast<unsigned>(s.circuit.locality());
        auto bounds = detail::target_bounds(rq, target, std::max(1u, d));
        SweepRow base;
        base.sampler = request_label(rq);
        base.random_bits = s.plan.random_bits;
        base.locality = d;
        base.measured_tvd = dist;
        if (bounds.size() == 1 && bounds[0].vacuous) {
            base.note = "no lower bound applies";
        }
        for (auto &b : bounds) {
            SweepRow row = base;
            row.bound = b;
            row.applicable = b.applicable();
            row.ok = !row.applicable || to_double(dist) + kBoundSlack >= b.value;
            per[i].push_back(std::move(row));
        }
    });
    SweepReport rep;
    for (auto &rows : per) {
        for (auto &row : rows) {
            rep.fatal += row.ok ? 0 : 1;
            rep.rows.push_back(std::move(row));
        }
    }
    return rep;
}

/// CSV with header `sampler,random_bits,locality,measured_tvd,bound,bound_value,vacuous,applicable,ok,note`.
inline void write_sweep_csv(std::ostream &os, const SweepReport &rep) {
    os << "sampler,random_bits,locality,measured_tvd,bound,bound_value,vacuous,applicable,ok,note\n";
    for (const auto &r : rep.rows) {
        os << r.sampler << "," << r.random_bits << "," << r.locality << "," << decimal_str(to_double(r.measured_tvd))
           << "," << r.bound.theorem << "," << decimal_str(r.bound.value) << "," << (r.bound.vacuous ? 1 : 0) << ","
           << (r.applicable ? 1 : 0) << "," << (r.ok ? "ok" : "FATAL") << "," << r.note << "\n";
    }
}

}  // namespace slicekit
