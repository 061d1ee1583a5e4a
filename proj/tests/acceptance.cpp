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

// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on failure.

#include <bit>
#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

#include "slicekit/slicekit.hpp"

using namespace slicekit;

namespace {

Rational R(long long a, long long b = 1) { return Rational(a, b); }

// Collects the reasons a criterion failed.
struct Check {
    std::ostringstream why;
    bool ok = true;

    void expect(bool cond, const std::string &what) {
        if (!cond && ok) {
            why << what;
        }
        ok = ok && cond;
    }
};

struct Criterion {
    int id;
    std::string name;
    double limit_s;  // 0: no runtime limit
    std::function<void(Check &)> body;
};

// Independent scan: fraction of weight-k strings with two ones in a block.
Rational collision_by_scan(const std::vector<size_t> &blocks, unsigned k) {
    std::vector<size_t> block_of;
    for (size_t b = 0; b < blocks.size(); ++b) {
        block_of.insert(block_of.end(), blocks[b], b);
    }
    size_t n = block_of.size();
    long long hit = 0, all = 0;
    for (Outcome x = 0; x < (Outcome{1} << n); ++x) {
        if (static_cast<unsigned>(std::popcount(x)) != k) {
            continue;
        }
        ++all;
        std::vector<int> seen(blocks.size(), 0);
        bool twice = false;
        for (size_t i = 0; i < n; ++i) {
            if (x >> (n - 1 - i) & 1u) {
                twice |= ++seen[block_of[i]] > 1;
            }
        }
        hit += twice;
    }
    return R(hit, all);
}

// Pr[sum X_j in lambda mod q] by direct convolution of residue vectors.
Rational hit_by_convolution(unsigned q, const std::vector<unsigned> &lambda, const std::vector<IntDistribution> &vars) {
    std::vector<Rational> acc(q, 0);
    acc[0] = 1;
    for (const auto &X : vars) {
        std::vector<Rational> next(q, 0);
        for (unsigned a = 0; a < q; ++a) {
            for (const auto &[x, p] : X) {
                long long r = ((static_cast<long long>(a) + x) % q + q) % q;
                next[static_cast<size_t>(r)] += acc[a] * p;
            }
        }
        acc = next;
    }
    Rational out = 0;
    for (unsigned c : lambda) {
        out += acc[c % q];
    }
    return out;
}

BipartiteGraph random_graph(std::mt19937_64 &rng, size_t n, size_t m, size_t d) {
    std::vector<std::vector<size_t>> adj(n);
    for (auto &row : adj) {
        size_t deg = 1 + rng() % d;
        while (row.size() < deg) {
            size_t j = rng() % m;
            if (std::find(row.begin(), row.end(), j) == row.end()) {
                row.push_back(j);
            }
        }
    }
    return BipartiteGraph(n, m, adj);
}

std::string rstr(const Rational &r) {
    std::ostringstream os;
    os << r;
    return os.str();
}

SamplerRequest request(SamplerKind kind, unsigned n, unsigned k, const Rational &eps) {
    SamplerRequest r;
    r.kind = kind;
    r.n = n;
    r.k = k;
    r.eps = eps;
    return r;
}

void parity_is_exact(Check &c) {
    for (unsigned n = 2; n <= 16; ++n) {
        auto s = build_parity_mod2(n);
        auto law = output_distribution_enum(s, uniform_biases(s.m()));
        c.expect(tvd(law, build_periodic(n, 2, {0})) == 0, "n=" + std::to_string(n));
    }
}

void slice_samplers_within_eps(Check &c) {
    for (auto [n, k, eps] : std::vector<std::tuple<unsigned, unsigned, Rational>>{
             {2, 1, R(1, 2)}, {4, 2, R(1, 4)}, {8, 4, R(1, 4)}, {8, 2, R(1, 4)}}) {
        auto s = build_slice_recursive(n, k, eps);
        auto d = tvd(structural_distribution(s.plan), build_slice(n, k));
        c.expect(d <= eps, "slice_recursive n=" + std::to_string(n) + " tvd=" + rstr(d));
        if (s.circuit.m() <= 20) {
            auto e = tvd(output_distribution_enum(s.circuit, uniform_biases(s.circuit.m())), build_slice(n, k));
            c.expect(e == d, "slice_recursive enumeration disagrees at n=" + std::to_string(n));
        }
    }
    for (auto [n, k, eps] : std::vector<std::tuple<unsigned, unsigned, Rational>>{{4, 1, R(1, 2)}, {16, 2, R(1, 2)}}) {
        auto s = build_slice_sparse(n, k, eps);
        auto d = tvd(structural_distribution(s.plan), build_slice(n, k));
        c.expect(d <= eps, "sparse n=" + std::to_string(n) + " tvd=" + rstr(d));
        const auto &blocks = s.plan.sparse.block_size;
        Rational coll = collision_by_scan(blocks, k);
        c.expect(collision_probability(blocks, k) == coll, "collision count mismatch at n=" + std::to_string(n));
        bool equal_blocks = std::all_of(blocks.begin(), blocks.end(), [&](size_t b) { return b == blocks[0]; });
        Rational gap = tvd(ideal_sparse_distribution(blocks, k), build_slice(n, k));
        c.expect(equal_blocks ? gap == coll : gap <= coll, "collision identity fails at n=" + std::to_string(n));
    }
}

void distr_approx_500(Check &c) {
    std::mt19937_64 rng(20261016);
    for (int it = 0; it < 500 && c.ok; ++it) {
        size_t s = 1 + rng() % 16;
        std::vector<long long> w(s);
        long long total = 0;
        for (auto &x : w) {
            x = 1 + static_cast<long long>(rng() % 97);
            total += x;
        }
        std::map<Outcome, Rational> m;
        std::vector<std::pair<Outcome, Rational>> ordered;
        for (size_t i = 0; i < s; ++i) {
            ordered.emplace_back(i, R(w[i], total));
            m[i] = R(w[i], total);
        }
        Rational eps = R(1 + static_cast<long long>(rng() % 15), 16);
        auto d = distr_approx(ordered, eps);
        auto T = d.law(OutcomeKind::bits, 4);
        Rational dist = tvd(T, ExactDistribution::bits(4, m));
        c.expect(dist <= eps && dist == d.target_tvd, "trial " + std::to_string(it) + " tvd=" + rstr(dist));
        auto circuit = distr_approx_circuit(d, 4);
        c.expect(output_distribution_enum(circuit, uniform_biases(circuit.m())) == T,
                 "gate law differs at trial " + std::to_string(it));
    }
}

void structural_matches_enumeration(Check &c) {
    auto grid = default_sweep_grid();
    grid.push_back(request(SamplerKind::slice_recursive, 3, 1, R(1, 2)));
    grid.push_back(request(SamplerKind::slice_recursive, 4, 3, R(1)));
    grid.push_back(request(SamplerKind::slice_sparse, 2, 1, R(1)));
    grid.push_back(request(SamplerKind::slice_sparse, 4, 1, R(1)));
    size_t checked = 0;
    for (const auto &rq : grid) {
        auto s = build_sampler(rq);
        if (s.circuit.m() > 20) {
            continue;
        }
        ++checked;
        c.expect(structural_distribution(s.plan) == output_distribution_enum(s.circuit, uniform_biases(s.circuit.m())),
                 request_label(rq));
    }
    c.expect(checked >= 12, "only " + std::to_string(checked) + " samplers checked");
}

void one_local_floor(Check &c) {
    auto single = exhaustive_min_tvd(1, 1, 1, build_biased(1, R(1, 3)));
    c.expect(single.min_tvd == R(1, 6), "single bit floor " + rstr(single.min_tvd));
    auto three = exhaustive_min_tvd(3, 3, 1, build_biased(3, R(1, 3)), std::nullopt, 4);
    c.expect(three.min_tvd >= R(1, 6), "n=m=3 minimum " + rstr(three.min_tvd));
    c.expect(tvd(output_distribution_enum(three.best, uniform_biases(3)), build_biased(3, R(1, 3))) == three.min_tvd,
             "reported circuit does not attain the minimum");
}

void lemma_suites(Check &c) {
    std::vector<std::pair<std::string, std::function<LemmaInstance(std::mt19937_64 &)>>> suites{
        {"mult_apx", mult_apx_instance},
        {"product", product_lemma_instance},
        {"conditioning", conditioning_lemma_instance},
        {"coupling", coupling_lemma_instance}};
    std::uint64_t seed = 7;
    for (const auto &[name, make] : suites) {
        auto res = run_lemma_suite(name, 200, seed++, make);
        c.expect(res.instances == 200 && res.violations == 0, name + ": " + res.first_violation);
    }
    auto control = coupling_bound_check(coupling_negative_control(), 2, R(1, 2), 2);
    c.expect(control.exact_prob == 1, "negative control probability " + rstr(control.exact_prob));
    c.expect(!control.q_ok, "negative control should violate the modulus hypothesis");
}

void fourier_suites(Check &c) {
    for (unsigned q = 3; q <= 6; ++q) {
        for (unsigned t = 1; t <= 12; ++t) {
            for (const Rational &g : {R(1, 10), R(3, 10), R(1, 2)}) {
                auto X = biased_weight_law(t, g);
                for (unsigned a = 1; a < q; ++a) {
                    c.expect(root_power_check(X, q, a).holds(), "root_power q=" + std::to_string(q));
                }
                c.expect(gamma_shift_bound(q, g, t).holds(),
                         "gamma_shift q=" + std::to_string(q) + " t=" + std::to_string(t) + " gamma=" + rstr(g));
            }
        }
    }
    std::mt19937_64 rng(31);
    size_t even = 0;
    for (int i = 0; i < 200; ++i) {
        auto in = random_llt_instance(rng);
        c.expect(mod_hit_probability(in.q, in.lambda, in.vars) == hit_by_convolution(in.q, in.lambda, in.vars),
                 "hit probability disagrees with convolution");
        auto r = llt_instance_check(in);
        c.expect(r.holds, "mod_llt " + r.detail);
        bool all_even = in.q % 2 == 0;
        for (const auto &X : in.vars) {
            for (const auto &[x, p] : X) {
                all_even = all_even && (x - X.begin()->first) % 2 == 0;
            }
        }
        even += all_even;
    }
    c.expect(even > 0, "no even-branch instance among the 200 sets");
    auto hand = gamma_shift_bound(3, R(1, 2), 3);
    std::map<Outcome, Rational> d0{{0, R(1, 4)}, {1, R(1, 2)}, {2, R(1, 4)}};
    std::map<Outcome, Rational> d1{{0, R(1, 4)}, {1, R(1, 4)}, {2, R(1, 2)}};
    c.expect(hand.d0 == ExactDistribution::labels(d0), "hand D_0");
    c.expect(hand.d1 == ExactDistribution::labels(d1), "hand D_1");
    c.expect(hand.exact_tvd == R(1, 4), "hand tvd " + rstr(hand.exact_tvd));
}

void vertex_elimination_500(Check &c) {
    std::mt19937_64 rng(8080);
    for (int it = 0; it < 500 && c.ok; ++it) {
        size_t d = 1 + rng() % 3;
        size_t n = 1 + rng() % 200;
        size_t m = std::max<size_t>(d, 1 + rng() % 40);
        auto g = random_graph(rng, n, m, d);
        double beta = std::vector<double>{1, 2, 4}[rng() % 3];
        double dg = static_cast<double>(std::max<size_t>(1, g.max_left_degree()));
        double lambda = 2 * dg * std::pow(2 * dg * beta + 1, 2 * dg);
        auto res = eliminate_vertices(g, beta, lambda);
        std::string tag = "trial " + std::to_string(it);
        c.expect(satisfies_vertex_property(g, res, beta, lambda), tag + ": property");
        auto rest = g.without_right(res.deleted);
        for (size_t a = 0; a < res.selected.size(); ++a) {
            for (size_t b = a + 1; b < res.selected.size(); ++b) {
                c.expect(!rest.connected(res.selected[a], res.selected[b]), tag + ": selected pair is connected");
            }
        }
        c.expect(res.batches <= 2 * g.max_left_degree() + 1, tag + ": too many batches");
        if (m <= 14 && n <= 64) {
            auto best = brute_force_best_elimination(g, res.deleted.size(), Flavor::vertices, 4);
            c.expect(res.r <= best.r, tag + ": r above brute-force optimum");
        }
    }
}

void tight_constructions(Check &c) {
    for (auto [beta, d] : std::vector<std::pair<unsigned, unsigned>>{{3, 2}, {4, 2}, {3, 3}}) {
        auto g = gen_tight_vtx(beta, d);
        auto rep = verify_tight_vtx(g, beta, TightMode::all(), 4);
        c.expect(rep.exhaustive && rep.rows.size() == (size_t{1} << g.m_right()), "vtx rows");
        for (const auto &row : rep.rows) {
            c.expect(row.max_nonconnected <= row.bound, "vtx ceiling");
        }
        c.expect(rep.ok(), "vtx violations");
    }
    auto g = gen_tight_neigh(4);
    auto rep = verify_tight_neigh(g, TightMode::all(), 4);
    c.expect(rep.exhaustive && rep.rows.size() == (size_t{1} << g.m_right()), "neigh rows");
    for (const auto &row : rep.rows) {
        c.expect(row.max_nonconnected <= row.bound, "neigh ceiling");
    }
    c.expect(rep.ok(), "neigh violations");
    c.expect(g.max_left_degree() <= 4, "neigh left degree");
    bool root = false;
    for (size_t v = 0; v < g.m_right(); ++v) {
        root |= g.degree(v) == g.n_left();
    }
    c.expect(root, "no all-adjacent right vertex");
}

void sweep_and_residue(Check &c) {
    auto rep = lower_vs_upper_sweep(default_sweep_grid(), 4);
    c.expect(rep.fatal == 0, std::to_string(rep.fatal) + " fatal rows");
    // Residue counts of C(20, w) by Pascal rows.
    std::vector<BigInt> row{1};
    for (unsigned i = 0; i < 20; ++i) {
        std::vector<BigInt> next(row.size() + 1, 0);
        for (size_t j = 0; j < row.size(); ++j) {
            next[j] += row[j];
            next[j + 1] += row[j];
        }
        row = next;
    }
    BigInt hit = 0;
    for (size_t w = 0; w < row.size(); w += 3) {
        hit += row[w];
    }
    Rational p = Rational(hit) / pow2(20);
    Rational gap = p - R(1, 3);
    c.expect((gap < 0 ? Rational(-gap) : gap) <= R(1, 100), "Pr[weight = 0 mod 3] = " + rstr(p));
    std::vector<IntDistribution> coins(20, IntDistribution{{0, R(1, 2)}, {1, R(1, 2)}});
    c.expect(mod_hit_probability(3, {0}, coins) == p, "library hit probability differs");
}

}  // namespace

int main() {
    std::vector<Criterion> all{
        {1, "parity sampler is exact for n = 2..16", 1, parity_is_exact},
        {2, "slice samplers within eps, collision identity", 10, slice_samplers_within_eps},
        {3, "distr_approx on 500 seeded laws", 5, distr_approx_500},
        {4, "structural law equals enumeration (<= 20 bits)", 0, structural_matches_enumeration},
        {5, "1-local floor 1/6 against Bernoulli(1/3)", 60, one_local_floor},
        {6, "lemma suites, 200 instances each, q=2 control", 60, lemma_suites},
        {7, "root power, gamma shift, modular LLT", 60, fourier_suites},
        {8, "vertex elimination on 500 random graphs", 120, vertex_elimination_500},
        {9, "sharpness constructions, exhaustive", 120, tight_constructions},
        {10, "sweep has no fatal rows, residue mass near 1/3", 0, sweep_and_residue},
    };
    int failures = 0;
    for (const auto &cr : all) {
        Check c;
        auto start = std::chrono::steady_clock::now();
        try {
            cr.body(c);
        } catch (const std::exception &e) {
            c.expect(false, std::string("exception: ") + e.what());
        }
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (cr.limit_s > 0 && secs >= cr.limit_s) {
            c.expect(false, "over time limit");
        }
        char timing[64];
        std::snprintf(timing, sizeof timing, "%.3fs", secs);
        std::cout << (c.ok ? "PASS" : "FAIL") << " [" << cr.id << "] " << cr.name << " (" << timing;
        if (cr.limit_s > 0) {
            std::cout << " < " << cr.limit_s << "s";
        }
        std::cout << ")";
        if (!c.ok) {
            std::cout << ": " << c.why.str();
            ++failures;
        }
        std::cout << "\n";
    }
    std::cout << (failures == 0 ? "all criteria pass" : std::to_string(failures) + " criteria failed") << "\n";
    return failures == 0 ? 0 : 1;
}
