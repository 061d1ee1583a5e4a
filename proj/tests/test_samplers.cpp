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

#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "slicekit/samplers.hpp"

using namespace slicekit;

namespace {

Rational R(long long a, long long b = 1) { return Rational(a, b); }

ExactDistribution enum_law(const BuiltSampler &s) {
    return output_distribution_enum(s.circuit, uniform_biases(s.circuit.m()));
}

unsigned bits_for(const Rational &x) {
    unsigned b = 0;
    while (Rational(pow2(b)) < x) {
        ++b;
    }
    return b;
}

// Independent collision count: weight-k strings with two ones in one block.
Rational collision_by_scan(const std::vector<size_t> &blocks, unsigned k) {
    size_t n = 0;
    std::vector<size_t> block_of;
    for (size_t b = 0; b < blocks.size(); ++b) {
        for (size_t p = 0; p < blocks[b]; ++p) {
            block_of.push_back(b);
        }
        n += blocks[b];
    }
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

}  // namespace

TEST(DistrApprox, HandExamples) {
    auto d = distr_approx({{0, R(3, 10)}, {1, R(7, 10)}}, R(1, 2));
    EXPECT_EQ(d.bits, 2u);
    EXPECT_EQ(d.mass_at(0), R(1, 4));
    EXPECT_EQ(d.mass_at(1), R(3, 4));
    EXPECT_EQ(d.target_tvd, R(1, 20));

    auto g = distr_approx({{0, R(1, 4)}, {1, R(1, 4)}, {2, R(1, 2)}}, R(1, 2));
    EXPECT_EQ(g.target_tvd, 0);

    auto p = distr_approx({{5, R(1)}}, R(1, 1000));
    EXPECT_EQ(p.target_tvd, 0);
    EXPECT_EQ(p.masses().at(5), 1);

    EXPECT_THROW(distr_approx({{0, R(1)}}, R(0)), ArgumentError);
}

TEST(DistrApprox, FloorRuleAndGateLaw) {
    std::mt19937_64 rng(1234);
    for (int it = 0; it < 200; ++it) {
        size_t s = 1 + rng() % 16;
        std::vector<long long> w(s);
        long long total = 0;
        for (auto &x : w) {
            x = 1 + static_cast<long long>(rng() % 50);
            total += x;
        }
        std::vector<std::pair<Outcome, Rational>> law;
        for (size_t i = 0; i < s; ++i) {
            law.emplace_back(i, R(w[i], total));
        }
        Rational eps = R(1 + static_cast<long long>(rng() % 8), 16);
        auto d = distr_approx(law, eps);
        // A point mass needs no random bits.
        unsigned bits = s == 1 ? 0 : bits_for(Rational(static_cast<long long>(s)) / eps);
        ASSERT_EQ(d.bits, bits);
        Rational B = pow2(bits), used = 0, dist = 0;
        for (size_t i = 0; i < s; ++i) {
            Rational want = i + 1 < s ? Rational(floor_rational(law[i].second * B)) / B : 1 - used;
            used += want;
            EXPECT_EQ(d.masses().count(i) ? d.masses().at(i) : Rational(0), want);
            Rational diff = want - law[i].second;
            dist += diff < 0 ? Rational(-diff) : diff;
        }
        dist /= 2;
        EXPECT_EQ(d.target_tvd, dist);
        EXPECT_LE(dist, eps);
        if (bits <= 12) {
            auto c = distr_approx_circuit(d, 4);
            EXPECT_EQ(output_distribution_enum(c, uniform_biases(c.m())), d.law(OutcomeKind::bits, 4));
        }
    }
}

TEST(Parity, HandExamples) {
    auto f3 = build_parity_mod2(3);
    auto law = output_distribution_enum(f3, uniform_biases(3));
    EXPECT_EQ(tvd(law, build_periodic(3, 2, {0})), 0);
    EXPECT_EQ(law.support_size(), 4u);
    auto law2 = output_distribution_enum(build_parity_mod2(2), uniform_biases(2));
    EXPECT_EQ(law2, build_periodic(2, 2, {0}));
    EXPECT_EQ(law2.mass(0b00), R(1, 2));
    for (unsigned n = 2; n <= 12; ++n) {
        EXPECT_EQ(build_parity_mod2(n).locality(), 2u);
    }
    EXPECT_THROW(build_parity_mod2(1), ArgumentError);
}

TEST(Biased, HandExamples) {
    auto half = build_biased_truncated(3, R(1, 2), 1);
    EXPECT_EQ(output_distribution_enum(half, uniform_biases(3)), build_uniform(3));
    struct Case {
        unsigned d;
        Rational p, dist;
    };
    for (auto c : {Case{2, R(1, 4), R(1, 12)}, Case{4, R(5, 16), R(1, 48)}}) {
        auto f = build_biased_truncated(2, R(1, 3), c.d);
        EXPECT_EQ(f.locality(), c.d);
        auto law = output_distribution_enum(f, uniform_biases(f.m()));
        for (unsigned i = 0; i < 2; ++i) {
            auto m = marginal(law, {i});
            EXPECT_EQ(m.mass(1), c.p);
            EXPECT_EQ(tvd(m, build_biased(1, R(1, 3))), c.dist);
            EXPECT_EQ(c.dist, err(R(1, 3), c.d));
        }
    }
}

TEST(SliceRecursive, HandExamples) {
    auto s = build_slice_recursive(2, 1, R(1, 2));
    EXPECT_EQ(structural_distribution(s.plan), build_slice(2, 1));

    auto z = build_slice_recursive(6, 0, R(1, 2));
    EXPECT_EQ(structural_distribution(z.plan), ExactDistribution::point(6, 0));
    EXPECT_EQ(z.circuit.locality(), 0u);
    auto full = build_slice_recursive(6, 6, R(1, 2));
    EXPECT_EQ(full.circuit.locality(), 0u);

    auto e = build_slice_recursive(8, 4, R(1, 4));
    EXPECT_LE(tvd(structural_distribution(e.plan), build_slice(8, 4)), R(1, 4));
}

TEST(SliceRecursive, NodeBudgetIsSupportSized) {
    auto s = build_slice_recursive(8, 3, R(1, 4));
    Rational node_eps = R(1, 4) / 8;
    for (const auto &nd : s.plan.tree.nodes) {
        for (const auto &[ones, d] : nd.split) {
            size_t left = nd.size / 2;
            size_t support = std::min<size_t>(ones, left) + 1;
            EXPECT_LE(d.bits, bits_for(Rational(static_cast<long long>(support)) / node_eps));
            EXPECT_LE(d.target_tvd, node_eps);
        }
    }
}

TEST(SliceSparse, HandExamples) {
    auto s = build_slice_sparse(4, 1, R(1, 2));
    EXPECT_EQ(s.plan.sparse.block_size, (std::vector<size_t>{1, 1, 1, 1}));
    EXPECT_EQ(collision_probability(s.plan.sparse.block_size, 1), 0);
    EXPECT_LE(tvd(structural_distribution(s.plan), build_slice(4, 1)), R(1, 2));

    auto z = build_slice_sparse(5, 0, R(1, 2));
    EXPECT_EQ(structural_distribution(z.plan), ExactDistribution::point(5, 0));

    auto b = build_slice_sparse(16, 2, R(1, 2));
    EXPECT_EQ(b.plan.sparse.block_size.size(), 16u);
    EXPECT_LE(tvd(structural_distribution(b.plan), build_slice(16, 2)), R(1, 2));
    EXPECT_LE(collision_probability(b.plan.sparse.block_size, 2), R(4, 16));

    EXPECT_THROW(build_slice_sparse(4, 2, R(1, 2)), ArgumentError);
}

TEST(SliceSparse, BlockLayoutPutsLargerBlocksFirst) {
    auto s = build_slice_sparse(11, 1, R(1, 2));
    EXPECT_EQ(s.plan.sparse.block_size, (std::vector<size_t>{3, 3, 3, 2}));
}

TEST(SliceSparse, CollisionIdentity) {
    // Equal blocks: the ideal gap to the slice is exactly the collision probability.
    for (auto blocks : {std::vector<size_t>{2, 2, 2}, std::vector<size_t>{3, 3, 3, 3}, std::vector<size_t>{2, 2, 2, 2, 2, 2},
                        std::vector<size_t>{4, 4, 4}}) {
        size_t n = 0;
        for (size_t h : blocks) {
            n += h;
        }
        for (unsigned k = 1; k <= 3 && k <= blocks.size(); ++k) {
            Rational coll = collision_by_scan(blocks, k);
            EXPECT_EQ(collision_probability(blocks, k), coll);
            EXPECT_EQ(tvd(ideal_sparse_distribution(blocks, k), build_slice(static_cast<unsigned>(n), k)), coll);
        }
    }
    // Unequal blocks: the collision probability still bounds the gap.
    std::vector<size_t> uneven{3, 2, 2};
    EXPECT_LE(tvd(ideal_sparse_distribution(uneven, 2), build_slice(7, 2)), collision_by_scan(uneven, 2));
}

TEST(ModSampler, HandExamples) {
    auto p = build_mod_sampler(6, 2, {0}, R(1, 4));
    EXPECT_EQ(p.plan.construction, SamplerKind::parity_mod2);
    EXPECT_EQ(tvd(structural_distribution(p.plan), build_periodic(6, 2, {0})), 0);

    auto d = build_mod_sampler(3, 3, {0}, R(1, 10), 3u);
    EXPECT_EQ(d.plan.construction, SamplerKind::direct_approx);
    EXPECT_EQ(d.plan.random_bits, 5u);
    EXPECT_LE(tvd(structural_distribution(d.plan), build_periodic(3, 3, {0})), R(1, 10));

    auto u = build_mod_sampler(6, 3, {0, 1, 2}, R(1, 8));
    EXPECT_LE(tvd(structural_distribution(u.plan), build_uniform(6)), R(1, 8));
}

TEST(ModSampler, BlockConstructionMeetsBudget) {
    struct Case {
        unsigned n, q;
        std::vector<unsigned> lam;
        Rational eps;
        unsigned t;
    };
    for (const auto &c : {Case{8, 3, {0}, R(1, 2), 4}, Case{6, 3, {1}, R(1, 2), 2}, Case{12, 4, {0, 2}, R(1, 2), 4}}) {
        auto s = build_mod_sampler(c.n, c.q, c.lam, c.eps, c.t);
        EXPECT_EQ(s.plan.construction, SamplerKind::mod_sampler);
        EXPECT_LE(s.plan.budget_total(), c.eps);
        EXPECT_LE(tvd(structural_distribution(s.plan), build_periodic(c.n, c.q, c.lam)), c.eps);
        EXPECT_LE(s.circuit.locality(), s.plan.declared_locality);
    }
}

TEST(Direct, HandExamples) {
    auto pt = direct_approx_sampler(ExactDistribution::point(3, 0b101), R(1, 4));
    EXPECT_EQ(pt.circuit.locality(), 0u);
    EXPECT_EQ(structural_distribution(pt.plan), ExactDistribution::point(3, 0b101));

    auto s = direct_approx_sampler(build_slice(2, 1), R(1, 4));
    EXPECT_EQ(s.plan.random_bits, 3u);
    EXPECT_LE(tvd(enum_law(s), build_slice(2, 1)), R(1, 4));

    auto p = direct_approx_sampler(build_periodic(3, 3, {0}), R(1, 10));
    EXPECT_LE(tvd(enum_law(p), build_periodic(3, 3, {0})), R(1, 10));
}

TEST(Samplers, StructuralLawEqualsEnumeration) {
    std::vector<BuiltSampler> all;
    for (unsigned n : {2u, 3u, 5u, 8u}) {
        all.push_back(detail::parity_sampler(n, false));
    }
    all.push_back(detail::biased_sampler(3, R(1, 3), 3));
    all.push_back(build_slice_recursive(2, 1, R(1, 2)));
    all.push_back(build_slice_recursive(4, 2, R(1, 4)));
    all.push_back(build_slice_recursive(6, 2, R(1, 4)));
    all.push_back(build_slice_recursive(5, 5, R(1, 4)));
    all.push_back(build_slice_recursive(3, 1, R(1, 2)));
    all.push_back(build_slice_recursive(4, 3, R(1)));
    all.push_back(build_slice_sparse(2, 1, R(1)));
    all.push_back(build_slice_sparse(4, 1, R(1)));
    all.push_back(build_slice_sparse(4, 1, R(1, 2)));
    all.push_back(build_slice_sparse(8, 1, R(1, 4)));
    all.push_back(build_mod_sampler(6, 3, {1}, R(1, 2), 2u));
    all.push_back(build_mod_sampler(3, 3, {0}, R(1, 10), 3u));
    all.push_back(direct_approx_sampler(build_periodic(6, 3, {0}), R(1, 10)));
    size_t checked = 0;
    for (const auto &s : all) {
        if (s.circuit.m() > 20) {
            continue;
        }
        ++checked;
        EXPECT_EQ(structural_distribution(s.plan), enum_law(s)) << kind_name(s.plan.construction);
        EXPECT_LE(s.circuit.locality(), s.plan.declared_locality);
        EXPECT_EQ(s.plan.random_bits, s.circuit.m());
    }
    EXPECT_GE(checked, 12u);
}

TEST(Samplers, ErrorLedgerWithinBudget) {
    for (auto s : {build_slice_recursive(8, 4, R(1, 4)), build_slice_recursive(8, 2, R(1, 4)),
                   build_slice_sparse(16, 2, R(1, 2)), build_mod_sampler(8, 3, {0}, R(1, 2), 4u)}) {
        EXPECT_LE(s.plan.budget_total(), s.plan.request.eps);
        for (const auto &e : s.plan.errors) {
            EXPECT_LE(e.measured, e.budget) << e.stage;
        }
    }
}

TEST(Samplers, PlanRoundTripRebuildsSameLaw) {
    SamplerRequest rq;
    rq.kind = SamplerKind::slice_recursive;
    rq.n = 6;
    rq.k = 2;
    rq.eps = R(1, 4);
    auto s = build_sampler(rq);
    std::stringstream ss;
    write_plan(ss, s.plan);
    EXPECT_EQ(ss.str().rfind("PLAN v1 kind=slice_recursive n=6 k=2", 0), 0u);
    auto back = build_sampler(read_plan_request(ss));
    EXPECT_EQ(structural_distribution(back.plan), structural_distribution(s.plan));
    std::stringstream bad("PLAN v2 kind=x\n");
    EXPECT_THROW(read_plan_request(bad), ParseError);
}

TEST(Samplers, TargetSpecs) {
    EXPECT_EQ(target_from_spec(4, "uniform"), build_uniform(4));
    EXPECT_EQ(target_from_spec(4, "slice:2"), build_slice(4, 2));
    EXPECT_EQ(target_from_spec(6, "periodic:3:0,2"), build_periodic(6, 3, {0, 2}));
    EXPECT_EQ(target_from_spec(3, "biased:1/3"), build_biased(3, R(1, 3)));
    EXPECT_THROW(target_from_spec(3, "slice"), ParseError);
    EXPECT_THROW(parse_kind("nope"), ArgumentError);
}
