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

#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <sstream>

#include "slicekit/bounds.hpp"

using namespace slicekit;

namespace {

Rational R(long long a, long long b = 1) { return Rational(a, b); }

IntDistribution bernoulli_half() { return {{0, R(1, 2)}, {1, R(1, 2)}}; }

// Pr[sum in Lambda mod q] through the discrete Fourier inversion formula.
double fourier_hit(unsigned q, const std::vector<unsigned> &lam, const std::vector<IntDistribution> &vars) {
    std::complex<double> total = 0;
    for (unsigned a = 0; a < q; ++a) {
        std::complex<double> chi = 1;
        for (const auto &X : vars) {
            std::complex<double> e = 0;
            for (const auto &[x, p] : X) {
                e += to_double(p) * std::polar(1.0, 2 * std::numbers::pi * static_cast<double>(a) * static_cast<double>(x) / q);
            }
            chi *= e;
        }
        for (unsigned c : lam) {
            total += chi * std::polar(1.0, -2 * std::numbers::pi * static_cast<double>(a) * c / q);
        }
    }
    return total.real() / q;
}

ExactDistribution independent_copies(unsigned t, const Rational &gamma) {
    return product({build_biased(t, gamma), build_biased(t, gamma)});
}

}  // namespace

TEST(TheoremBounds, Biased) {
    auto r = thm_biased_bound(100, 2, 1.0 / 12);
    EXPECT_TRUE(r.vacuous);
    EXPECT_LT(r.value, 0);
    for (unsigned n : {1u, 1000u, 4000000000u}) {
        for (double delta : {0.05, 0.25}) {
            EXPECT_NEAR(thm_biased_bound(n, 1, delta).value, 1 - 4 * std::exp(-n * std::pow(delta, 40.0)), 1e-12);
        }
    }
    auto big = thm_biased_bound(4000000000u, 1, 0.5);
    EXPECT_NEAR(big.value, 1 - 4 * std::exp(-4e9 * std::pow(0.5, 40.0)), 1e-12);
}

TEST(TheoremBounds, NondyadicIsWeakerAndScaled) {
    for (unsigned n : {10u, 1000u, 1000000u}) {
        for (double delta : {0.05, 0.1, 0.25}) {
            auto a = thm_biased_bound(n, 1, delta), b = thm_nondyadic_bound(n, 1, delta);
            EXPECT_LE(b.value, a.value + 1e-15);
            EXPECT_NEAR(1 - b.value, (1 - a.value) * std::sqrt(2.0 * n), 1e-9 * (1 - b.value) + 1e-15);
        }
    }
}

TEST(TheoremBounds, MonotoneOnGrids) {
    for (unsigned d = 1; d <= 2; ++d) {
        double prev = -1e300;
        for (std::uint64_t n = 1; n <= (1u << 30); n *= 4) {
            double v = thm_biased_bound(static_cast<unsigned>(n), d, 0.2).value;
            EXPECT_GE(v, prev);
            prev = v;
        }
        prev = -1e300;
        for (double delta = 0.01; delta <= 0.25; delta += 0.01) {
            double v = thm_biased_bound(1u << 20, d, delta).value;
            EXPECT_GE(v, prev);
            prev = v;
        }
    }
    double prev = 2;
    for (double theta = 1; theta <= 1000; theta *= 1.5) {
        double v = thm_slice_bound(1000000, 1, 10, theta).value;
        EXPECT_LE(v, prev);
        prev = v;
    }
}

TEST(TheoremBounds, Slice) {
    auto r = thm_slice_bound(1000000, 1, 10, 65536);
    EXPECT_FALSE(r.conditions_met());
    bool saw_degree = false, saw_kappa = false;
    for (const auto &[name, ok] : r.conditions) {
        if (name.find("log*(theta)/60") != std::string::npos) {
            saw_degree = true;
            EXPECT_EQ(ok, std::optional<bool>(false));
        }
        if (name.find("kappa") != std::string::npos) {
            saw_kappa = true;
            EXPECT_FALSE(ok.has_value());
        }
    }
    EXPECT_TRUE(saw_degree && saw_kappa);
    EXPECT_NEAR(thm_slice_bound(400, 1, 10, 20).value, 0, 1e-15);
    auto with_kappa = thm_slice_bound(400, 1, 10, 20, 5.0);
    EXPECT_EQ(with_kappa.conditions.back().second, std::optional<bool>(true));
}

TEST(TheoremBounds, ModSlice) {
    EXPECT_TRUE(thm_mod_slice_bound(12, 1, 3, {0, 1, 2}).vacuous);
    EXPECT_TRUE(thm_mod_slice_bound(12, 1, 4, {0, 2}).vacuous);
    auto r = thm_mod_slice_bound(12, 1, 3, {0});
    double eta_v = to_double(eta(12, 3, {0}));
    // With tow_2(18) in the exponent the exponential factor is 1; odd q gives tail |Lambda|/q.
    EXPECT_NEAR(r.value, 1 - 6 * 3 / eta_v - 1.0 / 3, 1e-9);
    EXPECT_TRUE(r.vacuous);
}

TEST(BranchBounds, ExplicitValues) {
    auto m = prop_mod_bounds(12, std::ldexp(1.0, 30), 1, 3, {0});
    EXPECT_NEAR(m.type1.value, 1.0, 1e-12);
    ASSERT_TRUE(m.type1.log1m.has_value());
    double eta_v = to_double(eta(12, 3, {0}));
    EXPECT_NEAR(*m.type1.log1m, std::log(2 / eta_v) - std::ldexp(1.0, 21), 1e-6);

    auto s = prop_slice_bounds(1000, 400, 1, 0.5, 1);
    EXPECT_NEAR(s.type2.value, 1 / std::sqrt(200.0), 1e-15);
    auto far = prop_slice_bounds(1000, 400, 1e12, 0.5, 1);
    EXPECT_TRUE(far.type1.vacuous);
    EXPECT_TRUE(far.type2.vacuous);
    auto farm = prop_mod_bounds(12, 400, 50, 3, {0});
    EXPECT_TRUE(farm.type1.vacuous);
    EXPECT_TRUE(farm.type2.vacuous);
}

TEST(Schedules, HandExamples) {
    auto b = schedule_params(ScheduleKind::biased, 1, R(1, 3));
    EXPECT_EQ(b.beta, 144);
    EXPECT_EQ(b.lambda, Rational(576) * 576 * 576);
    EXPECT_THROW(schedule_params(ScheduleKind::biased, 1, R(1, 2)), ArgumentError);
    auto s = schedule_params(ScheduleKind::slice, 1, R(1, 2));
    EXPECT_NEAR(s.neigh.L, 30, 1e-12);
    EXPECT_NEAR(s.neigh.F(3), 24, 1e-12);
    auto m = schedule_params(ScheduleKind::mod, 1, R(1, 2));
    EXPECT_EQ(m.tower_height, 16u);
    EXPECT_NEAR(m.neigh.F(1), 1024, 1e-9);
    EXPECT_NEAR(m.neigh.L, 10, 1e-12);
    // H(x) = 2^(2^(2^x)) at x = 2 is 2^16.
    EXPECT_NEAR(m.neigh.ln_H(std::log(2.0)), 16 * std::log(2.0), 1e-9);
}

TEST(LocalLimit, HandExamples) {
    std::vector<IntDistribution> six(6, bernoulli_half());
    EXPECT_EQ(mod_hit_probability(3, {0}, six), R(22, 64));
    EXPECT_EQ(mod_llt_spread(3, six), 3);
    auto lem = mod_llt_bound(3, {0}, 3.0);
    EXPECT_NEAR(lem.value, 3 * std::exp(-2.0 / 3) + 1.0 / 3, 1e-12);
    EXPECT_LE(22.0 / 64, lem.value);
    EXPECT_EQ(mod_hit_probability(3, {0, 1, 2}, six), 1);
    EXPECT_GE(mod_llt_bound(3, {0, 1, 2}, 3.0).value, 1);
    EXPECT_THROW(mod_llt_bound(3, {0}, -1.0), ArgumentError);
    EXPECT_LE(22.0 / 64, mod_llt_full(3, {0}, six) + 1e-12);
}

TEST(LocalLimit, EvenBranchIsSharp) {
    // All variables even: the sum never leaves the even residues.
    std::vector<IntDistribution> vars(10, IntDistribution{{0, R(1, 2)}, {2, R(1, 2)}});
    EXPECT_EQ(mod_hit_probability(4, {0, 2}, vars), 1);
    for (unsigned n = 1; n <= 12; ++n) {
        std::vector<IntDistribution> v(n, IntDistribution{{0, R(1, 2)}, {2, R(1, 2)}});
        double exact = to_double(mod_hit_probability(4, {0}, v));
        EXPECT_LE(exact, mod_llt_full(4, {0}, v) + 1e-12);
    }
}

TEST(LocalLimit, HitProbabilityMatchesFourierInversion) {
    std::mt19937_64 rng(8);
    for (int it = 0; it < 200; ++it) {
        auto in = random_llt_instance(rng);
        EXPECT_NEAR(to_double(mod_hit_probability(in.q, in.lambda, in.vars)), fourier_hit(in.q, in.lambda, in.vars),
                    1e-9);
        EXPECT_TRUE(llt_instance_check(in).holds) << llt_instance_check(in).detail;
    }
}

TEST(RootPower, HandExamples) {
    auto c = root_power_check(bernoulli_half(), 4, 2);
    EXPECT_NEAR(c.lhs, 0, 1e-12);
    EXPECT_NEAR(c.rhs, 15.0 / 16, 1e-12);
    auto z = root_power_check(bernoulli_half(), 5, 0);
    EXPECT_NEAR(z.lhs, 1, 1e-12);
    EXPECT_NEAR(z.rhs, 1, 1e-12);
    auto p = root_power_check({{7, R(1)}}, 6, 5);
    EXPECT_NEAR(p.lhs, 1, 1e-12);
    EXPECT_NEAR(p.rhs, 1, 1e-12);
}

TEST(RootPower, HoldsOnGrid) {
    for (unsigned q = 3; q <= 6; ++q) {
        for (unsigned t = 1; t <= 12; ++t) {
            for (auto g : {R(1, 10), R(3, 10), R(1, 2)}) {
                auto X = biased_weight_law(t, g);
                for (unsigned a = 0; a < q; ++a) {
                    EXPECT_TRUE(root_power_check(X, q, a).holds());
                }
            }
        }
    }
}

TEST(GammaShift, HandExamples) {
    auto g = gamma_shift_bound(3, R(1, 2), 3);
    EXPECT_EQ(g.d0, ExactDistribution::labels({{0, R(1, 4)}, {1, R(1, 2)}, {2, R(1, 4)}}));
    EXPECT_EQ(g.d1, ExactDistribution::labels({{0, R(1, 4)}, {1, R(1, 4)}, {2, R(1, 2)}}));
    EXPECT_EQ(g.exact_tvd, R(1, 4));
    EXPECT_NEAR(g.bound, 2.0 / 3 * std::exp2(-50 * 0.5 * 2 / 9), 1e-12);
    EXPECT_TRUE(g.holds());
    auto one = gamma_shift_bound(5, R(3, 10), 1);
    EXPECT_EQ(one.exact_tvd, 1);
    EXPECT_NEAR(one.bound, 2.0 / 5, 1e-12);
    EXPECT_EQ(gamma_shift_bound(4, R(1, 1000000), 2).exact_tvd, R(999999, 1000000));
    EXPECT_THROW(gamma_shift_bound(2, R(1, 2), 3), ArgumentError);
}

TEST(GammaShift, HoldsOnGrid) {
    for (unsigned q = 3; q <= 6; ++q) {
        for (unsigned t = 1; t <= 12; ++t) {
            for (auto g : {R(1, 10), R(3, 10), R(1, 2)}) {
                EXPECT_TRUE(gamma_shift_bound(q, g, t).holds()) << q << " " << t;
            }
        }
    }
}

TEST(Coupling, HandExamples) {
    auto c = coupling_bound_check(independent_copies(3, R(1, 2)), 3, R(1, 2), 3);
    EXPECT_TRUE(c.hypotheses_met());
    EXPECT_TRUE(c.holds());

    auto neg = coupling_bound_check(coupling_negative_control(), 2, R(1, 2), 2);
    EXPECT_EQ(neg.exact_prob, 1);
    EXPECT_FALSE(neg.q_ok);
    EXPECT_GT(to_double(neg.exact_prob), neg.bound);

    auto t1 = coupling_bound_check(independent_copies(1, R(1, 2)), 1, R(1, 2), 3);
    EXPECT_EQ(t1.exact_prob, R(1, 2));
    EXPECT_NEAR(t1.bound, 1 - 0.5 / 6, 1e-12);
    EXPECT_TRUE(t1.holds());
}

TEST(Coupling, ExactProbabilityMatchesDirectCount) {
    auto joint = independent_copies(3, R(1, 3));
    Rational direct = 0;
    for (const auto &[v, p] : joint.entries()) {
        unsigned a = std::popcount(v >> 3), b = std::popcount(v & 7u);
        if (a % 4 == b % 4) {
            direct += p;
        }
    }
    EXPECT_EQ(coupling_bound_check(joint, 3, R(1, 3), 4).exact_prob, direct);
}

TEST(LemmaSuites, NoViolations) {
    for (auto res : {run_lemma_suite("mult_apx", 60, 1, mult_apx_instance),
                     run_lemma_suite("product", 60, 2, product_lemma_instance),
                     run_lemma_suite("conditioning", 60, 3, conditioning_lemma_instance),
                     run_lemma_suite("coupling", 60, 4, coupling_lemma_instance)}) {
        EXPECT_EQ(res.instances, 60u);
        EXPECT_EQ(res.violations, 0u) << res.name << ": " << res.first_violation;
    }
}

TEST(LemmaSuites, SuiteIsReproducible) {
    auto a = run_lemma_suite("x", 10, 99, [](std::mt19937_64 &rng) {
        LemmaInstance in;
        in.detail = std::to_string(rng());
        in.holds = false;
        return in;
    });
    auto b = run_lemma_suite("x", 10, 99, [](std::mt19937_64 &rng) {
        LemmaInstance in;
        in.detail = std::to_string(rng());
        in.holds = false;
        return in;
    });
    EXPECT_EQ(a.violations, 10u);
    EXPECT_EQ(a.first_violation, b.first_violation);
}

TEST(Csv, RowShape) {
    std::ostringstream os;
    write_bound_csv(os, thm_biased_bound(100, 2, 1.0 / 12));
    EXPECT_EQ(os.str().rfind("biased,n=100,d=2", 0), 0u);
    EXPECT_NE(os.str().find(",vacuous,"), std::string::npos);
}
