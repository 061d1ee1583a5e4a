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

#include "slicekit/local_function.hpp"
#include "slicekit/numeric.hpp"

using namespace slicekit;

namespace {

Rational R(long long a, long long b = 1) { return Rational(a, b); }

const std::vector<std::uint8_t> kXor{0, 1, 1, 0};

// Bit i = x_i xor x_{i+1 mod 3}.
LocalFunction parity3() {
    return LocalFunction(3, {Gate({0, 1}, kXor), Gate({1, 2}, kXor), Gate({2, 0}, kXor)});
}

LocalFunction identity(size_t n) {
    std::vector<Gate> g;
    for (size_t i = 0; i < n; ++i) {
        g.push_back(Gate({i}, {0, 1}));
    }
    return LocalFunction(n, g);
}

std::vector<std::uint8_t> bits(const std::string &s) {
    std::vector<std::uint8_t> v;
    for (char c : s) {
        v.push_back(c == '1');
    }
    return v;
}

// Independent oracle: evaluate on every input and accumulate.
std::map<Outcome, Rational> brute_law(const LocalFunction &f, const InputBiases &b) {
    std::map<Outcome, Rational> m;
    for (std::uint64_t x = 0; x < (std::uint64_t{1} << f.m()); ++x) {
        std::vector<std::uint8_t> in(f.m());
        Rational p = 1;
        for (size_t j = 0; j < f.m(); ++j) {
            in[j] = x >> j & 1u;
            p *= in[j] ? b[j] : Rational(1 - b[j]);
        }
        auto y = f.eval(in);
        Outcome o = 0;
        for (auto v : y) {
            o = (o << 1) | v;
        }
        m[o] += p;
    }
    for (auto it = m.begin(); it != m.end();) {
        it = it->second == 0 ? m.erase(it) : std::next(it);
    }
    return m;
}

LocalFunction random_circuit(std::mt19937_64 &rng, size_t n, size_t m, size_t d) {
    std::vector<Gate> gates;
    for (size_t i = 0; i < n; ++i) {
        size_t fan = rng() % (d + 1);
        std::vector<size_t> ins;
        while (ins.size() < fan) {
            size_t j = rng() % m;
            if (std::find(ins.begin(), ins.end(), j) == ins.end()) {
                ins.push_back(j);
            }
        }
        std::vector<std::uint8_t> table(size_t{1} << fan);
        for (auto &t : table) {
            t = rng() & 1u;
        }
        gates.emplace_back(ins, table);
    }
    return LocalFunction(m, gates);
}

}  // namespace

TEST(Eval, HandExamples) {
    EXPECT_EQ(parity3().eval(bits("101")), bits("110"));
    LocalFunction c(2, {Gate::constant(true), Gate::constant(false)});
    EXPECT_EQ(c.eval(bits("00")), bits("10"));
    EXPECT_EQ(c.eval(bits("11")), bits("10"));
    EXPECT_EQ(identity(4).eval(bits("1011")), bits("1011"));
    EXPECT_THROW(parity3().eval(bits("10")), ArgumentError);
}

TEST(Gate, Validation) {
    EXPECT_THROW(Gate({0, 1}, {0, 1}), ArgumentError);
    EXPECT_THROW(Gate({0, 0}, kXor), ArgumentError);
    EXPECT_THROW(LocalFunction(1, {Gate({0, 1}, kXor)}), ArgumentError);
}

TEST(Structure, HandExamples) {
    auto f = parity3();
    EXPECT_EQ(f.locality(), 2u);
    EXPECT_EQ(f.neighborhoods()[0], (std::vector<size_t>{0, 1, 2}));
    EXPECT_EQ(f.deg(1), 2u);
    auto id = identity(3);
    for (size_t i = 0; i < 3; ++i) {
        EXPECT_EQ(id.neighborhoods()[i], std::vector<size_t>{i});
    }
    auto g = f.dependency_graph();
    EXPECT_EQ(g.inputs(0), (std::vector<size_t>{0, 1}));
}

TEST(Structure, NonConnected) {
    auto id = identity(3).dependency_graph();
    EXPECT_TRUE(non_connected(id, {0, 1}, Flavor::vertices));
    EXPECT_TRUE(non_connected(id, {0, 1}, Flavor::neighborhoods));
    auto p = parity3().dependency_graph();
    EXPECT_FALSE(non_connected(p, {0, 1}, Flavor::vertices));
    LocalFunction shared(3, {Gate({0, 2}, kXor), Gate({1, 2}, kXor), Gate({2}, {0, 1})});
    auto sg = shared.dependency_graph();
    EXPECT_FALSE(non_connected(sg, {0, 1}, Flavor::vertices));
    EXPECT_FALSE(non_connected(sg, {1, 2}, Flavor::vertices));
}

TEST(Restrict, HandExamples) {
    auto r = parity3().restrict({{0, false}});
    EXPECT_EQ(r.m(), 2u);
    EXPECT_EQ(r.locality(), 2u);
    // Surviving inputs are the original x2, x3.
    EXPECT_EQ(r.input_origin(), (std::vector<size_t>{1, 2}));
    for (std::uint64_t x = 0; x < 4; ++x) {
        std::uint8_t x2 = x & 1u, x3 = x >> 1 & 1u;
        auto y = r.eval(std::vector<std::uint8_t>{x2, x3});
        EXPECT_EQ(y, (std::vector<std::uint8_t>{x2, static_cast<std::uint8_t>(x2 ^ x3), x3}));
    }
    auto f = parity3();
    auto same = f.restrict({});
    EXPECT_EQ(brute_law(same, uniform_biases(3)), brute_law(f, uniform_biases(3)));
    auto one = identity(1).restrict({{0, true}});
    EXPECT_EQ(one.locality(), 0u);
    EXPECT_EQ(one.eval(std::vector<std::uint8_t>{}), bits("1"));
}

TEST(Restrict, MixtureOfRestrictionsIsOriginalLaw) {
    std::mt19937_64 rng(21);
    for (int it = 0; it < 25; ++it) {
        auto f = random_circuit(rng, 4, 6, 3);
        InputBiases b(6);
        for (auto &x : b) {
            x = R(1 + rng() % 3, 4);
        }
        std::vector<size_t> S{1, 4};
        std::map<Outcome, Rational> mixed;
        for (unsigned a = 0; a < 4; ++a) {
            Restriction rho{{1, (a & 1u) != 0}, {4, (a >> 1 & 1u) != 0}};
            Rational w = (a & 1u ? b[1] : 1 - b[1]) * (a >> 1 & 1u ? b[4] : 1 - b[4]);
            auto fr = f.restrict(rho);
            EXPECT_LE(fr.locality(), f.locality());
            InputBiases rb;
            for (size_t j : fr.input_origin()) {
                rb.push_back(b[j]);
            }
            auto part = output_distribution_enum(fr, rb);
            for (const auto &[y, p] : part.entries()) {
                mixed[y] += w * p;
            }
        }
        EXPECT_EQ(ExactDistribution::bits(4, mixed), output_distribution_enum(f, b));
    }
}

TEST(OutputDistribution, HandExamples) {
    auto law = output_distribution_enum(parity3(), uniform_biases(3));
    EXPECT_EQ(law.support_size(), 4u);
    for (Outcome y : {0b000, 0b011, 0b101, 0b110}) {
        EXPECT_EQ(law.mass(y), R(1, 4));
    }
    EXPECT_EQ(tvd(law, build_periodic(3, 2, {0})), 0);
    LocalFunction c(2, {Gate::constant(true), Gate::constant(false)});
    EXPECT_EQ(output_distribution_enum(c, uniform_biases(2)), ExactDistribution::point(2, 0b10));
}

TEST(OutputDistribution, MatchesBruteForceOnRandomCircuits) {
    std::mt19937_64 rng(2);
    for (int it = 0; it < 40; ++it) {
        auto f = random_circuit(rng, 5, 7, 3);
        InputBiases b(7);
        for (auto &x : b) {
            x = R(rng() % 5, 4);
        }
        auto law = output_distribution_enum(f, b);
        EXPECT_EQ(law, ExactDistribution::bits(5, brute_law(f, b)));
        // Marginal queries enumerate only the relevant inputs.
        EXPECT_EQ(output_distribution_enum(f, b, {1, 3}), marginal(law, {1, 3}));
        // Any separator gives the same law.
        EXPECT_EQ(output_distribution_factored(f, b, {0, 2}), law);
    }
}

TEST(OutputDistribution, NonConnectedBitsAreIndependent) {
    std::mt19937_64 rng(8);
    for (int it = 0; it < 30; ++it) {
        auto f = random_circuit(rng, 5, 8, 2);
        auto g = f.dependency_graph();
        auto law = output_distribution_enum(f, uniform_biases(8));
        std::vector<unsigned> T;
        for (unsigned i = 0; i < 5; ++i) {
            std::vector<size_t> trial(T.begin(), T.end());
            trial.push_back(i);
            if (non_connected(g, trial, Flavor::vertices)) {
                T.push_back(i);
            }
        }
        std::vector<ExactDistribution> singles;
        for (unsigned i : T) {
            singles.push_back(marginal(law, {i}));
        }
        EXPECT_EQ(marginal(law, T), product(singles));
    }
}

TEST(OutputDistribution, EnumerationCap) {
    std::vector<Gate> g;
    std::vector<size_t> all(25);
    for (size_t j = 0; j < 25; ++j) {
        all[j] = j;
    }
    g.push_back(Gate(all, GateRule([](std::uint64_t) { return true; })));
    LocalFunction f(25, g);
    EXPECT_THROW(output_distribution_enum(f, uniform_biases(25)), CapacityError);
}

TEST(PerBitFloor, OneLocalGatesAgainstOneThird) {
    // Every 1-local output bit on fair coins is at least err(1/3, 1) from Bernoulli(1/3).
    auto target = build_biased(1, R(1, 3));
    for (auto table : std::vector<std::vector<std::uint8_t>>{{0, 0}, {0, 1}, {1, 0}, {1, 1}}) {
        LocalFunction f(1, {Gate({0}, table)});
        EXPECT_GE(tvd(output_distribution_enum(f, uniform_biases(1)), target), err(R(1, 3), 1));
    }
    for (bool v : {false, true}) {
        LocalFunction f(1, {Gate::constant(v)});
        EXPECT_GE(tvd(output_distribution_enum(f, uniform_biases(1)), target), err(R(1, 3), 1));
    }
}

TEST(Classify, HandExamples) {
    auto r = classify_neighborhoods(parity3(), R(1, 2), R(1, 10));
    EXPECT_EQ(r[0].members, (std::vector<size_t>{0, 1, 2}));
    EXPECT_EQ(r[0].distance_to_target, R(1, 2));
    EXPECT_EQ(r[0].type, NeighborhoodType::type1);
    for (const auto &rep : classify_neighborhoods(identity(3), R(1, 2), 0)) {
        EXPECT_EQ(rep.distance_to_target, 0);
        EXPECT_EQ(rep.type, NeighborhoodType::type2);
    }
    LocalFunction zero(1, {Gate::constant(false)});
    auto z = classify_neighborhoods(zero, R(1, 2), R(1, 4));
    EXPECT_EQ(z[0].distance_to_target, R(1, 2));
    EXPECT_EQ(z[0].type, NeighborhoodType::type1);
    // Tie at the threshold counts as close.
    auto tie = classify_neighborhoods(zero, R(1, 2), R(1, 2));
    EXPECT_EQ(tie[0].type, NeighborhoodType::type2);
}

TEST(Resampling, HandExamples) {
    EXPECT_EQ(resampling_stat_exact(identity(1), 0, 0, uniform_biases(1)), R(1, 4));
    LocalFunction c(1, {Gate::constant(true)});
    EXPECT_EQ(resampling_stat_exact(c, 0, 0, uniform_biases(1)), 1);
    // (X, X xor B): the pair sum mod 2 equals B.
    LocalFunction pair(2, {Gate({0}, {0, 1}), Gate({0, 1}, kXor)});
    EXPECT_EQ(resampling_stat_exact(pair, 0, 2, uniform_biases(2)), 1);
}

TEST(FileFormat, RoundTripAndErrors) {
    auto f = parity3();
    std::stringstream ss;
    write_local_function(ss, f);
    EXPECT_EQ(ss.str().rfind("LOCALFN v1 n=3 m=3", 0), 0u);
    EXPECT_NE(ss.str().find("bit 1: inputs=1,2 table=0110"), std::string::npos);
    auto back = read_local_function(ss);
    std::stringstream again;
    write_local_function(again, back);
    std::stringstream orig;
    write_local_function(orig, f);
    EXPECT_EQ(again.str(), orig.str());

    std::stringstream bad("LOCALFN v1 n=1 m=2\nbit 1: inputs=1,2 table=011\n");
    EXPECT_THROW(read_local_function(bad), ParseError);
    std::stringstream range("LOCALFN v1 n=1 m=2\nbit 1: inputs=3 table=01\n");
    EXPECT_THROW(read_local_function(range), ParseError);
}
