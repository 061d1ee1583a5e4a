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
#include <functional>
#include <istream>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "slicekit/core.hpp"
#include "slicekit/distribution.hpp"
#include "slicekit/graph.hpp"

namespace slicekit {

/// Gates up to this fan-in carry an explicit truth table.
inline constexpr unsigned kTableFanIn = 20;

/// Evaluates a gate from its packed local assignment (bit t = value of inputs[t]).
using GateRule = std::function<bool(std::uint64_t)>;

/// One output bit: an ordered input list and its truth table. Position 0 of
/// the input list is the least significant bit of the table index. Gates
/// whose fan-in exceeds kTableFanIn keep the rule that defines the table.
class Gate {
  public:
    Gate() : table_{0} {}

    static Gate constant(bool value) {
        Gate g;
        g.table_ = {static_cast<std::uint8_t>(value)};
        return g;
    }

    Gate(std::vector<size_t> inputs, std::vector<std::uint8_t> table)
        : inputs_(std::move(inputs)), table_(std::move(table)) {
        check_inputs();
        if (table_.size() != (size_t{1} << inputs_.size())) {
            throw ArgumentError("truth table length must be 2^fan-in");
        }
        for (auto &b : table_) {
            if (b > 1) {
                throw ArgumentError("truth table entries must be 0 or 1");
            }
        }
    }

    Gate(std::vector<size_t> inputs, GateRule rule) : inputs_(std::move(inputs)) {
        check_inputs();
        if (inputs_.size() > 64) {
            throw CapacityError("gate fan-in above 64");
        }
        if (inputs_.size() <= kTableFanIn) {
            size_t len = size_t{1} << inputs_.size();
            table_.resize(len);
            for (size_t idx = 0; idx < len; ++idx) {
                table_[idx] = rule(idx) ? 1 : 0;
            }
        } else {
            rule_ = std::move(rule);
        }
    }

    const std::vector<size_t> &inputs() const { return inputs_; }
    size_t fan_in() const { return inputs_.size(); }
    bool has_table() const { return !rule_; }

    const std::vector<std::uint8_t> &table() const {
        if (rule_) {
            throw CapacityError("gate with fan-in " + std::to_string(fan_in()) + " has no materialized table");
        }
        return table_;
    }

    bool eval_local(std::uint64_t local) const {
        return rule_ ? rule_(local) : table_[local] != 0;
    }

    bool eval(std::span<const std::uint8_t> x) const {
        std::uint64_t local = 0;
        for (size_t t = 0; t < inputs_.size(); ++t) {
            local |= static_cast<std::uint64_t>(x[inputs_[t]] & 1u) << t;
        }
        return eval_local(local);
    }

    /// Drops inputs the table ignores; a constant table ends with fan-in 0.
    Gate pruned() const {
        if (rule_) {
            return *this;
        }
        std::vector<size_t> keep_pos;
        for (size_t t = 0; t < inputs_.size(); ++t) {
            size_t bit = size_t{1} << t;
            bool relevant = false;
            for (size_t idx = 0; idx < table_.size() && !relevant; ++idx) {
                if (!(idx & bit) && table_[idx] != table_[idx | bit]) {
                    relevant = true;
                }
            }
            if (relevant) {
                keep_pos.push_back(t);
            }
        }
        if (keep_pos.size() == inputs_.size()) {
            return *this;
        }
        std::vector<size_t> ins;
        for (size_t t : keep_pos) {
            ins.push_back(inputs_[t]);
        }
        std::vector<std::uint8_t> tab(size_t{1} << keep_pos.size());
        for (size_t idx = 0; idx < tab.size(); ++idx) {
            size_t full = 0;
            for (size_t k = 0; k < keep_pos.size(); ++k) {
                if (idx >> k & 1u) {
                    full |= size_t{1} << keep_pos[k];
                }
            }
            tab[idx] = table_[full];
        }
        return Gate(std::move(ins), std::move(tab));
    }

    /// Keeps the input list but reports a constant table as fan-in 0.
    Gate folded() const {
        if (rule_ || inputs_.empty()) {
            return *this;
        }
        for (auto b : table_) {
            if (b != table_[0]) {
                return *this;
            }
        }
        return constant(table_[0] != 0);
    }

  private:
    void check_inputs() const {
        std::set<size_t> s(inputs_.begin(), inputs_.end());
        if (s.size() != inputs_.size()) {
            throw ArgumentError("gate inputs must be distinct");
        }
    }

    std::vector<size_t> inputs_;
    std::vector<std::uint8_t> table_;
    GateRule rule_;
};

/// Restriction: fixed values for some inputs.
using Restriction = std::map<size_t, bool>;

/// Explicit circuit with n outputs over m inputs.
class LocalFunction {
  public:
    LocalFunction() = default;

    LocalFunction(size_t m, std::vector<Gate> gates) : m_(m), gates_(std::move(gates)) {
        for (const auto &g : gates_) {
            for (size_t j : g.inputs()) {
                if (j >= m_) {
                    throw ArgumentError("gate input " + std::to_string(j) + " outside [0," + std::to_string(m_) + ")");
                }
            }
        }
        origin_.resize(m_);
        for (size_t j = 0; j < m_; ++j) {
            origin_[j] = j;
        }
    }

    size_t n() const { return gates_.size(); }
    size_t m() const { return m_; }
    const Gate &gate(size_t i) const { return gates_[i]; }
    const std::vector<Gate> &gates() const { return gates_; }

    /// Original index of each current input, kept through restrictions.
    const std::vector<size_t> &input_origin() const { return origin_; }

    size_t locality() const {
        size_t d = 0;
        for (const auto &g : gates_) {
            d = std::max(d, g.fan_in());
        }
        return d;
    }

    std::vector<std::uint8_t> eval(std::span<const std::uint8_t> x) const {
        if (x.size() != m_) {
            throw ArgumentError("input length " + std::to_string(x.size()) + " != m=" + std::to_string(m_));
        }
        std::vector<std::uint8_t> y(gates_.size());
        for (size_t i = 0; i < gates_.size(); ++i) {
            y[i] = gates_[i].eval(x) ? 1 : 0;
        }
        return y;
    }

    /// Output bits that read input j.
    size_t deg(size_t j) const {
        size_t c = 0;
        for (const auto &g : gates_) {
            c += std::count(g.inputs().begin(), g.inputs().end(), j);
        }
        return c;
    }

    BipartiteGraph dependency_graph() const {
        std::vector<std::vector<size_t>> adj(gates_.size());
        for (size_t i = 0; i < gates_.size(); ++i) {
            adj[i] = gates_[i].inputs();
        }
        return BipartiteGraph(gates_.size(), m_, std::move(adj));
    }

    std::vector<std::vector<size_t>> neighborhoods() const {
        auto g = dependency_graph();
        std::vector<std::vector<size_t>> out;
        for (size_t i = 0; i < gates_.size(); ++i) {
            out.push_back(g.neighborhood(i));
        }
        return out;
    }

    /// Same circuit with every gate pruned to the inputs it depends on.
    LocalFunction simplified() const {
        LocalFunction f = *this;
        for (auto &g : f.gates_) {
            g = g.pruned();
        }
        return f;
    }

    LocalFunction restrict(const Restriction &rho) const {
        for (const auto &[j, v] : rho) {
            if (j >= m_) {
                throw ArgumentError("restriction key outside the input range");
            }
        }
        std::vector<long> renum(m_, -1);
        std::vector<size_t> origin;
        for (size_t j = 0; j < m_; ++j) {
            if (!rho.count(j)) {
                renum[j] = static_cast<long>(origin.size());
                origin.push_back(origin_[j]);
            }
        }
        std::vector<Gate> gates;
        gates.reserve(gates_.size());
        for (const auto &g : gates_) {
            std::vector<size_t> kept_pos;
            std::vector<size_t> new_inputs;
            std::uint64_t fixed_bits = 0;
            for (size_t t = 0; t < g.inputs().size(); ++t) {
                size_t j = g.inputs()[t];
                auto it = rho.find(j);
                if (it == rho.end()) {
                    kept_pos.push_back(t);
                    new_inputs.push_back(static_cast<size_t>(renum[j]));
                } else if (it->second) {
                    fixed_bits |= std::uint64_t{1} << t;
                }
            }
            Gate src = g;
            GateRule rule = [src, kept_pos, fixed_bits](std::uint64_t local) {
                std::uint64_t full = fixed_bits;
                for (size_t k = 0; k < kept_pos.size(); ++k) {
                    full |= ((local >> k) & 1u) << kept_pos[k];
                }
                return src.eval_local(full);
            };
            gates.push_back(Gate(std::move(new_inputs), std::move(rule)).folded());
        }
        LocalFunction f(origin.size(), std::move(gates));
        f.origin_ = std::move(origin);
        return f;
    }

  private:
    size_t m_ = 0;
    std::vector<Gate> gates_;
    std::vector<size_t> origin_;
};

/// Product-of-Bernoullis input law: bias[j] = Pr[input j = 1].
using InputBiases = std::vector<Rational>;

inline InputBiases uniform_biases(size_t m) {
    return InputBiases(m, Rational(1, 2));
}

namespace detail {

/// Sorted union of the inputs read by the listed outputs.
inline std::vector<size_t> inputs_read(const LocalFunction &f, const std::vector<size_t> &outputs) {
    std::set<size_t> s;
    for (size_t i : outputs) {
        s.insert(f.gate(i).inputs().begin(), f.gate(i).inputs().end());
    }
    return {s.begin(), s.end()};
}

/// Law of the listed outputs when the inputs in `free_inputs` are drawn from
/// the biases and every other input takes its value from `fixed`. The result
/// maps output codes (outputs[0] is the most significant bit) to masses.
inline std::map<Outcome, Rational> enumerate_outputs(const LocalFunction &f, const std::vector<size_t> &outputs,
                                                     const std::vector<size_t> &free_inputs,
                                                     const std::vector<std::uint8_t> &fixed,
                                                     const InputBiases &biases) {
    size_t k = free_inputs.size();
    if (k > 63) {
        throw CapacityError("too many free inputs");
    }
    std::unordered_map<size_t, size_t> pos;
    for (size_t t = 0; t < k; ++t) {
        pos[free_inputs[t]] = t;
    }
    // Per gate: local index contribution from fixed inputs, and free positions.
    struct Plan {
        std::uint64_t fixed_part = 0;
        std::vector<std::pair<size_t, size_t>> free_map;  // (bit in assignment, bit in local index)
    };
    std::vector<Plan> plans(outputs.size());
    for (size_t o = 0; o < outputs.size(); ++o) {
        const auto &ins = f.gate(outputs[o]).inputs();
        for (size_t t = 0; t < ins.size(); ++t) {
            auto it = pos.find(ins[t]);
            if (it != pos.end()) {
                plans[o].free_map.emplace_back(it->second, t);
            } else if (fixed.at(ins[t])) {
                plans[o].fixed_part |= std::uint64_t{1} << t;
            }
        }
    }
    bool same_bias = true;
    for (size_t t = 1; t < k; ++t) {
        if (biases[free_inputs[t]] != biases[free_inputs[0]]) {
            same_bias = false;
            break;
        }
    }
    const std::uint64_t total = std::uint64_t{1} << k;
    size_t no = outputs.size();
    auto code_of = [&](std::uint64_t a) {
        Outcome y = 0;
        for (size_t o = 0; o < no; ++o) {
            std::uint64_t local = plans[o].fixed_part;
            for (const auto &[src, dst] : plans[o].free_map) {
                local |= ((a >> src) & 1u) << dst;
            }
            y = (y << 1) | static_cast<Outcome>(f.gate(outputs[o]).eval_local(local));
        }
        return y;
    };
    std::map<Outcome, Rational> out;
    if (same_bias) {
        // Mass depends only on the number of ones in the assignment.
        std::unordered_map<Outcome, std::vector<std::uint64_t>> counts;
        for (std::uint64_t a = 0; a < total; ++a) {
            auto &c = counts[code_of(a)];
            if (c.empty()) {
                c.assign(k + 1, 0);
            }
            ++c[static_cast<size_t>(std::popcount(a))];
        }
        Rational g = k ? biases[free_inputs[0]] : Rational(1, 2);
        if (g == Rational(1, 2)) {
            // Fair inputs: every assignment weighs 2^-k.
            Rational unit = Rational(1) / pow2(static_cast<unsigned>(k));
            for (const auto &[y, c] : counts) {
                std::uint64_t hits = 0;
                for (auto x : c) {
                    hits += x;
                }
                out[y] += unit * hits;
            }
            return out;
        }
        std::vector<Rational> w(k + 1);
        for (size_t ones = 0; ones <= k; ++ones) {
            Rational p = 1;
            for (size_t t = 0; t < ones; ++t) {
                p *= g;
            }
            for (size_t t = ones; t < k; ++t) {
                p *= 1 - g;
            }
            w[ones] = p;
        }
        for (const auto &[y, c] : counts) {
            Rational s = 0;
            for (size_t ones = 0; ones <= k; ++ones) {
                if (c[ones]) {
                    s += w[ones] * c[ones];
                }
            }
            if (s != 0) {
                out[y] += s;
            }
        }
        return out;
    }
    for (std::uint64_t a = 0; a < total; ++a) {
        Rational p = 1;
        for (size_t t = 0; t < k && p != 0; ++t) {
            p *= (a >> t & 1u) ? biases[free_inputs[t]] : Rational(1 - biases[free_inputs[t]]);
        }
        if (p != 0) {
            out[code_of(a)] += p;
        }
    }
    return out;
}

inline void check_biases(const LocalFunction &f, const InputBiases &biases) {
    if (biases.size() != f.m()) {
        throw ArgumentError("input law has " + std::to_string(biases.size()) + " biases for m=" + std::to_string(f.m()));
    }
    for (const auto &b : biases) {
        if (b < 0 || b > 1) {
            throw ArgumentError("input bias outside [0,1]");
        }
    }
}

}  // namespace detail

/// Exact law of the outputs in S (all outputs when S is empty) by enumerating
/// the inputs those outputs read.
inline ExactDistribution output_distribution_enum(const LocalFunction &f, const InputBiases &biases,
                                                  std::vector<size_t> S = {}) {
    detail::check_biases(f, biases);
    if (S.empty()) {
        for (size_t i = 0; i < f.n(); ++i) {
            S.push_back(i);
        }
    }
    if (S.size() > kMaxDistBits) {
        throw CapacityError("output width exceeds the distribution cap");
    }
    auto inputs = detail::inputs_read(f, S);
    if (inputs.size() > enumeration_cap_bits()) {
        throw CapacityError("enumeration over " + std::to_string(inputs.size()) + " input bits exceeds the cap of " +
                            std::to_string(enumeration_cap_bits()));
    }
    std::vector<std::uint8_t> fixed(f.m(), 0);
    auto m = detail::enumerate_outputs(f, S, inputs, fixed, biases);
    return ExactDistribution::bits(static_cast<unsigned>(S.size()), m);
}

/// Exact output law computed by enumerating a separator set of inputs and,
/// for each separator value, the inputs of each output component on its own.
/// Exact for any separator; the separator only affects the running time.
inline ExactDistribution output_distribution_factored(const LocalFunction &f, const InputBiases &biases,
                                                      const std::vector<size_t> &separator) {
    detail::check_biases(f, biases);
    unsigned n = static_cast<unsigned>(f.n());
    if (n > kMaxDistBits) {
        throw CapacityError("output width exceeds the distribution cap");
    }
    std::vector<char> is_sep(f.m(), 0);
    for (size_t j : separator) {
        is_sep.at(j) = 1;
    }
    std::vector<size_t> sep;
    for (size_t j = 0; j < f.m(); ++j) {
        if (is_sep[j]) {
            sep.push_back(j);
        }
    }
    unsigned cap = enumeration_cap_bits();
    if (sep.size() > cap) {
        throw CapacityError("separator exceeds the enumeration cap");
    }
    // Components of outputs linked through non-separator inputs.
    std::vector<size_t> parent(n);
    for (size_t i = 0; i < n; ++i) {
        parent[i] = i;
    }
    std::function<size_t(size_t)> find = [&](size_t x) { return parent[x] == x ? x : parent[x] = find(parent[x]); };
    std::map<size_t, size_t> owner;
    for (size_t i = 0; i < n; ++i) {
        for (size_t j : f.gate(i).inputs()) {
            if (is_sep[j]) {
                continue;
            }
            auto it = owner.find(j);
            if (it == owner.end()) {
                owner[j] = i;
            } else {
                parent[find(i)] = find(it->second);
            }
        }
    }
    std::map<size_t, std::vector<size_t>> comps;
    for (size_t i = 0; i < n; ++i) {
        comps[find(i)].push_back(i);
    }
    struct Comp {
        std::vector<size_t> outputs;
        std::vector<size_t> free;
    };
    std::vector<Comp> cs;
    for (auto &[root, outs] : comps) {
        Comp c;
        c.outputs = outs;
        for (size_t j : detail::inputs_read(f, outs)) {
            if (!is_sep[j]) {
                c.free.push_back(j);
            }
        }
        if (c.free.size() > cap) {
            throw CapacityError("component exceeds the enumeration cap");
        }
        cs.push_back(std::move(c));
    }
    std::map<Outcome, Rational> total;
    std::vector<std::uint8_t> fixed(f.m(), 0);
    const std::uint64_t patterns = std::uint64_t{1} << sep.size();
    for (std::uint64_t a = 0; a < patterns; ++a) {
        Rational w = 1;
        for (size_t t = 0; t < sep.size(); ++t) {
            fixed[sep[t]] = static_cast<std::uint8_t>(a >> t & 1u);
            w *= fixed[sep[t]] ? biases[sep[t]] : Rational(1 - biases[sep[t]]);
        }
        if (w == 0) {
            continue;
        }
        std::map<Outcome, Rational> acc{{0, w}};
        for (const auto &c : cs) {
            auto part = detail::enumerate_outputs(f, c.outputs, c.free, fixed, biases);
            std::map<Outcome, Rational> next;
            for (const auto &[code, p] : part) {
                Outcome spread = 0;
                size_t k = c.outputs.size();
                for (size_t o = 0; o < k; ++o) {
                    if (code >> (k - 1 - o) & 1u) {
                        spread = with_bit(spread, n, static_cast<unsigned>(c.outputs[o]));
                    }
                }
                for (const auto &[x, q] : acc) {
                    next[x | spread] += q * p;
                }
            }
            acc = std::move(next);
        }
        for (const auto &[x, q] : acc) {
            total[x] += q;
        }
    }
    return ExactDistribution::bits(n, total);
}

/// Type of a neighborhood marginal relative to the biased product target.
enum class NeighborhoodType { type1, type2 };

struct NeighborhoodReport {
    size_t center = 0;
    std::vector<size_t> members;
    size_t size = 0;
    ExactDistribution marginal;
    Rational distance_to_target;
    NeighborhoodType type = NeighborhoodType::type2;
    Rational epsilon;
};

/// Type-1 exactly when the marginal on N(i) is farther than epsilon from
/// the gamma-biased product; a tie counts as close.
inline std::vector<NeighborhoodReport> classify_neighborhoods(const LocalFunction &f, const Rational &gamma,
                                                              const Rational &epsilon,
                                                              const std::optional<InputBiases> &biases = {}) {
    InputBiases b = biases ? *biases : uniform_biases(f.m());
    std::vector<NeighborhoodReport> out;
    auto hoods = f.neighborhoods();
    for (size_t i = 0; i < f.n(); ++i) {
        NeighborhoodReport r;
        r.center = i;
        r.members = hoods[i];
        r.size = r.members.size();
        r.marginal = output_distribution_enum(f, b, r.members);
        r.distance_to_target = tvd(r.marginal, build_biased(static_cast<unsigned>(r.size), gamma));
        r.type = r.distance_to_target > epsilon ? NeighborhoodType::type1 : NeighborhoodType::type2;
        r.epsilon = epsilon;
        out.push_back(std::move(r));
    }
    return out;
}

/// E over the inputs read by N(l) but not by l of (max_c Pr[sum over N(l) = c])^2,
/// with the sum taken mod `modulus` when it is non-zero.
inline Rational resampling_stat_exact(const LocalFunction &f, size_t ell, unsigned modulus, const InputBiases &biases) {
    detail::check_biases(f, biases);
    if (ell >= f.n()) {
        throw ArgumentError("output index out of range");
    }
    auto members = f.dependency_graph().neighborhood(ell);
    auto closure = detail::inputs_read(f, members);
    const auto &own_vec = f.gate(ell).inputs();
    std::set<size_t> own(own_vec.begin(), own_vec.end());
    std::vector<size_t> outside, inside(own.begin(), own.end());
    for (size_t j : closure) {
        if (!own.count(j)) {
            outside.push_back(j);
        }
    }
    unsigned cap = enumeration_cap_bits();
    if (outside.size() > cap || inside.size() > cap) {
        throw CapacityError("neighborhood closure exceeds the enumeration cap");
    }
    std::vector<std::uint8_t> fixed(f.m(), 0);
    Rational expect = 0;
    const std::uint64_t patterns = std::uint64_t{1} << outside.size();
    for (std::uint64_t a = 0; a < patterns; ++a) {
        Rational w = 1;
        for (size_t t = 0; t < outside.size(); ++t) {
            fixed[outside[t]] = static_cast<std::uint8_t>(a >> t & 1u);
            w *= fixed[outside[t]] ? biases[outside[t]] : Rational(1 - biases[outside[t]]);
        }
        if (w == 0) {
            continue;
        }
        auto law = detail::enumerate_outputs(f, members, inside, fixed, biases);
        std::map<unsigned, Rational> sums;
        for (const auto &[code, p] : law) {
            unsigned s = weight(code);
            sums[modulus ? s % modulus : s] += p;
        }
        Rational best = 0;
        for (const auto &[c, p] : sums) {
            best = std::max(best, p);
        }
        expect += w * best * best;
    }
    return expect;
}

inline double resampling_stat(const LocalFunction &f, size_t ell, unsigned modulus, const InputBiases &biases) {
    return to_double(resampling_stat_exact(f, ell, modulus, biases));
}

/// LOCALFN v1 text format; indices are 1-based in the file.
inline void write_local_function(std::ostream &os, const LocalFunction &f) {
    os << "LOCALFN v1 n=" << f.n() << " m=" << f.m() << "\n";
    for (size_t i = 0; i < f.n(); ++i) {
        const auto &g = f.gate(i);
        os << "bit " << (i + 1) << ": inputs=";
        for (size_t t = 0; t < g.fan_in(); ++t) {
            os << (t ? "," : "") << (g.inputs()[t] + 1);
        }
        os << " table=";
        for (auto b : g.table()) {
            os << static_cast<char>('0' + b);
        }
        os << "\n";
    }
}

inline LocalFunction read_local_function(std::istream &is) {
    std::string line;
    if (!std::getline(is, line)) {
        throw ParseError("missing LOCALFN header");
    }
    std::istringstream hs(line);
    std::string tag, ver, nf, mf, extra;
    hs >> tag >> ver >> nf >> mf;
    if (tag != "LOCALFN" || ver != "v1" || (hs >> extra)) {
        throw ParseError("bad LOCALFN header '" + line + "'");
    }
    size_t n = detail::parse_count_field(nf, "n");
    size_t m = detail::parse_count_field(mf, "m");
    std::vector<std::optional<Gate>> gates(n);
    while (std::getline(is, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        auto colon = line.find(':');
        auto ipos = line.find("inputs=");
        auto tpos = line.find(" table=");
        if (line.rfind("bit ", 0) != 0 || colon == std::string::npos || ipos == std::string::npos ||
            tpos == std::string::npos || ipos < colon || tpos < ipos) {
            throw ParseError("bad LOCALFN record '" + line + "'");
        }
        auto idx = detail::parse_index_list(line.substr(4, colon - 4), n);
        if (idx.size() != 1 || gates[idx[0]]) {
            throw ParseError("bad or repeated bit index in '" + line + "'");
        }
        auto inputs = detail::parse_index_list(line.substr(ipos + 7, tpos - ipos - 7), m);
        std::string tab = line.substr(tpos + 7);
        while (!tab.empty() && (tab.back() == '\r' || tab.back() == ' ')) {
            tab.pop_back();
        }
        if (inputs.size() > kTableFanIn) {
            throw CapacityError("table fan-in too large");
        }
        if (tab.size() != (size_t{1} << inputs.size())) {
            throw ParseError("table length mismatch in '" + line + "'");
        }
        std::vector<std::uint8_t> bits;
        for (char c : tab) {
            if (c != '0' && c != '1') {
                throw ParseError("bad table character in '" + line + "'");
            }
            bits.push_back(static_cast<std::uint8_t>(c - '0'));
        }
        try {
            gates[idx[0]] = Gate(std::move(inputs), std::move(bits));
        } catch (const ArgumentError &e) {
            throw ParseError(e.what());
        }
    }
    std::vector<Gate> out;
    for (size_t i = 0; i < n; ++i) {
        if (!gates[i]) {
            throw ParseError("bit " + std::to_string(i + 1) + " missing");
        }
        out.push_back(*gates[i]);
    }
    return LocalFunction(m, std::move(out));
}

}  // namespace slicekit
