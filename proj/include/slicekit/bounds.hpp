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
#include <complex>
#include <limits>
#include <map>
#include <numbers>
#include <numeric>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "slicekit/core.hpp"
#include "slicekit/distribution.hpp"
#include "slicekit/elimination.hpp"
#include "slicekit/numeric.hpp"

namespace slicekit {

/// Slack for comparing a double bound against an exact quantity.
inline constexpr double kBoundSlack = 1e-12;

/// Evaluated bound with its hypotheses. A condition is true, false, or
/// unknown (nullopt) when it depends on a constant the caller did not give.
struct BoundReport {
    std::string theorem;
    std::vector<std::pair<std::string, std::string>> params;
    double value = 0;
    std::vector<std::pair<std::string, std::optional<bool>>> conditions;
    bool vacuous = false;
    /// ln(1 - value), kept when value is within 1e-12 of 1.
    std::optional<double> log1m;

    bool conditions_met() const {
        for (const auto &[name, ok] : conditions) {
            if (!ok || !*ok) {
                return false;
            }
        }
        return true;
    }

    bool applicable() const { return conditions_met() && !vacuous; }
};

namespace detail {

/// Report for a lower bound of the form value = 1 - exp(ln_a) - tail.
inline BoundReport lower_bound_report(std::string name, double ln_a, double tail) {
    BoundReport r;
    r.theorem = std::move(name);
    double a = std::exp(ln_a);
    r.value = 1.0 - a - tail;
    r.vacuous = !(r.value > 0);
    if (tail == 0 && a < 1e-12) {
        r.log1m = ln_a;
    }
    return r;
}

inline std::string dstr(double v) {
    return decimal_str(v);
}

inline double residue_tail(unsigned q, const std::set<unsigned> &lam) {
    if (q % 2 == 1) {
        return static_cast<double>(lam.size()) / q;
    }
    size_t even = 0, odd = 0;
    for (unsigned c : lam) {
        (c % 2 ? odd : even)++;
    }
    return 2.0 * static_cast<double>(std::max(even, odd)) / q;
}

inline std::string residues_str(const std::set<unsigned> &lam) {
    std::string s = "{";
    bool first = true;
    for (unsigned c : lam) {
        s += (first ? "" : ",") + std::to_string(c);
        first = false;
    }
    return s + "}";
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Theorem-level lower bounds
// ---------------------------------------------------------------------------

/// Biased target: 1 - 4 exp(-n delta^(40d)).
inline BoundReport thm_biased_bound(unsigned n, unsigned d, double delta) {
    double ln_a = std::log(4.0) - static_cast<double>(n) * std::exp(40.0 * d * std::log(delta));
    auto r = detail::lower_bound_report("biased", ln_a, 0);
    r.params = {{"n", std::to_string(n)}, {"d", std::to_string(d)}, {"delta", detail::dstr(delta)}};
    r.conditions = {{"d >= 1", d >= 1},
                    {"0 < delta <= 2^(-d-1)", delta > 0 && delta <= std::ldexp(1.0, -static_cast<int>(d) - 1)}};
    return r;
}

/// Single slice with non-dyadic density: 1 - 4 sqrt(2n) exp(-n delta^(40d)).
inline BoundReport thm_nondyadic_bound(unsigned n, unsigned d, double delta) {
    double ln_a = std::log(4.0) + 0.5 * std::log(2.0 * n) - static_cast<double>(n) * std::exp(40.0 * d * std::log(delta));
    auto r = detail::lower_bound_report("nondyadic_slice", ln_a, 0);
    r.params = {{"n", std::to_string(n)}, {"d", std::to_string(d)}, {"delta", detail::dstr(delta)}};
    r.conditions = {{"d >= 1", d >= 1},
                    {"0 < delta <= 2^(-d-1)", delta > 0 && delta <= std::ldexp(1.0, -static_cast<int>(d) - 1)}};
    return r;
}

/// Single slice: 1 - theta/sqrt(n), under d <= log*(theta)/60,
/// log*(1/gamma) <= log*(theta)/2 and theta >= kappa.
inline BoundReport thm_slice_bound(unsigned n, unsigned d, unsigned k, double theta,
                                   std::optional<double> kappa_const = {}) {
    BoundReport r;
    r.theorem = "slice";
    r.value = 1.0 - theta / std::sqrt(static_cast<double>(n));
    r.vacuous = !(r.value > 0);
    r.params = {{"n", std::to_string(n)}, {"d", std::to_string(d)}, {"k", std::to_string(k)}, {"theta", detail::dstr(theta)}};
    unsigned ls_theta = log_star(theta);
    bool k_ok = k >= 1 && 2 * k <= n;
    r.conditions.push_back({"1 <= k <= n/2", k_ok});
    r.conditions.push_back({"d <= log*(theta)/60", 60.0 * d <= ls_theta});
    if (k_ok) {
        unsigned ls_gamma = log_star(Rational(n, k));
        r.conditions.push_back({"log*(1/gamma) <= log*(theta)/2", 2.0 * ls_gamma <= ls_theta});
    } else {
        r.conditions.push_back({"log*(1/gamma) <= log*(theta)/2", false});
    }
    if (kappa_const) {
        r.conditions.push_back({"theta >= kappa", theta >= *kappa_const});
    } else {
        r.conditions.push_back({"theta >= kappa", std::nullopt});
    }
    return r;
}

/// Periodic slice: 1 - (6q/eta) exp(-n/(q^2 tow_2(18d))) - tail, with eta
/// exact when n <= 26 and the closed-form lower bound otherwise.
inline BoundReport thm_mod_slice_bound(unsigned n, unsigned d, unsigned q, const std::vector<unsigned> &lambda) {
    auto lam = normalize_residues(q, lambda);
    std::vector<unsigned> lv(lam.begin(), lam.end());
    double eta_v;
    std::string eta_kind;
    if (n <= kMaxDistBits) {
        eta_v = to_double(eta(n, q, lv));
        eta_kind = "exact";
    } else {
        eta_v = eta_lower(n, q);
        eta_kind = "lower";
    }
    double ln_tower = log2_tow2(18 * d) * std::numbers::ln2;
    double ln_x = std::log(static_cast<double>(n)) - 2.0 * std::log(static_cast<double>(q)) - ln_tower;
    double x = std::exp(ln_x);
    double ln_a = std::log(6.0 * q) - std::log(eta_v) - x;
    double tail = detail::residue_tail(q, lam);
    auto r = detail::lower_bound_report("mod_slice", ln_a, tail);
    r.params = {{"n", std::to_string(n)},
                {"d", std::to_string(d)},
                {"q", std::to_string(q)},
                {"Lambda", detail::residues_str(lam)},
                {"eta", detail::dstr(eta_v)},
                {"eta_source", eta_kind}};
    r.conditions = {{"q >= 3", q >= 3}};
    return r;
}

/// The two alternatives for structured circuits: `type1` is a distance lower
/// bound, `type2` caps the probability of hitting the target support.
struct BranchBounds {
    BoundReport type1;
    BoundReport type2;
};

inline BranchBounds prop_slice_bounds(unsigned n, double r, double t, double gamma, double C) {
    BranchBounds b;
    double ln_a = std::log(C) + 0.5 * std::log(static_cast<double>(n)) - gamma * gamma * r / (C * t);
    b.type1 = detail::lower_bound_report("slice_structured_type1", ln_a, 0);
    b.type2.theorem = "slice_structured_type2";
    b.type2.value = C * std::pow(t, 0.25) / std::sqrt(gamma * r);
    b.type2.vacuous = !(b.type2.value < 1);
    for (auto *rep : {&b.type1, &b.type2}) {
        rep->params = {{"n", std::to_string(n)}, {"r", detail::dstr(r)}, {"t", detail::dstr(t)},
                       {"gamma", detail::dstr(gamma)}, {"C", detail::dstr(C)}};
        rep->conditions = {{"r >= 1", r >= 1}, {"t >= 1", t >= 1}, {"C >= 1", C >= 1}};
    }
    return b;
}

inline BranchBounds prop_mod_bounds(unsigned n, double r, double t, unsigned q, const std::vector<unsigned> &lambda) {
    auto lam = normalize_residues(q, lambda);
    std::vector<unsigned> lv(lam.begin(), lam.end());
    double eta_v = n <= kMaxDistBits ? to_double(eta(n, q, lv)) : eta_lower(n, q);
    BranchBounds b;
    double ln_r = std::log(r);
    double e1 = std::exp((-28.0 * t + 19.0) * std::numbers::ln2 + ln_r);
    b.type1 = detail::lower_bound_report("mod_structured_type1", std::log(2.0 / eta_v) - e1, 0);
    double e2 = std::exp((-14.0 * t + 10.0) * std::numbers::ln2 + ln_r) / (static_cast<double>(q) * q);
    b.type2.theorem = "mod_structured_type2";
    b.type2.value = 2.0 * q * std::exp(-e2) + detail::residue_tail(q, lam);
    b.type2.vacuous = !(b.type2.value < 1);
    for (auto *rep : {&b.type1, &b.type2}) {
        rep->params = {{"n", std::to_string(n)}, {"r", detail::dstr(r)}, {"t", detail::dstr(t)},
                       {"q", std::to_string(q)}, {"Lambda", detail::residues_str(lam)}, {"eta", detail::dstr(eta_v)}};
        rep->conditions = {{"r >= 1", r >= 1}, {"t >= 1", t >= 1}, {"q >= 3", q >= 3}};
    }
    return b;
}

// ---------------------------------------------------------------------------
// Parameter schedules fed into graph elimination
// ---------------------------------------------------------------------------

enum class ScheduleKind { biased, slice, mod };

struct ScheduleParams {
    ScheduleKind kind = ScheduleKind::biased;
    /// Vertex flavor (biased): exact beta and lambda.
    Rational beta = 0;
    Rational lambda = 0;
    /// Neighborhood flavor: lambda = kappa = tow_2(tower_height).
    unsigned tower_height = 0;
    NeighborhoodParams neigh;
};

inline ScheduleParams schedule_params(ScheduleKind kind, unsigned d, const Rational &gamma, double C = 1) {
    ScheduleParams s;
    s.kind = kind;
    if (d < 1) {
        throw ArgumentError("schedule needs d >= 1");
    }
    if (kind == ScheduleKind::biased) {
        Rational e = err(gamma, d);
        if (e == 0) {
            throw ArgumentError("gamma is dyadic at precision d: err(gamma, d) = 0");
        }
        s.beta = Rational(4) / (e * e);
        Rational base = Rational(4 * d) * s.beta;
        s.lambda = 1;
        for (unsigned i = 0; i < 2 * d + 1; ++i) {
            s.lambda *= base;
        }
        return s;
    }
    double ln2 = std::numbers::ln2;
    if (kind == ScheduleKind::slice) {
        if (gamma <= 0 || gamma > Rational(1, 2)) {
            throw ArgumentError("slice schedule needs gamma in (0, 1/2]");
        }
        double g = to_double(gamma);
        s.tower_height = 20 * d + log_star(Rational(1) / gamma) + static_cast<unsigned>(std::ceil(C));
        s.neigh.F = [C, g](double x) { return 2.0 * C * x / (g * g); };
        s.neigh.ln_H = [ln2](double ln_x) { return std::exp(std::exp(ln_x) * ln2) * ln2; };
        s.neigh.L = 10.0 * std::log2(static_cast<double>(d)) + 30.0 * std::log2(1.0 / g) + 2.0 * std::log2(C);
        s.neigh.description = "F(x)=2Cx/gamma^2, H(x)=2^(2^x)";
    } else {
        s.tower_height = 16 * d;
        s.neigh.F = [](double x) { return std::exp2(28.0 * x - 18.0); };
        s.neigh.ln_H = [ln2](double ln_x) { return std::exp(std::exp(std::exp(ln_x) * ln2) * ln2) * ln2; };
        s.neigh.L = 10.0 * d;
        s.neigh.description = "F(x)=2^(28x-18), H(x)=2^(2^(2^x))";
    }
    double ln_tow = log2_tow2(s.tower_height) * ln2;
    s.neigh.ln_lambda = ln_tow;
    s.neigh.ln_kappa = ln_tow;
    return s;
}

// ---------------------------------------------------------------------------
// Modular local limit bounds
// ---------------------------------------------------------------------------

/// Finite integer-valued law.
using IntDistribution = std::map<long long, Rational>;

inline long long mod_floor(long long x, long long q) {
    long long r = x % q;
    return r < 0 ? r + q : r;
}

/// max_x Pr[X = x (mod r)].
inline Rational max_residue_mass(const IntDistribution &X, unsigned r) {
    std::map<long long, Rational> by;
    for (const auto &[x, p] : X) {
        by[mod_floor(x, r)] += p;
    }
    Rational best = 0;
    for (const auto &[c, p] : by) {
        best = std::max(best, p);
    }
    return best;
}

/// Exact Pr[sum of independent X_j mod q lies in Lambda].
inline Rational mod_hit_probability(unsigned q, const std::vector<unsigned> &lambda, const std::vector<IntDistribution> &vars) {
    auto lam = normalize_residues(q, lambda);
    std::vector<Rational> law(q, 0);
    law[0] = 1;
    for (const auto &X : vars) {
        std::vector<Rational> next(q, 0);
        for (unsigned c = 0; c < q; ++c) {
            if (law[c] == 0) {
                continue;
            }
            for (const auto &[x, p] : X) {
                next[mod_floor(static_cast<long long>(c) + x, q)] += law[c] * p;
            }
        }
        law = std::move(next);
    }
    Rational hit = 0;
    for (unsigned c : lam) {
        hit += law[c];
    }
    return hit;
}

/// Smallest sum of (1 - p_{r,j}) over divisors r >= 3 of q.
inline Rational mod_llt_spread(unsigned q, const std::vector<IntDistribution> &vars) {
    std::optional<Rational> best;
    for (unsigned r = 3; r <= q; ++r) {
        if (q % r) {
            continue;
        }
        Rational s = 0;
        for (const auto &X : vars) {
            s += 1 - max_residue_mass(X, r);
        }
        if (!best || s < *best) {
            best = s;
        }
    }
    return best ? *best : Rational(0);
}

/// Upper bound q e^(-2L/q^2) + tail on the hitting probability.
inline BoundReport mod_llt_bound(unsigned q, const std::vector<unsigned> &lambda, double L) {
    if (L < 0) {
        throw ArgumentError("mod_llt_bound needs L >= 0");
    }
    auto lam = normalize_residues(q, lambda);
    BoundReport r;
    r.theorem = "mod_llt";
    r.value = q * std::exp(-2.0 * L / (static_cast<double>(q) * q)) + detail::residue_tail(q, lam);
    r.vacuous = !(r.value < 1);
    r.params = {{"q", std::to_string(q)}, {"Lambda", detail::residues_str(lam)}, {"L", detail::dstr(L)}};
    r.conditions = {{"q >= 3", q >= 3}, {"L > 0", L > 0}};
    return r;
}

inline BoundReport mod_llt_bound(unsigned q, const std::vector<unsigned> &lambda, const std::vector<IntDistribution> &vars) {
    return mod_llt_bound(q, lambda, to_double(mod_llt_spread(q, vars)));
}

inline std::complex<double> root_of_unity(unsigned q, long long e) {
    double ang = 2.0 * std::numbers::pi * static_cast<double>(mod_floor(e, q)) / q;
    return {std::cos(ang), std::sin(ang)};
}

/// (1/q) sum_a |sum_{c in Lambda} w^(-ac)| exp(-2 sum_j (1 - p_{q/gcd(a,q),j}) / q^2).
inline double mod_llt_full(unsigned q, const std::vector<unsigned> &lambda, const std::vector<IntDistribution> &vars) {
    if (q < 2) {
        throw ArgumentError("mod_llt_full needs q >= 2");
    }
    auto lam = normalize_residues(q, lambda);
    std::map<unsigned, double> spread;
    double total = 0;
    for (unsigned a = 0; a < q; ++a) {
        unsigned s = std::gcd(a, q);
        unsigned r = q / s;
        if (!spread.count(r)) {
            Rational acc = 0;
            for (const auto &X : vars) {
                acc += 1 - max_residue_mass(X, r);
            }
            spread[r] = to_double(acc);
        }
        std::complex<double> ch = 0;
        for (unsigned c : lam) {
            ch += root_of_unity(q, -static_cast<long long>(a) * c);
        }
        total += std::abs(ch) * std::exp(-2.0 * spread[r] / (static_cast<double>(q) * q));
    }
    return total / q;
}

struct RootPowerCheck {
    double lhs = 0;
    double rhs = 0;
    bool holds() const { return lhs <= rhs + kBoundSlack; }
};

/// |E[w_q^(aX)]| against 1 - 2(1 - p_{q/s})/q^2 with s = gcd(a, q).
inline RootPowerCheck root_power_check(const IntDistribution &X, unsigned q, unsigned a) {
    if (q < 2) {
        throw ArgumentError("root_power_check needs q >= 2");
    }
    a %= q;
    std::complex<double> e = 0;
    for (const auto &[x, p] : X) {
        e += to_double(p) * root_of_unity(q, static_cast<long long>(a) * x);
    }
    unsigned s = std::gcd(a, q);
    RootPowerCheck c;
    c.lhs = std::abs(e);
    c.rhs = 1.0 - 2.0 * to_double(1 - max_residue_mass(X, q / s)) / (static_cast<double>(q) * q);
    return c;
}

/// Weight law of t gamma-biased bits as an integer distribution.
inline IntDistribution biased_weight_law(unsigned t, const Rational &gamma) {
    IntDistribution d;
    for (unsigned w = 0; w <= t; ++w) {
        Rational p = Rational(binomial(t, w));
        for (unsigned i = 0; i < w; ++i) {
            p *= gamma;
        }
        for (unsigned i = w; i < t; ++i) {
            p *= 1 - gamma;
        }
        if (p != 0) {
            d[w] = p;
        }
    }
    return d;
}

struct GammaShift {
    ExactDistribution d0;
    ExactDistribution d1;
    Rational exact_tvd = 0;
    double bound = 0;
    bool holds() const { return to_double(exact_tvd) + kBoundSlack >= bound; }
};

/// Laws of |V| mod q and 1 + |V| mod q for V ~ U_gamma^(t-1), against the
/// lower bound (2/q) 2^(-50 gamma (t-1)/q^2).
inline GammaShift gamma_shift_bound(unsigned q, const Rational &gamma, unsigned t) {
    if (q < 3) {
        throw ArgumentError("gamma_shift_bound needs q >= 3");
    }
    if (t < 1 || gamma <= 0 || gamma > Rational(1, 2)) {
        throw ArgumentError("gamma_shift_bound needs t >= 1 and gamma in (0, 1/2]");
    }
    std::map<Outcome, Rational> m0, m1;
    for (const auto &[w, p] : biased_weight_law(t - 1, gamma)) {
        m0[static_cast<Outcome>(w % q)] += p;
        m1[static_cast<Outcome>((w + 1) % q)] += p;
    }
    GammaShift g;
    g.d0 = ExactDistribution::labels(m0);
    g.d1 = ExactDistribution::labels(m1);
    g.exact_tvd = tvd(g.d0, g.d1);
    g.bound = 2.0 / q * std::exp2(-50.0 * to_double(gamma) * (t - 1) / (static_cast<double>(q) * q));
    return g;
}

// ---------------------------------------------------------------------------
// Coupling anticoncentration
// ---------------------------------------------------------------------------

struct CouplingCheck {
    Rational exact_prob = 0;
    double bound = 0;
    Rational eps = 0;
    double eps_cap = 0;
    bool independence = false;
    bool same_marginals = false;
    bool eps_ok = false;
    bool q_ok = false;
    bool gamma_ok = false;

    bool hypotheses_met() const { return independence && same_marginals && eps_ok && q_ok && gamma_ok; }
    bool holds() const { return !hypotheses_met() || to_double(exact_prob) <= bound + kBoundSlack; }
};

/// The joint law is over 2t bits laid out as X, Y (t-1 bits), Z, W (t-1 bits).
inline CouplingCheck coupling_bound_check(const ExactDistribution &joint, unsigned t, const Rational &gamma, unsigned q) {
    if (t < 1 || joint.kind() != OutcomeKind::bits || joint.width() != 2 * t) {
        throw ArgumentError("coupling check needs a law over 2t bits");
    }
    std::vector<unsigned> X{0}, XY, Z{t}, ZW;
    for (unsigned i = 0; i < t; ++i) {
        XY.push_back(i);
        ZW.push_back(t + i);
    }
    auto join = [](std::vector<unsigned> a, const std::vector<unsigned> &b) {
        a.insert(a.end(), b.begin(), b.end());
        return a;
    };
    auto independent = [&](const std::vector<unsigned> &A, const std::vector<unsigned> &B) {
        auto ab = marginal(joint, join(A, B));
        auto pa = marginal(joint, A);
        auto pb = marginal(joint, B);
        return ab == product({pa, pb});
    };
    CouplingCheck c;
    c.independence = independent(X, ZW) && independent(Z, XY);
    auto mxy = marginal(joint, XY);
    auto mzw = marginal(joint, ZW);
    c.same_marginals = mxy == mzw;
    c.eps = tvd(mxy, build_biased(t, gamma));
    double g = to_double(gamma);
    double decay = std::exp2(-50.0 * g * (t - 1) / (static_cast<double>(q) * q));
    c.eps_cap = g / (4.0 * q) * decay;
    c.eps_ok = to_double(c.eps) <= c.eps_cap;
    c.q_ok = q >= std::min(3u, t + 1);
    c.gamma_ok = gamma > 0 && gamma <= Rational(1, 2);
    c.bound = 1.0 - g / (2.0 * q) * decay;
    c.exact_prob = joint.probability([&](Outcome v) {
        unsigned a = 0, b = 0;
        for (unsigned i = 0; i < t; ++i) {
            a += bit_of(v, 2 * t, i);
            b += bit_of(v, 2 * t, t + i);
        }
        return a % q == b % q;
    });
    return c;
}

/// (X, X^B, Z, Z^B) with X, Z, B independent fair bits, t = 2.
inline ExactDistribution coupling_negative_control() {
    std::map<Outcome, Rational> m;
    for (unsigned x = 0; x < 2; ++x) {
        for (unsigned z = 0; z < 2; ++z) {
            for (unsigned b = 0; b < 2; ++b) {
                Outcome v = (Outcome{x} << 3) | (Outcome{x ^ b} << 2) | (Outcome{z} << 1) | (z ^ b);
                m[v] += Rational(1, 8);
            }
        }
    }
    return ExactDistribution::bits(4, m);
}

// ---------------------------------------------------------------------------
// Randomized lemma instances
// ---------------------------------------------------------------------------

struct LemmaInstance {
    bool holds = true;
    std::string detail;
};

struct LemmaSuiteResult {
    std::string name;
    size_t instances = 0;
    size_t violations = 0;
    std::string first_violation;
};

namespace detail {

inline unsigned uniform_int(std::mt19937_64 &rng, unsigned lo, unsigned hi) {
    return std::uniform_int_distribution<unsigned>(lo, hi)(rng);
}

/// Random law on [0, size) with integer weights in [0, 9], at least one positive.
inline std::vector<Rational> random_masses(std::mt19937_64 &rng, size_t size, bool full_support = false) {
    std::vector<unsigned> w(size);
    unsigned total = 0;
    while (total == 0) {
        total = 0;
        for (auto &x : w) {
            x = uniform_int(rng, full_support ? 1 : 0, 9);
            total += x;
        }
    }
    std::vector<Rational> out;
    for (unsigned x : w) {
        out.emplace_back(x, total);
    }
    return out;
}

inline ExactDistribution random_labels(std::mt19937_64 &rng, size_t size, bool full_support = false) {
    auto w = random_masses(rng, size, full_support);
    std::map<Outcome, Rational> m;
    for (size_t i = 0; i < size; ++i) {
        m[i] = w[i];
    }
    return ExactDistribution::labels(m);
}

}  // namespace detail

/// Conditioning two eps-close laws on an event moves them at most 2 eps / Q(E) apart.
inline LemmaInstance mult_apx_instance(std::mt19937_64 &rng) {
    for (;;) {
        size_t D = detail::uniform_int(rng, 2, 8);
        auto P = detail::random_labels(rng, D);
        auto Q = detail::random_labels(rng, D);
        std::vector<char> inE(D);
        for (auto &e : inE) {
            e = static_cast<char>(detail::uniform_int(rng, 0, 1));
        }
        auto event = [&](Outcome x) { return inE[x] != 0; };
        Rational qe = Q.probability(event);
        if (qe == 0 || P.probability(event) == 0) {
            continue;
        }
        unsigned R = detail::uniform_int(rng, 1, static_cast<unsigned>(D));
        std::vector<Outcome> f(D);
        for (auto &v : f) {
            v = detail::uniform_int(rng, 0, R - 1);
        }
        Rational eps = tvd(P, Q);
        auto fP = push_forward(condition(P, event), OutcomeKind::labels, 0, [&](Outcome x) { return f[x]; });
        auto fQ = push_forward(condition(Q, event), OutcomeKind::labels, 0, [&](Outcome x) { return f[x]; });
        Rational lhs = tvd(fP, fQ);
        Rational rhs = 2 * eps / qe;
        LemmaInstance r;
        r.holds = lhs <= rhs;
        r.detail = "D=" + std::to_string(D) + " lhs=" + rational_str(lhs) + " rhs=" + rational_str(rhs);
        return r;
    }
}

namespace detail {

/// Law on n bits whose marginal on S is the product of Bernoulli(params),
/// coupled to the other coordinates through a random kernel.
inline ExactDistribution product_on_subset(std::mt19937_64 &rng, unsigned n, const std::vector<unsigned> &S,
                                           const std::vector<Rational> &params) {
    std::vector<unsigned> rest;
    for (unsigned i = 0; i < n; ++i) {
        if (std::find(S.begin(), S.end(), i) == S.end()) {
            rest.push_back(i);
        }
    }
    std::map<Outcome, Rational> m;
    for (Outcome xs = 0; xs < (Outcome{1} << S.size()); ++xs) {
        Rational ps = 1;
        for (size_t k = 0; k < S.size(); ++k) {
            ps *= (xs >> k & 1u) ? params[k] : Rational(1 - params[k]);
        }
        auto kernel = random_masses(rng, size_t{1} << rest.size(), true);
        for (Outcome xr = 0; xr < (Outcome{1} << rest.size()); ++xr) {
            Outcome x = 0;
            for (size_t k = 0; k < S.size(); ++k) {
                if (xs >> k & 1u) {
                    x = with_bit(x, n, S[k]);
                }
            }
            for (size_t k = 0; k < rest.size(); ++k) {
                if (xr >> k & 1u) {
                    x = with_bit(x, n, rest[k]);
                }
            }
            m[x] += ps * kernel[xr];
        }
    }
    return ExactDistribution::bits(n, m);
}

inline bool marginal_is_product(const ExactDistribution &p, const std::vector<unsigned> &S) {
    std::vector<ExactDistribution> singles;
    for (unsigned i : S) {
        singles.push_back(marginal(p, {i}));
    }
    return marginal(p, S) == product(singles);
}

}  // namespace detail

/// Product-marginal lemma: tvd(P, Q) >= 1 - 2 exp(-eps^2 s/2)/eta.
inline LemmaInstance product_lemma_instance(std::mt19937_64 &rng) {
    for (;;) {
        unsigned n = detail::uniform_int(rng, 2, 6);
        std::vector<unsigned> S;
        for (unsigned i = 0; i < n; ++i) {
            if (detail::uniform_int(rng, 0, 3) != 0) {
                S.push_back(i);
            }
        }
        if (S.empty()) {
            continue;
        }
        std::vector<Rational> pp, wp;
        for (size_t k = 0; k < S.size(); ++k) {
            pp.emplace_back(detail::uniform_int(rng, 1, 7), 8);
            wp.emplace_back(detail::uniform_int(rng, 1, 7), 8);
        }
        auto P = detail::product_on_subset(rng, n, S, pp);
        auto W = detail::product_on_subset(rng, n, S, wp);
        ExactDistribution Q = W;
        if (detail::uniform_int(rng, 0, 1)) {
            auto w = detail::random_masses(rng, size_t{1} << n);
            std::map<Outcome, Rational> m;
            for (size_t x = 0; x < w.size(); ++x) {
                m[x] = w[x];
            }
            Q = ExactDistribution::bits(n, m);
        }
        Rational eps = 1;
        for (unsigned i : S) {
            eps = std::min(eps, tvd(marginal(P, {i}), marginal(W, {i})));
        }
        if (eps == 0 || !detail::marginal_is_product(P, S) || !detail::marginal_is_product(W, S)) {
            continue;
        }
        std::optional<Rational> eta;
        for (const auto &[x, q] : Q.entries()) {
            Rational ratio = W.mass(x) / q;
            if (!eta || ratio < *eta) {
                eta = ratio;
            }
        }
        if (!eta || *eta == 0) {
            continue;
        }
        double e = to_double(eps);
        double rhs = 1.0 - 2.0 * std::exp(-e * e * static_cast<double>(S.size()) / 2.0) / to_double(*eta);
        double lhs = to_double(tvd(P, Q));
        LemmaInstance r;
        r.holds = lhs + kBoundSlack >= rhs;
        r.detail = "n=" + std::to_string(n) + " s=" + std::to_string(S.size()) + " lhs=" + decimal_str(lhs) +
                   " rhs=" + decimal_str(rhs);
        return r;
    }
}

/// Convex-combination lemma: tvd(P, Q) >= 1 - (t+1) eps1 - eps2 - eps3.
inline LemmaInstance conditioning_lemma_instance(std::mt19937_64 &rng) {
    for (;;) {
        size_t D = detail::uniform_int(rng, 4, 10);
        auto Q = detail::random_labels(rng, D);
        std::vector<char> inE(D);
        for (auto &e : inE) {
            e = static_cast<char>(detail::uniform_int(rng, 0, 3) != 0);
        }
        auto event = [&](Outcome x) { return inE[x] != 0; };
        if (Q.probability(event) == 0) {
            continue;
        }
        unsigned t = detail::uniform_int(rng, 1, 5);
        std::vector<ExactDistribution> Ps;
        Rational eps1 = 0, eps2 = 0;
        for (unsigned i = 0; i < t; ++i) {
            bool far = detail::uniform_int(rng, 0, 1);
            std::map<Outcome, Rational> m;
            auto w = detail::random_masses(rng, D);
            // Bias the weights toward where Q is light (far) or toward not-E.
            Rational total = 0;
            for (size_t x = 0; x < D; ++x) {
                bool keep = far ? Q.mass(x) == 0 || detail::uniform_int(rng, 0, 3) == 0 : !inE[x] || detail::uniform_int(rng, 0, 5) == 0;
                if (keep) {
                    m[x] = w[x] + Rational(1, 100);
                    total += m[x];
                }
            }
            if (total == 0) {
                m[0] = 1;
                total = 1;
            }
            for (auto &[x, p] : m) {
                p /= total;
            }
            auto P = ExactDistribution::labels(m);
            if (far) {
                eps1 = std::max(eps1, 1 - tvd(P, Q));
            } else {
                eps2 = std::max(eps2, P.probability(event));
            }
            Ps.push_back(P);
        }
        Rational eps3 = 1 - Q.probability(event);
        auto alpha = detail::random_masses(rng, t);
        auto P = mix(alpha, Ps);
        Rational lhs = tvd(P, Q);
        Rational rhs = 1 - Rational(t + 1) * eps1 - eps2 - eps3;
        LemmaInstance r;
        r.holds = lhs >= rhs;
        r.detail = "t=" + std::to_string(t) + " lhs=" + rational_str(lhs) + " rhs=" + rational_str(rhs);
        return r;
    }
}

/// Random joint law of (X, Y, Z, W) meeting the coupling hypotheses: X and Z
/// are private bits, each coordinate pair (Y_i, W_i) shares a coin B_i.
inline ExactDistribution random_coupling(std::mt19937_64 &rng, unsigned t, const Rational &gamma) {
    Rational tiny = inv_pow2(30);
    Rational px = gamma;
    switch (detail::uniform_int(rng, 0, 2)) {
    case 1:
        px += tiny;
        break;
    case 2:
        px -= tiny;
        break;
    default:
        break;
    }
    // M[i][x][z][y][w] = sum_b Pr[B_i = b] K(y | x, b) K(w | z, b).
    using Table = std::array<std::array<std::array<std::array<Rational, 2>, 2>, 2>, 2>;
    std::vector<Table> M(t > 0 ? t - 1 : 0);
    for (auto &tab : M) {
        unsigned mode = detail::uniform_int(rng, 0, 2);
        auto k1 = [&](unsigned x, unsigned b) -> Rational {
            if (mode == 0) {
                return Rational(b);
            }
            if (mode == 1) {
                return gamma;
            }
            return Rational(b) * (1 - tiny) + tiny * Rational(x);
        };
        for (unsigned x = 0; x < 2; ++x) {
            for (unsigned z = 0; z < 2; ++z) {
                for (unsigned y = 0; y < 2; ++y) {
                    for (unsigned w = 0; w < 2; ++w) {
                        Rational s = 0;
                        for (unsigned b = 0; b < 2; ++b) {
                            Rational pb = b ? gamma : Rational(1 - gamma);
                            Rational ky = y ? k1(x, b) : Rational(1 - k1(x, b));
                            Rational kw = w ? k1(z, b) : Rational(1 - k1(z, b));
                            s += pb * ky * kw;
                        }
                        tab[x][z][y][w] = s;
                    }
                }
            }
        }
    }
    unsigned width = 2 * t;
    std::map<Outcome, Rational> m;
    for (Outcome v = 0; v < (Outcome{1} << width); ++v) {
        unsigned x = bit_of(v, width, 0);
        unsigned z = bit_of(v, width, t);
        Rational p = (x ? px : Rational(1 - px)) * (z ? px : Rational(1 - px));
        for (unsigned i = 0; i + 1 < t && p != 0; ++i) {
            p *= M[i][x][z][bit_of(v, width, 1 + i)][bit_of(v, width, t + 1 + i)];
        }
        if (p != 0) {
            m[v] = p;
        }
    }
    return ExactDistribution::bits(width, m);
}

/// One seeded coupling instance; resamples until the hypotheses hold exactly.
inline LemmaInstance coupling_lemma_instance(std::mt19937_64 &rng) {
    static const std::vector<Rational> gammas{Rational(1, 10), Rational(1, 4), Rational(3, 10), Rational(1, 3), Rational(1, 2)};
    for (;;) {
        unsigned q = detail::uniform_int(rng, 3, 5);
        unsigned t = detail::uniform_int(rng, 1, 6);
        Rational g = gammas[detail::uniform_int(rng, 0, static_cast<unsigned>(gammas.size() - 1))];
        auto joint = random_coupling(rng, t, g);
        auto c = coupling_bound_check(joint, t, g, q);
        if (!c.hypotheses_met()) {
            continue;
        }
        LemmaInstance r;
        r.holds = c.holds();
        r.detail = "q=" + std::to_string(q) + " t=" + std::to_string(t) + " gamma=" + rational_str(g) +
                   " prob=" + decimal_str(to_double(c.exact_prob)) + " bound=" + decimal_str(c.bound);
        return r;
    }
}

/// Random variable set for the modular local limit checks.
struct LltInstance {
    unsigned q = 3;
    std::vector<unsigned> lambda;
    std::vector<IntDistribution> vars;
};

inline LltInstance random_llt_instance(std::mt19937_64 &rng) {
    LltInstance in;
    in.q = detail::uniform_int(rng, 3, 6);
    for (unsigned c = 0; c < in.q; ++c) {
        if (detail::uniform_int(rng, 0, 1)) {
            in.lambda.push_back(c);
        }
    }
    if (in.lambda.empty()) {
        in.lambda.push_back(detail::uniform_int(rng, 0, in.q - 1));
    }
    unsigned n = detail::uniform_int(rng, 1, 12);
    // Even moduli sometimes get the all-even variables that make the tail sharp.
    bool even_family = in.q % 2 == 0 && detail::uniform_int(rng, 0, 3) == 0;
    for (unsigned j = 0; j < n; ++j) {
        IntDistribution X;
        if (even_family) {
            long long shift = j == 0 && detail::uniform_int(rng, 0, 1) ? 1 : 0;
            X[shift] = Rational(1, 2);
            X[2 + shift] = Rational(1, 2);
        } else {
            unsigned s = detail::uniform_int(rng, 1, 4);
            auto w = detail::random_masses(rng, s, true);
            for (unsigned k = 0; k < s; ++k) {
                X[static_cast<long long>(detail::uniform_int(rng, 0, 7)) - 2] += w[k];
            }
        }
        in.vars.push_back(std::move(X));
    }
    return in;
}

/// Checks both local limit forms on one instance.
inline LemmaInstance llt_instance_check(const LltInstance &in) {
    Rational exact = mod_hit_probability(in.q, in.lambda, in.vars);
    double full = mod_llt_full(in.q, in.lambda, in.vars);
    double e = to_double(exact);
    LemmaInstance r;
    r.holds = e <= full + kBoundSlack;
    Rational L = mod_llt_spread(in.q, in.vars);
    if (L > 0) {
        auto lem = mod_llt_bound(in.q, in.lambda, to_double(L));
        r.holds = r.holds && e <= lem.value + kBoundSlack;
        r.detail = " lemma=" + decimal_str(lem.value);
    }
    r.detail = "q=" + std::to_string(in.q) + " n=" + std::to_string(in.vars.size()) + " exact=" + decimal_str(e) +
               " full=" + decimal_str(full) + r.detail;
    return r;
}

/// Runs `trials` seeded instances of a checker.
template <typename Make>
LemmaSuiteResult run_lemma_suite(const std::string &name, size_t trials, std::uint64_t seed, Make make) {
    std::mt19937_64 rng(seed);
    LemmaSuiteResult res;
    res.name = name;
    for (size_t i = 0; i < trials; ++i) {
        LemmaInstance in = make(rng);
        ++res.instances;
        if (!in.holds) {
            if (res.violations++ == 0) {
                res.first_violation = in.detail;
            }
        }
    }
    return res;
}

/// CSV row `theorem,params...,value,vacuous,conditions`.
inline void write_bound_csv(std::ostream &os, const BoundReport &r) {
    os << r.theorem;
    for (const auto &[k, v] : r.params) {
        os << "," << k << "=" << v;
    }
    os << "," << decimal_str(r.value) << "," << (r.vacuous ? "vacuous" : "nonvacuous") << ",";
    for (size_t i = 0; i < r.conditions.size(); ++i) {
        const auto &[name, ok] = r.conditions[i];
        os << (i ? ";" : "") << name << ":" << (!ok ? "unknown" : (*ok ? "true" : "false"));
    }
    os << "\n";
}

}  // namespace slicekit
