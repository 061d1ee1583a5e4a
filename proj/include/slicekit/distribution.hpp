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
#include <functional>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "slicekit/core.hpp"

namespace slicekit {

using Outcome = std::uint64_t;

/// Bitstring outcomes are packed with x_1 as the most significant bit, so
/// numeric order on the packed value is lexicographic order on the string.
inline unsigned bit_of(Outcome x, unsigned n, unsigned i) {
    return static_cast<unsigned>((x >> (n - 1 - i)) & 1u);
}

inline Outcome with_bit(Outcome x, unsigned n, unsigned i) {
    return x | (Outcome{1} << (n - 1 - i));
}

inline unsigned weight(Outcome x) {
    return static_cast<unsigned>(std::popcount(x));
}

inline std::string bits_string(Outcome x, unsigned n) {
    std::string s(n, '0');
    for (unsigned i = 0; i < n; ++i) {
        if (bit_of(x, n, i)) {
            s[i] = '1';
        }
    }
    return s;
}

inline Outcome parse_bits(const std::string &s) {
    if (s.size() > 63) {
        throw CapacityError("bitstring too long");
    }
    Outcome x = 0;
    for (char c : s) {
        if (c != '0' && c != '1') {
            throw ParseError("bad bitstring '" + s + "'");
        }
        x = (x << 1) | static_cast<Outcome>(c == '1');
    }
    return x;
}

enum class OutcomeKind { bits, labels };

/// Finite distribution with exact rational masses. Only outcomes of positive
/// mass are stored; every other outcome of the domain has mass zero.
class ExactDistribution {
  public:
    using Entry = std::pair<Outcome, Rational>;

    ExactDistribution() : ExactDistribution(point(0, 0)) {}

    static ExactDistribution from_map(OutcomeKind kind, unsigned width, const std::map<Outcome, Rational> &m) {
        std::vector<Entry> v;
        v.reserve(m.size());
        for (const auto &[x, p] : m) {
            v.emplace_back(x, p);
        }
        return ExactDistribution(kind, width, std::move(v));
    }

    static ExactDistribution bits(unsigned n, const std::map<Outcome, Rational> &m) {
        return from_map(OutcomeKind::bits, n, m);
    }

    static ExactDistribution labels(const std::map<Outcome, Rational> &m) {
        return from_map(OutcomeKind::labels, 0, m);
    }

    /// Entries must be strictly increasing by outcome.
    static ExactDistribution sorted(OutcomeKind kind, unsigned width, std::vector<Entry> entries) {
        return ExactDistribution(kind, width, std::move(entries));
    }

    static ExactDistribution point(unsigned n, Outcome x) {
        return ExactDistribution(OutcomeKind::bits, n, {{x, Rational(1)}});
    }

    static ExactDistribution point_label(Outcome x) {
        return ExactDistribution(OutcomeKind::labels, 0, {{x, Rational(1)}});
    }

    OutcomeKind kind() const { return kind_; }
    unsigned width() const { return width_; }
    const std::vector<Entry> &entries() const { return entries_; }
    size_t support_size() const { return entries_.size(); }

    Rational mass(Outcome x) const {
        auto it = std::lower_bound(entries_.begin(), entries_.end(), x,
                                   [](const Entry &e, Outcome v) { return e.first < v; });
        if (it != entries_.end() && it->first == x) {
            return it->second;
        }
        return 0;
    }

    Rational probability(const std::function<bool(Outcome)> &event) const {
        Rational s = 0;
        for (const auto &[x, p] : entries_) {
            if (event(x)) {
                s += p;
            }
        }
        return s;
    }

    std::string outcome_string(Outcome x) const {
        return kind_ == OutcomeKind::bits ? bits_string(x, width_) : std::to_string(x);
    }

    bool operator==(const ExactDistribution &o) const {
        return kind_ == o.kind_ && width_ == o.width_ && entries_ == o.entries_;
    }

  private:
    ExactDistribution(OutcomeKind kind, unsigned width, std::vector<Entry> entries)
        : kind_(kind), width_(width) {
        if (kind == OutcomeKind::bits && width > kMaxDistBits) {
            throw CapacityError("distribution over {0,1}^" + std::to_string(width) + " exceeds the " +
                                std::to_string(kMaxDistBits) + "-bit cap");
        }
        Rational total = 0;
        entries_.reserve(entries.size());
        bool first = true;
        Outcome last = 0;
        for (auto &e : entries) {
            if (e.second < 0) {
                throw ArgumentError("negative mass");
            }
            if (kind == OutcomeKind::bits && width < 64 && (e.first >> width) != 0) {
                throw DomainError("outcome outside {0,1}^" + std::to_string(width));
            }
            if (!first && last >= e.first) {
                throw ArgumentError("outcomes not strictly increasing");
            }
            first = false;
            last = e.first;
            total += e.second;
            if (e.second != 0) {
                entries_.push_back(std::move(e));
            }
        }
        if (total != 1) {
            throw ArgumentError("masses sum to " + rational_str(total) + ", not 1");
        }
    }

    OutcomeKind kind_;
    unsigned width_;
    std::vector<Entry> entries_;
};

inline void require_same_domain(const ExactDistribution &p, const ExactDistribution &q) {
    if (p.kind() != q.kind() || p.width() != q.width()) {
        throw DomainError("distributions live on different domains");
    }
}

/// Half the L1 distance.
inline Rational tvd(const ExactDistribution &p, const ExactDistribution &q) {
    require_same_domain(p, q);
    const auto &a = p.entries();
    const auto &b = q.entries();
    Rational s = 0;
    size_t i = 0, j = 0;
    while (i < a.size() || j < b.size()) {
        if (j == b.size() || (i < a.size() && a[i].first < b[j].first)) {
            s += a[i++].second;
        } else if (i == a.size() || b[j].first < a[i].first) {
            s += b[j++].second;
        } else {
            Rational d = a[i].second - b[j].second;
            s += d < 0 ? Rational(-d) : d;
            ++i;
            ++j;
        }
    }
    return s / 2;
}

/// Pushes p forward along an outcome map into a bitstring domain of width n.
inline ExactDistribution push_forward(const ExactDistribution &p, OutcomeKind kind, unsigned n,
                                      const std::function<Outcome(Outcome)> &f) {
    std::map<Outcome, Rational> m;
    for (const auto &[x, w] : p.entries()) {
        m[f(x)] += w;
    }
    return ExactDistribution::from_map(kind, n, m);
}

/// Projection onto coordinates S (0-based), kept in the given order.
inline ExactDistribution marginal(const ExactDistribution &p, const std::vector<unsigned> &S) {
    if (p.kind() != OutcomeKind::bits) {
        throw DomainError("marginal needs a bitstring distribution");
    }
    if (S.empty()) {
        throw ArgumentError("marginal over an empty index set");
    }
    std::set<unsigned> seen;
    for (unsigned i : S) {
        if (i >= p.width() || !seen.insert(i).second) {
            throw ArgumentError("marginal index out of range or repeated");
        }
    }
    unsigned n = p.width();
    unsigned k = static_cast<unsigned>(S.size());
    return push_forward(p, OutcomeKind::bits, k, [&](Outcome x) {
        Outcome y = 0;
        for (unsigned i : S) {
            y = (y << 1) | bit_of(x, n, i);
        }
        (void)k;
        return y;
    });
}

inline ExactDistribution condition(const ExactDistribution &p, const std::function<bool(Outcome)> &event) {
    Rational z = p.probability(event);
    if (z == 0) {
        throw ConditioningError("conditioning on an event of mass zero");
    }
    std::vector<ExactDistribution::Entry> v;
    for (const auto &[x, w] : p.entries()) {
        if (event(x)) {
            v.emplace_back(x, w / z);
        }
    }
    return ExactDistribution::sorted(p.kind(), p.width(), std::move(v));
}

/// Independent concatenation; the first factor supplies the leading bits.
inline ExactDistribution product(const std::vector<ExactDistribution> &ps) {
    if (ps.empty()) {
        throw ArgumentError("product of no distributions");
    }
    unsigned n = 0;
    for (const auto &p : ps) {
        if (p.kind() != OutcomeKind::bits) {
            throw DomainError("product needs bitstring distributions");
        }
        n += p.width();
    }
    if (n > kMaxDistBits) {
        throw CapacityError("product width exceeds the distribution cap");
    }
    std::vector<ExactDistribution::Entry> cur{{0, Rational(1)}};
    for (const auto &p : ps) {
        std::vector<ExactDistribution::Entry> next;
        next.reserve(cur.size() * p.support_size());
        for (const auto &[x, a] : cur) {
            for (const auto &[y, b] : p.entries()) {
                next.emplace_back((x << p.width()) | y, a * b);
            }
        }
        cur = std::move(next);
    }
    return ExactDistribution::sorted(OutcomeKind::bits, n, std::move(cur));
}

inline ExactDistribution mix(const std::vector<Rational> &weights, const std::vector<ExactDistribution> &ps) {
    if (weights.size() != ps.size() || ps.empty()) {
        throw ArgumentError("mixture needs one weight per component");
    }
    Rational total = 0;
    for (const auto &w : weights) {
        if (w < 0) {
            throw ArgumentError("negative mixture weight");
        }
        total += w;
    }
    if (total != 1) {
        throw ArgumentError("mixture weights sum to " + rational_str(total));
    }
    std::map<Outcome, Rational> m;
    for (size_t i = 0; i < ps.size(); ++i) {
        require_same_domain(ps[0], ps[i]);
        if (weights[i] == 0) {
            continue;
        }
        for (const auto &[x, p] : ps[i].entries()) {
            m[x] += weights[i] * p;
        }
    }
    return ExactDistribution::from_map(ps[0].kind(), ps[0].width(), m);
}

namespace detail {

/// All n-bit words of weight k in increasing order.
inline std::vector<Outcome> words_of_weight(unsigned n, unsigned k) {
    std::vector<Outcome> out;
    if (k > n) {
        return out;
    }
    if (k == 0) {
        out.push_back(0);
        return out;
    }
    Outcome v = (Outcome{1} << k) - 1;
    const Outcome limit = Outcome{1} << n;
    while (v < limit) {
        out.push_back(v);
        Outcome t = v | (v - 1);
        v = (t + 1) | (((~t & -~t) - 1) >> (std::countr_zero(v) + 1));
    }
    return out;
}

inline void require_bits_width(unsigned n) {
    if (n > kMaxDistBits) {
        throw CapacityError("n=" + std::to_string(n) + " exceeds the distribution cap");
    }
}

}  // namespace detail

/// Uniform over weight-k strings.
inline ExactDistribution build_slice(unsigned n, unsigned k) {
    if (k > n) {
        throw ArgumentError("slice weight exceeds length");
    }
    detail::require_bits_width(n);
    auto words = detail::words_of_weight(n, k);
    Rational each(BigInt(1), BigInt(words.size()));
    std::vector<ExactDistribution::Entry> v;
    v.reserve(words.size());
    for (Outcome w : words) {
        v.emplace_back(w, each);
    }
    return ExactDistribution::sorted(OutcomeKind::bits, n, std::move(v));
}

inline std::set<unsigned> normalize_residues(unsigned q, const std::vector<unsigned> &lambda) {
    if (q < 2) {
        throw ArgumentError("modulus must be at least 2");
    }
    std::set<unsigned> res;
    for (unsigned c : lambda) {
        res.insert(c % q);
    }
    if (res.empty()) {
        throw ArgumentError("empty residue set");
    }
    return res;
}

/// Uniform over strings whose weight mod q lies in lambda.
inline ExactDistribution build_periodic(unsigned n, unsigned q, const std::vector<unsigned> &lambda) {
    auto res = normalize_residues(q, lambda);
    detail::require_bits_width(n);
    std::vector<Outcome> all;
    for (unsigned w = 0; w <= n; ++w) {
        if (res.count(w % q)) {
            auto words = detail::words_of_weight(n, w);
            all.insert(all.end(), words.begin(), words.end());
        }
    }
    if (all.empty()) {
        throw ArgumentError("no string of length " + std::to_string(n) + " has an allowed weight");
    }
    std::sort(all.begin(), all.end());
    Rational each(BigInt(1), BigInt(all.size()));
    std::vector<ExactDistribution::Entry> v;
    v.reserve(all.size());
    for (Outcome w : all) {
        v.emplace_back(w, each);
    }
    return ExactDistribution::sorted(OutcomeKind::bits, n, std::move(v));
}

/// Product of n independent Bernoulli(gamma) bits.
inline ExactDistribution build_biased(unsigned n, const Rational &gamma) {
    if (gamma < 0 || gamma > 1) {
        throw ArgumentError("bias outside [0,1]");
    }
    detail::require_bits_width(n);
    std::vector<Rational> by_weight(n + 1);
    for (unsigned w = 0; w <= n; ++w) {
        Rational p = 1;
        for (unsigned i = 0; i < w; ++i) {
            p *= gamma;
        }
        for (unsigned i = w; i < n; ++i) {
            p *= 1 - gamma;
        }
        by_weight[w] = p;
    }
    std::vector<ExactDistribution::Entry> v;
    const Outcome size = Outcome{1} << n;
    for (Outcome x = 0; x < size; ++x) {
        const Rational &p = by_weight[weight(x)];
        if (p != 0) {
            v.emplace_back(x, p);
        }
    }
    return ExactDistribution::sorted(OutcomeKind::bits, n, std::move(v));
}

inline ExactDistribution build_uniform(unsigned n) {
    return build_biased(n, Rational(1, 2));
}

/// Writes the DIST v1 text format.
inline void write_distribution(std::ostream &os, const ExactDistribution &p) {
    if (p.kind() != OutcomeKind::bits) {
        throw DomainError("only bitstring distributions have a file format");
    }
    os << "DIST v1 n=" << p.width() << "\n";
    for (const auto &[x, w] : p.entries()) {
        os << bits_string(x, p.width()) << "," << boost::multiprecision::numerator(w) << ","
           << boost::multiprecision::denominator(w) << "\n";
    }
}

inline ExactDistribution read_distribution(std::istream &is) {
    std::string line;
    if (!std::getline(is, line)) {
        throw ParseError("missing DIST header");
    }
    unsigned n = 0;
    {
        std::istringstream hs(line);
        std::string tag, ver, nfield;
        hs >> tag >> ver >> nfield;
        if (tag != "DIST" || ver != "v1" || nfield.rfind("n=", 0) != 0) {
            throw ParseError("bad DIST header '" + line + "'");
        }
        try {
            n = static_cast<unsigned>(std::stoul(nfield.substr(2)));
        } catch (const std::exception &) {
            throw ParseError("bad DIST width '" + nfield + "'");
        }
    }
    if (n > kMaxDistBits) {
        throw CapacityError("DIST width exceeds the distribution cap");
    }
    std::map<Outcome, Rational> m;
    while (std::getline(is, line)) {
        if (line.empty()) {
            continue;
        }
        auto c1 = line.find(',');
        auto c2 = line.find(',', c1 == std::string::npos ? c1 : c1 + 1);
        if (c1 == std::string::npos || c2 == std::string::npos) {
            throw ParseError("bad DIST record '" + line + "'");
        }
        std::string bits = line.substr(0, c1);
        if (bits.size() != n) {
            throw ParseError("outcome '" + bits + "' has the wrong length");
        }
        Outcome x = parse_bits(bits);
        Rational w = parse_rational(line.substr(c1 + 1, c2 - c1 - 1) + "/" + line.substr(c2 + 1));
        if (m.count(x)) {
            throw ParseError("duplicate outcome '" + bits + "'");
        }
        m[x] = w;
    }
    try {
        return ExactDistribution::bits(n, m);
    } catch (const ArgumentError &e) {
        throw ParseError(e.what());
    }
}

}  // namespace slicekit
