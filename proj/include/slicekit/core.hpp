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

#include <cctype>
#include <cstdint>
#include <cstdlib>
#include <sstream>
#include <stdexcept>
#include <string>

#include <boost/multiprecision/cpp_int.hpp>

namespace slicekit {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

struct ArgumentError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
struct DomainError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
struct CapacityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ConditioningError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct PreconditionError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Widest bitstring domain a distribution may hold.
inline constexpr unsigned kMaxDistBits = 26;

/// Default number of input bits the enumeration paths may iterate over.
inline constexpr unsigned kDefaultCapBits = 24;

/// Enumeration cap, overridable through SLICEKIT_CAP_BITS.
inline unsigned enumeration_cap_bits() {
    if (const char *env = std::getenv("SLICEKIT_CAP_BITS")) {
        char *end = nullptr;
        unsigned long v = std::strtoul(env, &end, 10);
        if (end != env && *end == '\0' && v > 0 && v <= 40) {
            return static_cast<unsigned>(v);
        }
    }
    return kDefaultCapBits;
}

inline Rational make_rational(long long num, long long den = 1) {
    if (den == 0) {
        throw ArgumentError("zero denominator");
    }
    return Rational(BigInt(num), BigInt(den));
}

inline BigInt pow2_int(unsigned e) {
    BigInt r = 1;
    r <<= e;
    return r;
}

inline Rational pow2(unsigned e) {
    return Rational(pow2_int(e));
}

inline Rational inv_pow2(unsigned e) {
    return Rational(BigInt(1), pow2_int(e));
}

inline double to_double(const Rational &r) {
    return r.convert_to<double>();
}

inline BigInt floor_rational(const Rational &r) {
    BigInt n = boost::multiprecision::numerator(r);
    BigInt d = boost::multiprecision::denominator(r);
    BigInt q = n / d;
    if (n < 0 && q * d != n) {
        q -= 1;
    }
    return q;
}

inline BigInt ceil_rational(const Rational &r) {
    BigInt f = floor_rational(r);
    return f == r ? f : f + 1;
}

/// Smallest b >= 0 with 2^b >= x (x > 0).
inline unsigned ceil_log2(const Rational &x) {
    if (x <= 0) {
        throw ArgumentError("ceil_log2 of non-positive value");
    }
    unsigned b = 0;
    Rational p = 1;
    while (p < x) {
        p *= 2;
        ++b;
    }
    return b;
}

/// "num/den" with den 1 kept explicit.
inline std::string rational_str(const Rational &r) {
    std::ostringstream os;
    os << boost::multiprecision::numerator(r) << "/" << boost::multiprecision::denominator(r);
    return os.str();
}

/// Decimal rendering at 12 significant digits.
inline std::string decimal_str(double v) {
    std::ostringstream os;
    os.precision(12);
    os << v;
    return os.str();
}

/// Parses "a/b", "a", or a terminating decimal such as "0.25" exactly.
inline Rational parse_rational(const std::string &text) {
    std::string s = text;
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) {
        s.pop_back();
    }
    size_t start = 0;
    while (start < s.size() && std::isspace(static_cast<unsigned char>(s[start]))) {
        ++start;
    }
    s = s.substr(start);
    auto parse_int = [&](const std::string &t) {
        if (t.empty()) {
            throw ParseError("bad number '" + text + "'");
        }
        size_t i = (t[0] == '-' || t[0] == '+') ? 1 : 0;
        if (i == t.size()) {
            throw ParseError("bad number '" + text + "'");
        }
        for (size_t j = i; j < t.size(); ++j) {
            if (!std::isdigit(static_cast<unsigned char>(t[j]))) {
                throw ParseError("bad number '" + text + "'");
            }
        }
        return BigInt(t);
    };
    auto slash = s.find('/');
    if (slash != std::string::npos) {
        BigInt n = parse_int(s.substr(0, slash));
        BigInt d = parse_int(s.substr(slash + 1));
        if (d == 0) {
            throw ParseError("zero denominator in '" + text + "'");
        }
        return Rational(n, d);
    }
    auto dot = s.find('.');
    if (dot != std::string::npos) {
        std::string whole = s.substr(0, dot);
        std::string frac = s.substr(dot + 1);
        bool neg = !whole.empty() && whole[0] == '-';
        if (whole.empty() || whole == "-" || whole == "+") {
            whole += "0";
        }
        BigInt w = parse_int(whole);
        if (frac.empty()) {
            return Rational(w);
        }
        BigInt f = parse_int(frac);
        if (frac[0] == '-' || frac[0] == '+') {
            throw ParseError("bad number '" + text + "'");
        }
        BigInt scale = 1;
        for (size_t i = 0; i < frac.size(); ++i) {
            scale *= 10;
        }
        Rational fr(f, scale);
        return neg ? Rational(w) - fr : Rational(w) + fr;
    }
    return Rational(parse_int(s));
}

}  // namespace slicekit
