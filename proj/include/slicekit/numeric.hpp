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
#include <limits>
#include <utility>
#include <vector>

#include "slicekit/core.hpp"
#include "slicekit/distribution.hpp"

namespace slicekit {

/// Distance from gamma to the nearest integer multiple of 2^-t.
inline Rational err(const Rational &gamma, unsigned t) {
    if (gamma < 0 || gamma > 1) {
        throw ArgumentError("err needs gamma in [0,1]");
    }
    Rational scale = pow2(t);
    Rational scaled = gamma * scale;
    BigInt j = floor_rational(scaled);
    Rational below = scaled - Rational(j);
    Rational above = Rational(j + 1) - scaled;
    return (below < above ? below : above) / scale;
}

/// Nearest multiple of 2^-t to gamma, expressed as its numerator; ties go down.
inline BigInt nearest_dyadic_numerator(const Rational &gamma, unsigned t) {
    Rational scaled = gamma * pow2(t);
    BigInt j = floor_rational(scaled);
    return (scaled - Rational(j) <= Rational(j + 1) - scaled) ? j : BigInt(j + 1);
}

/// Largest tower tow_2 height whose value still fits the exponent budget.
inline constexpr unsigned kMaxTowerBits = 1u << 24;

/// Power tower: tow(a, 0) = 1, tow(a, b) = a^tow(a, b-1).
inline BigInt tow(unsigned a, unsigned b) {
    BigInt v = 1;
    for (unsigned i = 0; i < b; ++i) {
        if (a == 0) {
            v = (v == 0) ? 1 : 0;
            continue;
        }
        if (a == 1) {
            v = 1;
            continue;
        }
        if (v > BigInt(kMaxTowerBits)) {
            throw CapacityError("tower value too large to materialize");
        }
        unsigned e = v.convert_to<unsigned>();
        BigInt next = 1;
        BigInt base = a;
        unsigned ee = e;
        while (ee) {
            if (ee & 1u) {
                next *= base;
            }
            ee >>= 1;
            if (ee) {
                base *= base;
            }
        }
        v = next;
    }
    return v;
}

/// log2 of tow_2(h) as a double; infinity once it leaves double range.
inline double log2_tow2(unsigned h) {
    if (h == 0) {
        return 0.0;
    }
    double v = 1.0;  // tow_2(0)
    for (unsigned i = 1; i < h; ++i) {
        v = std::exp2(v);
        if (!std::isfinite(v)) {
            return std::numeric_limits<double>::infinity();
        }
    }
    return v;
}

/// Iterated base-2 logarithm: the least b with x <= tow_2(b). Exact on rationals.
inline unsigned log_star(const Rational &x) {
    unsigned b = 0;
    BigInt t = 1;
    while (Rational(t) < x) {
        ++b;
        if (t > BigInt(kMaxTowerBits)) {
            // x is finite, so it is below the next tower level.
            return b;
        }
        t = pow2_int(t.convert_to<unsigned>());
    }
    return b;
}

inline unsigned log_star(double x) {
    unsigned b = 0;
    double t = 1.0;
    while (t < x) {
        ++b;
        t = std::exp2(t);
    }
    return b;
}

/// Binary entropy, base 2.
inline double entropy(double x) {
    if (x <= 0.0 || x >= 1.0) {
        return 0.0;
    }
    return -x * std::log2(x) - (1.0 - x) * std::log2(1.0 - x);
}

/// Interval containing H((1+x)/2) for x in [-1,1].
inline std::pair<double, double> entropy_bounds(double x) {
    if (x < -1.0 || x > 1.0) {
        throw ArgumentError("entropy_bounds needs x in [-1,1]");
    }
    return {1.0 - x * x, 1.0 - x * x / (2.0 * std::log(2.0))};
}

inline BigInt binomial(unsigned n, unsigned k) {
    if (k > n) {
        return 0;
    }
    k = std::min(k, n - k);
    BigInt r = 1;
    for (unsigned i = 1; i <= k; ++i) {
        r = r * (n - k + i) / i;
    }
    return r;
}

/// Interval containing C(n,k), for 1 <= k <= n-1.
inline std::pair<double, double> binom_bounds(unsigned n, unsigned k) {
    if (k < 1 || k + 1 > n) {
        throw ArgumentError("binom_bounds needs 1 <= k <= n-1");
    }
    double g = static_cast<double>(k) / n;
    double main = std::exp2(n * entropy(g));
    double base = k * (1.0 - g);
    return {main / std::sqrt(8.0 * base), main / std::sqrt(M_PI * base)};
}

/// Number of strings of length n whose weight mod q lies in lambda.
inline BigInt periodic_support_size(unsigned n, unsigned q, const std::vector<unsigned> &lambda) {
    auto res = normalize_residues(q, lambda);
    BigInt s = 0;
    for (unsigned w = 0; w <= n; ++w) {
        if (res.count(w % q)) {
            s += binomial(n, w);
        }
    }
    return s;
}

/// Fraction of {0,1}^n inside the periodic slice.
inline Rational eta(unsigned n, unsigned q, const std::vector<unsigned> &lambda) {
    return Rational(periodic_support_size(n, q, lambda), pow2_int(n));
}

inline double eta_lower(unsigned n, unsigned q) {
    if (n == 0) {
        throw ArgumentError("eta_lower needs n >= 1");
    }
    double nn = n;
    return std::exp2(-static_cast<double>(q) * q / nn) / std::sqrt(2.0 * nn);
}

}  // namespace slicekit
