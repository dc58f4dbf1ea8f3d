#pragma once

// Continued fractions and convergents of a real gamma.

#include <cstdint>
#include <vector>

#include "ergolab/precision.hpp"

namespace ergolab {

/// Remainders below this are treated as zero: the expansion terminates and
/// gamma is reported rational.
inline constexpr double kRationalThreshold = 0x1p-90;
inline constexpr int kMaxDepth = 64;

struct CfExpansion {
    std::vector<std::int64_t> quotients;  // a_0; a_1, a_2, ...
    bool terminated = false;              // zero remainder reached (rational input)
    bool unstable = false;                // stopped early: next quotient not decidable
};

struct Convergent {
    std::int64_t p = 0;
    std::int64_t q = 1;
    HighReal error_bound;  // |gamma - p/q| <= error_bound
};

/// Partial quotients of gamma with a_0 = floor(gamma), at most `depth` of them.
CfExpansion cf_expand(const HighReal& gamma, int depth);
/// Exact expansion of a rational by Euclid's algorithm.
CfExpansion cf_expand(const Rational& gamma, int depth);

/// Convergents p_n/q_n. Every entry but the last carries 1/(q_n q_{n+1}); the
/// last carries its measured residual (0 for a terminated expansion).
std::vector<Convergent> convergents(const HighReal& gamma, int depth);
std::vector<Convergent> convergents(const CfExpansion& cf, const HighReal& gamma);

/// First convergent with |gamma - p/q| < 1/N.
Convergent best_approx(const HighReal& gamma, std::int64_t N);

/// True when the expansion terminates within kMaxDepth quotients.
bool looks_rational(const HighReal& gamma);

/// |gamma - p/q| evaluated in working precision.
HighReal residual(const HighReal& gamma, std::int64_t p, std::int64_t q);

}  // namespace ergolab
