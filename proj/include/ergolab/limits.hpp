#pragma once

// Explicit limit formulas for the double average along floor(alpha n^c),
// floor(beta n^c), as functions of gamma = alpha / beta:
//
//  gamma = p/q:   (1/|p|) sum_{r<q} int_{I_r} lim (1/N) sum_{n<N}
//                     g(T^{qn+r} x) f(T^{pn+floor(t)} x) dt,
//                 I_r the interval between pr/q and p(r+1)/q;
//  gamma irrational:  int_0^1 lim (1/N) sum_{n<N} g(T^n x) f(T^{floor(gamma(n+t))} x) dt.
//
// Inner limits are truncated at inner_N terms, or taken exactly over one
// period on periodic systems. grid_G > 0 selects the midpoint rule with G
// nodes (per sub-interval in the rational case); grid_G = 0 integrates the
// piecewise-constant integrand exactly.

#include <cstdint>
#include <string>

#include "ergolab/averages.hpp"

namespace ergolab {

inline constexpr double kInnerOscillationFlag = 0.05;

struct LimitEval {
    Complex value;
    /// |value with inner_N/2 terms - value with inner_N terms|; 0 for exact inner limits.
    double inner_oscillation = 0.0;
    bool inner_flagged = false;
    bool inner_exact = false;
    std::int64_t quadrature_points = 0;
    std::int64_t inner_N = 0;
    std::vector<std::string> warnings;
};

LimitEval limit_rational_eval(const MPSystem& system, const Observable& f, const Observable& g,
                              std::int64_t p, std::int64_t q, const SystemPoint& x,
                              std::int64_t inner_N, std::int64_t grid_G);
Complex limit_rational(const MPSystem& system, const Observable& f, const Observable& g,
                       std::int64_t p, std::int64_t q, const SystemPoint& x, std::int64_t inner_N,
                       std::int64_t grid_G);

LimitEval limit_irrational_eval(const MPSystem& system, const Observable& f, const Observable& g,
                                const Coefficient& gamma, const SystemPoint& x,
                                std::int64_t inner_N, std::int64_t grid_G);
Complex limit_irrational(const MPSystem& system, const Observable& f, const Observable& g,
                         const Coefficient& gamma, const SystemPoint& x, std::int64_t inner_N,
                         std::int64_t grid_G);

/// Reference path for the irrational formula: one avg_linear_double run per
/// midpoint node (a = 1, b = gamma, d = gamma t). Quadratic cost; for tests.
Complex limit_irrational_nodewise(const MPSystem& system, const Observable& f,
                                  const Observable& g, const Coefficient& gamma,
                                  const SystemPoint& x, std::int64_t inner_N, std::int64_t grid_G);

struct LimitReport {
    Complex lhs_value;
    Complex rhs_value;
    double abs_diff = 0.0;
    std::int64_t quadrature_points = 0;
    std::int64_t inner_N = 0;
};

/// Final-checkpoint sample mean of `direct` against the formula value.
LimitReport compare_limits(const AverageSeries& direct, Complex formula);
LimitReport compare_limits(Complex direct, Complex formula);

}  // namespace ergolab
