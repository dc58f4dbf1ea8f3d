#pragma once

// Distribution of {alpha n^c} over [0, 1): histogram, a bin-prefix estimate
// of the star discrepancy, and the hit rate of the interval set
// I_k(s) = [0, 1/k] ∪ [1 - s - 1/k, 1 - s + 1/k].

#include <cstdint>
#include <vector>

#include "ergolab/precision.hpp"

namespace ergolab {

struct EquidistributionReport {
    std::int64_t N = 0;
    std::vector<std::int64_t> histogram;
    /// max over b of |#{n : {alpha n^c} < (b+1)/bins}/N - (b+1)/bins|.
    double star_discrepancy = 0.0;
    /// Set when the discrepancy exceeds 1/4 (e.g. integer-valued sequences).
    bool non_equidistributed = false;
    double ik_hit_rate = 0.0;
    double ik_measure = 0.0;  // Lebesgue measure of I_k(s) within [0, 1)
    std::int64_t boundary_flags = 0;
};

/// k >= 1 and s in [0, 1) describe I_k(s); pass k = 0 to skip the hit rate.
EquidistributionReport equidistribution_report(const Coefficient& alpha, const HighReal& c,
                                               std::int64_t N, int bins, std::int64_t k = 0,
                                               double s = 0.0);

/// Membership in I_k(s), taken mod 1.
bool in_Ik(double x, std::int64_t k, double s);

}  // namespace ergolab
