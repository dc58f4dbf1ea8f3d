#include "ergolab/equidistribution.hpp"

#include <algorithm>
#include <cmath>

#include "ergolab/averages.hpp"

namespace ergolab {

namespace {

// Measure of the union of [a, b] pieces after reduction mod 1.
double union_measure(std::vector<std::pair<double, double>> pieces) {
    std::vector<std::pair<double, double>> flat;
    for (auto [a, b] : pieces) {
        if (b - a >= 1.0) return 1.0;
        const double fa = a - std::floor(a);
        const double fb = fa + (b - a);
        if (fb <= 1.0) {
            flat.emplace_back(fa, fb);
        } else {
            flat.emplace_back(fa, 1.0);
            flat.emplace_back(0.0, fb - 1.0);
        }
    }
    std::sort(flat.begin(), flat.end());
    double total = 0.0, cur_a = -1.0, cur_b = -1.0;
    for (auto [a, b] : flat) {
        if (a > cur_b) {
            if (cur_b > cur_a) total += cur_b - cur_a;
            cur_a = a;
            cur_b = b;
        } else {
            cur_b = std::max(cur_b, b);
        }
    }
    if (cur_b > cur_a) total += cur_b - cur_a;
    return std::min(total, 1.0);
}

bool in_piece(double x, double a, double b) {
    // [a, b] taken mod 1, for b - a < 1.
    const double fa = a - std::floor(a);
    const double fb = fa + (b - a);
    if (fb <= 1.0) return x >= fa && x <= fb;
    return x >= fa || x <= fb - 1.0;
}

}  // namespace

bool in_Ik(double x, std::int64_t k, double s) {
    const double w = 1.0 / static_cast<double>(k);
    return in_piece(x, 0.0, w) || in_piece(x, 1.0 - s - w, 1.0 - s + w);
}

EquidistributionReport equidistribution_report(const Coefficient& alpha, const HighReal& c,
                                               std::int64_t N, int bins, std::int64_t k,
                                               double s) {
    if (bins < 2 || N < bins) throw DomainError("equidistribution needs N >= bins >= 2");
    if (k < 0) throw DomainError("k must be >= 0");
    if (k > 0 && !(s >= 0.0 && s < 1.0)) throw DomainError("s must lie in [0, 1)");

    constexpr std::int64_t kChunk = 1 << 15;
    const std::int64_t chunks = (N + kChunk - 1) / kChunk;
    std::vector<std::vector<std::int64_t>> hist(static_cast<std::size_t>(chunks),
                                                std::vector<std::int64_t>(static_cast<std::size_t>(bins), 0));
    std::vector<std::int64_t> hits(static_cast<std::size_t>(chunks), 0);
    std::vector<std::int64_t> flags(static_cast<std::size_t>(chunks), 0);
    parallel_for(static_cast<std::size_t>(chunks), [&](std::size_t ch) {
        const std::int64_t lo = static_cast<std::int64_t>(ch) * kChunk + 1;
        const std::int64_t hi = std::min(N, lo + kChunk - 1);
        for (std::int64_t n = lo; n <= hi; ++n) {
            const FloorResult f = floor_pow(alpha, c, n);
            flags[ch] += f.boundary_flag;
            const double x = f.frac_value.to_double();
            auto b = static_cast<std::int64_t>(x * bins);
            b = std::clamp<std::int64_t>(b, 0, bins - 1);
            hist[ch][static_cast<std::size_t>(b)] += 1;
            if (k > 0 && in_Ik(x, k, s)) hits[ch] += 1;
        }
    });

    EquidistributionReport r;
    r.N = N;
    r.histogram.assign(static_cast<std::size_t>(bins), 0);
    std::int64_t hit_total = 0;
    for (std::size_t ch = 0; ch < hist.size(); ++ch) {
        for (int b = 0; b < bins; ++b) r.histogram[b] += hist[ch][b];
        hit_total += hits[ch];
        r.boundary_flags += flags[ch];
    }
    std::int64_t prefix = 0;
    for (int b = 0; b < bins; ++b) {
        prefix += r.histogram[b];
        const double emp = static_cast<double>(prefix) / static_cast<double>(N);
        const double uni = static_cast<double>(b + 1) / static_cast<double>(bins);
        r.star_discrepancy = std::max(r.star_discrepancy, std::abs(emp - uni));
    }
    r.non_equidistributed = r.star_discrepancy > 0.25;
    if (k > 0) {
        const double w = 1.0 / static_cast<double>(k);
        r.ik_hit_rate = static_cast<double>(hit_total) / static_cast<double>(N);
        r.ik_measure = union_measure({{0.0, w}, {1.0 - s - w, 1.0 - s + w}});
    }
    return r;
}

}  // namespace ergolab
