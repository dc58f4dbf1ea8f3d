#include "ergolab/limits.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

namespace ergolab {

namespace {

constexpr std::int64_t kMaxExactPeriod = std::int64_t{1} << 24;

Complex eval_at(const MPSystem& system, const Observable& obs, const SystemPoint& x,
                std::int64_t k) {
    SystemPoint y = x;
    power_apply_inplace(system, k, y);
    return obs.evaluate(y);
}

void check_inputs(const MPSystem& system, const Observable& f, const Observable& g,
                  const SystemPoint& x, std::int64_t inner_N, std::int64_t grid_G) {
    check_point(system, x);
    if (!(f.layout() == system.layout()) || !(g.layout() == system.layout())) {
        throw TypeError("observables do not belong to the system");
    }
    if (inner_N < 2) throw DomainError("inner_N must be >= 2");
    if (grid_G < 0) throw DomainError("grid_G must be >= 0");
}

Complex scale(Complex v, double d) { return {v.real() / d, v.imag() / d}; }

}  // namespace

LimitEval limit_rational_eval(const MPSystem& system, const Observable& f, const Observable& g,
                              std::int64_t p, std::int64_t q, const SystemPoint& x,
                              std::int64_t inner_N, std::int64_t grid_G) {
    if (p == 0 || q < 1) throw DomainError("rational limit needs p != 0 and q >= 1");
    if (std::gcd(p < 0 ? -p : p, q) != 1) throw DomainError("rational limit needs gcd(|p|, q) = 1");
    check_inputs(system, f, g, x, inner_N, grid_G);
    const std::int64_t ap = p < 0 ? -p : p;

    // Quadrature weight of each (r, floor(t)) cell, summing to |p| overall.
    std::map<std::pair<std::int64_t, std::int64_t>, double> weight;
    for (std::int64_t r = 0; r < q; ++r) {
        const std::int64_t lo_num = std::min(p * r, p * (r + 1));  // interval [lo_num/q, lo_num/q + |p|/q]
        if (grid_G == 0) {
            const std::int64_t hi_num = lo_num + ap;
            for (std::int64_t j = floor_div(lo_num, q); j * q < hi_num; ++j) {
                const std::int64_t a = std::max(lo_num, j * q);
                const std::int64_t b = std::min(hi_num, (j + 1) * q);
                if (b > a) weight[{r, j}] += static_cast<double>(b - a) / static_cast<double>(q);
            }
        } else {
            // Node i sits at lo + (2i+1)|p| / (2qG).
            const double w = static_cast<double>(ap) / (static_cast<double>(q) * static_cast<double>(grid_G));
            std::map<std::int64_t, std::int64_t> hits;
            for (std::int64_t i = 0; i < grid_G; ++i) {
                const __int128 num = static_cast<__int128>(2 * grid_G) * lo_num + static_cast<__int128>(2 * i + 1) * ap;
                hits[floor_div(num, static_cast<__int128>(2) * q * grid_G)] += 1;
            }
            for (const auto& [j, cnt] : hits) weight[{r, j}] += w * static_cast<double>(cnt);
        }
    }

    LimitEval out;
    out.inner_N = inner_N;
    out.quadrature_points = grid_G == 0 ? 0 : grid_G * q;
    const auto period = system.period();
    std::int64_t terms = inner_N;
    if (period && *period <= kMaxExactPeriod) {
        terms = *period;
        out.inner_exact = true;
    }
    const std::int64_t half = terms / 2;
    KahanSum full, partial;
    for (const auto& [cell, w] : weight) {
        const auto [r, j] = cell;
        KahanSum acc;
        Complex at_half{};
        for (std::int64_t n = 0; n < terms; ++n) {
            acc.add(eval_at(system, g, x, q * n + r) * eval_at(system, f, x, p * n + j));
            if (n + 1 == half) at_half = acc.value();
        }
        full.add(w * scale(acc.value(), static_cast<double>(terms)));
        if (half > 0) partial.add(w * scale(at_half, static_cast<double>(half)));
    }
    out.value = scale(full.value(), static_cast<double>(ap));
    if (!out.inner_exact) {
        out.inner_oscillation = std::abs(out.value - scale(partial.value(), static_cast<double>(ap)));
        out.inner_flagged = out.inner_oscillation > kInnerOscillationFlag;
    }
    return out;
}

Complex limit_rational(const MPSystem& system, const Observable& f, const Observable& g,
                       std::int64_t p, std::int64_t q, const SystemPoint& x, std::int64_t inner_N,
                       std::int64_t grid_G) {
    return limit_rational_eval(system, f, g, p, q, x, inner_N, grid_G).value;
}

LimitEval limit_irrational_eval(const MPSystem& system, const Observable& f, const Observable& g,
                                const Coefficient& gamma, const SystemPoint& x,
                                std::int64_t inner_N, std::int64_t grid_G) {
    check_inputs(system, f, g, x, inner_N, grid_G);
    const HighReal gm = gamma.value;
    if (gm.hi() == 0.0) throw DomainError("gamma must be non-zero");
    if (abs(gm) == HighReal(1.0)) throw DomainError("the irrational formula needs |gamma| != 1");
    LimitEval out;
    out.inner_N = inner_N;
    out.quadrature_points = grid_G;
    if (gamma.exact || looks_rational(gm)) {
        out.warnings.push_back("gamma is rational at working precision; the irrational formula is applied as given");
    }
    const bool positive = gm.hi() > 0.0;
    const HighReal G = HighReal::from_int(grid_G);

    // Quadrature mass of {t : gamma (n + t) >= j} for t in [0, 1).
    auto mass_ge = [&](std::int64_t n, std::int64_t j) -> double {
        const HighReal a = (HighReal::from_int(j) - gm * HighReal::from_int(n)) / gm;
        if (grid_G == 0) {
            const double ad = std::clamp(a.to_double(), 0.0, 1.0);
            return positive ? 1.0 - ad : ad;
        }
        const HighReal u = a * G - HighReal(0.5);
        std::int64_t count;
        if (positive) {
            const HighReal fl = floor(u);
            const std::int64_t i_min = u == fl ? to_int64(fl) : to_int64(fl) + 1;
            count = grid_G - std::clamp<std::int64_t>(i_min, 0, grid_G);
        } else {
            count = std::clamp<std::int64_t>(to_int64(floor(u)) + 1, 0, grid_G);
        }
        return static_cast<double>(count) / static_cast<double>(grid_G);
    };

    const std::int64_t half = inner_N / 2;
    KahanSum acc;
    Complex at_half{};
    for (std::int64_t n = 0; n < inner_N; ++n) {
        const HighReal v0 = gm * HighReal::from_int(n);
        const HighReal v1 = gm * HighReal::from_int(n + 1);
        const std::int64_t j_lo = to_int64(floor(positive ? v0 : v1)) - 1;
        const std::int64_t j_hi = to_int64(floor(positive ? v1 : v0)) + 1;
        Complex inner{};
        double upper = mass_ge(n, j_lo);
        for (std::int64_t j = j_lo; j <= j_hi; ++j) {
            const double next = mass_ge(n, j + 1);
            const double w = upper - next;
            if (w != 0.0) inner += w * eval_at(system, f, x, j);
            upper = next;
        }
        acc.add(eval_at(system, g, x, n) * inner);
        if (n + 1 == half) at_half = acc.value();
    }
    out.value = scale(acc.value(), static_cast<double>(inner_N));
    if (half > 0) {
        out.inner_oscillation = std::abs(out.value - scale(at_half, static_cast<double>(half)));
        out.inner_flagged = out.inner_oscillation > kInnerOscillationFlag;
    }
    return out;
}

Complex limit_irrational(const MPSystem& system, const Observable& f, const Observable& g,
                         const Coefficient& gamma, const SystemPoint& x, std::int64_t inner_N,
                         std::int64_t grid_G) {
    return limit_irrational_eval(system, f, g, gamma, x, inner_N, grid_G).value;
}

Complex limit_irrational_nodewise(const MPSystem& system, const Observable& f,
                                  const Observable& g, const Coefficient& gamma,
                                  const SystemPoint& x, std::int64_t inner_N, std::int64_t grid_G) {
    check_inputs(system, f, g, x, inner_N, grid_G);
    if (grid_G < 1) throw DomainError("the nodewise path needs grid_G >= 1");
    AverageSpec spec{system, g, f, {inner_N}, 1, 0, true, {}};
    FlowPoint p;
    p.base = x;
    spec.at_points = {p};
    KahanSum acc;
    for (std::int64_t i = 0; i < grid_G; ++i) {
        const HighReal t = (HighReal::from_int(2 * i + 1)) / HighReal::from_int(2 * grid_G);
        LinearParams lp{Coefficient::integer(1), gamma, Coefficient(gamma.value * t), 0};
        acc.add(avg_linear_double(spec, lp).mean.back());
    }
    return scale(acc.value(), static_cast<double>(grid_G));
}

LimitReport compare_limits(Complex direct, Complex formula) {
    LimitReport r;
    r.lhs_value = direct;
    r.rhs_value = formula;
    r.abs_diff = std::abs(direct - formula);
    return r;
}

LimitReport compare_limits(const AverageSeries& direct, Complex formula) {
    if (direct.mean.empty()) throw DomainError("direct series is empty");
    return compare_limits(direct.mean.back(), formula);
}

}  // namespace ergolab
