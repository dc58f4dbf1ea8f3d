#include "ergolab/diophantine.hpp"

#include <cmath>

namespace ergolab {

namespace {

// Relative error of one double-double operation.
constexpr double kUnitError = 0x1p-104;

std::int64_t checked_next(std::int64_t a, std::int64_t x1, std::int64_t x2) {
    const __int128 v = static_cast<__int128>(a) * x1 + x2;
    if (v > INT64_MAX || v < INT64_MIN) throw DomainError("convergent exceeds 64-bit range");
    return static_cast<std::int64_t>(v);
}

}  // namespace

CfExpansion cf_expand(const HighReal& gamma, int depth) {
    if (depth < 1) throw DomainError("depth must be >= 1");
    if (!gamma.is_finite()) throw DomainError("non-finite gamma");
    CfExpansion out;
    HighReal x = gamma;
    // Absolute error carried by x; each inversion x -> 1/r scales it by 1/r^2.
    double err = std::abs(gamma.to_double()) * kUnitError;
    for (int i = 0; i < depth; ++i) {
        const HighReal a = floor(x);
        const HighReal r = x - a;
        const double rd = r.to_double();
        if (rd <= err || (1.0 - rd) <= err) {
            // The floor itself is not decidable at this precision.
            if (rd < kRationalThreshold) {
                out.quotients.push_back(to_int64(a));
                out.terminated = true;
            } else if (1.0 - rd < kRationalThreshold) {
                out.quotients.push_back(to_int64(a) + 1);
                out.terminated = true;
            } else {
                out.unstable = true;
            }
            return out;
        }
        out.quotients.push_back(to_int64(a));
        if (rd < kRationalThreshold) {
            out.terminated = true;
            return out;
        }
        x = HighReal(1.0) / r;
        err = err / (rd * rd) + std::abs(x.to_double()) * kUnitError;
        if (!(std::abs(x.to_double()) < 0x1p62)) {
            out.terminated = true;
            return out;
        }
    }
    return out;
}

CfExpansion cf_expand(const Rational& gamma, int depth) {
    if (depth < 1) throw DomainError("depth must be >= 1");
    CfExpansion out;
    __int128 num = gamma.num;
    __int128 den = gamma.den;
    for (int i = 0; i < depth; ++i) {
        const std::int64_t a = floor_div(num, den);
        out.quotients.push_back(a);
        const __int128 rem = num - static_cast<__int128>(a) * den;
        if (rem == 0) {
            out.terminated = true;
            return out;
        }
        num = den;
        den = rem;
    }
    return out;
}

HighReal residual(const HighReal& gamma, std::int64_t p, std::int64_t q) {
    // gamma * q - p is formed before dividing so the cancellation is exact.
    return abs(gamma * HighReal::from_int(q) - HighReal::from_int(p)) / HighReal::from_int(q);
}

std::vector<Convergent> convergents(const CfExpansion& cf, const HighReal& gamma) {
    std::vector<Convergent> out;
    std::int64_t p2 = 0, p1 = 1;  // p_{-2}, p_{-1}
    std::int64_t q2 = 1, q1 = 0;
    for (const auto a : cf.quotients) {
        const std::int64_t p = checked_next(a, p1, p2);
        const std::int64_t q = checked_next(a, q1, q2);
        out.push_back({p, q, HighReal(0.0)});
        p2 = p1;
        p1 = p;
        q2 = q1;
        q1 = q;
    }
    for (std::size_t i = 0; i + 1 < out.size(); ++i) {
        out[i].error_bound =
            HighReal(1.0) / (HighReal::from_int(out[i].q) * HighReal::from_int(out[i + 1].q));
    }
    if (!out.empty()) {
        auto& last = out.back();
        last.error_bound = cf.terminated ? HighReal(0.0) : residual(gamma, last.p, last.q);
    }
    return out;
}

std::vector<Convergent> convergents(const HighReal& gamma, int depth) {
    return convergents(cf_expand(gamma, depth), gamma);
}

Convergent best_approx(const HighReal& gamma, std::int64_t N) {
    if (N < 2) throw DomainError("best_approx needs N >= 2");
    const CfExpansion cf = cf_expand(gamma, kMaxDepth);
    const HighReal target = HighReal(1.0) / HighReal::from_int(N);
    for (const auto& c : convergents(cf, gamma)) {
        const HighReal r = residual(gamma, c.p, c.q);
        if (r < target) return {c.p, c.q, r};
    }
    throw DomainError("no convergent within depth 64 approximates gamma to 1/N");
}

bool looks_rational(const HighReal& gamma) { return cf_expand(gamma, kMaxDepth).terminated; }

}  // namespace ergolab
