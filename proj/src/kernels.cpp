#include "ergolab/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

namespace ergolab {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

void check_positive(const HighReal& L, const HighReal& c) {
    if (!(L > HighReal(0.0)) || !L.is_finite()) throw DomainError("L must be positive");
    if (!(c > HighReal(0.0)) || !c.is_finite()) throw DomainError("c must be positive");
}

}  // namespace

HighReal psi_inverse(const HighReal& L, const HighReal& c, const HighReal& y) {
    check_positive(L, c);
    if (y.hi() < 0.0) throw DomainError("psi_inverse needs y >= 0");
    if (y.hi() == 0.0) return HighReal(0.0);
    return pow(y / L, HighReal(1.0) / c);
}

LambdaSet lambda_count(const HighReal& L, const HighReal& c, std::int64_t N) {
    check_positive(L, c);
    if (N < 1) throw DomainError("lambda_count needs N >= 1");
    LambdaSet out;
    out.N = N;
    out.member.assign(static_cast<std::size_t>(N) + 1, 0);
    const Coefficient coeff(L);
    for (std::int64_t n = 1;; ++n) {
        const FloorResult f = floor_pow(coeff, c, n);
        if (f.floor_value > N) break;
        if (f.boundary_flag) ++out.flagged;
        if (f.floor_value >= 1 && !out.member[f.floor_value]) {
            out.member[f.floor_value] = 1;
            ++out.count;
            if (out.first == 0) out.first = f.floor_value;
        }
    }
    return out;
}

HighReal e_weight(const HighReal& L, const HighReal& c, std::int64_t n) {
    if (n < 1) throw DomainError("e_weight needs n >= 1");
    const HighReal a = psi_inverse(L, c, HighReal::from_int(n + 1));
    const HighReal b = psi_inverse(L, c, HighReal::from_int(n));
    return phi(-a) - phi(-b);
}

std::int64_t KernelParams::M(std::int64_t N) const {
    if (N < 1) throw DomainError("M(N) needs N >= 1");
    return to_int64(floor(pow(HighReal::from_int(N), sigma0)));
}

KernelParams kernel_params(const HighReal& c) {
    const HighReal upper = HighReal(23.0) / HighReal(22.0);
    if (!(c > HighReal(1.0)) || !(c < upper)) throw DomainError("kernel parameters need c in (1, 23/22)");
    KernelParams kp;
    kp.c = c;
    kp.eps0 = (HighReal(23.0) - HighReal(22.0) * c) / (HighReal(40.0) * c);
    kp.sigma0 = HighReal(1.0) + kp.eps0 - HighReal(1.0) / c;
    return kp;
}

WeightSeq fourier_kernel(const KernelParams& params, const HighReal& L, std::int64_t N,
                         std::int64_t count) {
    if (N < 2) throw DomainError("fourier_kernel needs N >= 2");
    if (count < 1) throw DomainError("Lambda ∩ [N] is empty");
    const std::int64_t M = params.M(N);
    WeightSeq w;
    w.begin = 1;
    w.tag = "K_N";
    w.values.assign(static_cast<std::size_t>(N), 0.0);
    const double inv_count = 1.0 / static_cast<double>(count);
    const HighReal inv_c = HighReal(1.0) / params.c;
    auto psi_frac = [&](std::int64_t n) {
        return frac(pow(HighReal::from_int(n) / L, inv_c)).to_double();
    };
    double prev = psi_frac(1);
    for (std::int64_t n = 1; n <= N; ++n) {
        const double next = psi_frac(n + 1);
        Complex acc{};
        for (std::int64_t m = 1; m <= M; ++m) {
            const double md = static_cast<double>(m);
            // Reduce m * {psi} mod 1 before taking the phase.
            const double a = std::fmod(md * next, 1.0);
            const double b = std::fmod(md * prev, 1.0);
            const Complex ea{std::cos(kTwoPi * a), std::sin(kTwoPi * a)};
            const Complex eb{std::cos(kTwoPi * b), std::sin(kTwoPi * b)};
            const Complex plus = (ea - eb) / Complex(0.0, kTwoPi * md);
            const Complex minus = (std::conj(ea) - std::conj(eb)) / Complex(0.0, -kTwoPi * md);
            acc += plus + minus;
        }
        w.imag_residual = std::max(w.imag_residual, std::abs(acc.imag()) * inv_count);
        const double v = acc.real() * inv_count;
        w.values[static_cast<std::size_t>(n - 1)] = v;
        w.sup = std::max(w.sup, std::abs(v));
        prev = next;
    }
    return w;
}

WeightSeq fourier_kernel(const KernelParams& params, const HighReal& L, std::int64_t N) {
    return fourier_kernel(params, L, N, lambda_count(L, params.c, N).count);
}

std::vector<WeightSeq> dyadic_split(const WeightSeq& w, std::int64_t N) {
    if (N < 1) throw DomainError("dyadic_split needs N >= 1");
    if (w.begin < 1 || w.end() > N + 1) throw DomainError("weights must be supported in [N]");
    std::vector<WeightSeq> out;
    for (std::int64_t lo = 1; lo <= N; lo *= 2) {
        const std::int64_t hi = std::min(2 * lo, N + 1);
        WeightSeq piece;
        piece.begin = lo;
        piece.tag = w.tag + "_j" + std::to_string(out.size());
        piece.values.resize(static_cast<std::size_t>(hi - lo));
        for (std::int64_t n = lo; n < hi; ++n) {
            const double v = w.at(n);
            piece.values[static_cast<std::size_t>(n - lo)] = v;
            piece.sup = std::max(piece.sup, std::abs(v));
        }
        out.push_back(std::move(piece));
    }
    return out;
}

Rational mu_N(std::int64_t N, std::int64_t n) {
    if (N < 1 || N > (std::int64_t{1} << 31)) throw DomainError("mu_N needs 1 <= N <= 2^31");
    const std::int64_t a = n < 0 ? -n : n;
    return Rational(std::max<std::int64_t>(N - a, 0), N * N);
}

std::int64_t r_H(const std::vector<std::int64_t>& H, std::int64_t h) {
    const std::set<std::int64_t> s(H.begin(), H.end());
    std::int64_t count = 0;
    for (const auto h2 : s) count += s.count(h2 + h);
    return count;
}

FiniteSeq delta_diff(const FiniteSeq& f, const std::vector<std::int64_t>& shifts) {
    FiniteSeq cur = f;
    for (const auto h : shifts) {
        const std::int64_t lo = std::max(cur.begin, cur.begin - h);
        const std::int64_t hi = std::min(cur.end(), cur.end() - h);
        FiniteSeq next;
        next.begin = lo;
        for (std::int64_t x = lo; x < hi; ++x) next.values.push_back(cur.at(x) * std::conj(cur.at(x + h)));
        if (next.values.empty()) next.begin = 0;
        cur = std::move(next);
    }
    return cur;
}

VdcResult vdc_check(const FiniteSeq& g, const std::vector<std::int64_t>& H) {
    std::vector<std::int64_t> S;
    for (std::int64_t y = g.begin; y < g.end(); ++y) {
        if (g.at(y) != Complex{}) S.push_back(y);
    }
    if (S.empty()) throw DomainError("vdc_check needs a nonempty support");
    const std::set<std::int64_t> Hs(H.begin(), H.end());
    if (Hs.empty()) throw DomainError("vdc_check needs a nonempty H");

    std::set<std::int64_t> diff;
    for (const auto s : S) for (const auto h : Hs) diff.insert(s - h);

    Complex total{};
    for (const auto y : S) total += g.at(y);

    Complex corr{};
    for (const auto h1 : Hs) {
        for (const auto h2 : Hs) {
            const std::int64_t h = h1 - h2;
            for (const auto y : S) corr += g.at(y + h) * std::conj(g.at(y));
        }
    }
    VdcResult r;
    r.lhs = std::norm(total);
    r.difference_set_size = static_cast<std::int64_t>(diff.size());
    r.correlation = corr.real();
    const double hsize = static_cast<double>(Hs.size());
    r.rhs = static_cast<double>(r.difference_set_size) * r.correlation / (hsize * hsize);
    return r;
}

TwoSided correlation_both_sides(const FiniteSeq& f0, const FiniteSeq& f1, const FiniteSeq& f2,
                                const FiniteSeq& f3, std::int64_t p, std::int64_t q,
                                std::int64_t N) {
    if (N < 1 || N > 16) throw DomainError("the two-sided evaluator is limited to 1 <= N <= 16");
    Complex lhs{};
    for (std::int64_t x = f0.begin; x < f0.end(); ++x) {
        const Complex a = f0.at(x);
        if (a == Complex{}) continue;
        for (std::int64_t n = f3.begin; n < f3.end(); ++n) {
            lhs += a * f1.at(x + p * n) * f2.at(x + q * n) * f3.at(n);
        }
    }
    Complex rhs{};
    for (std::int64_t h3 = -(N - 1); h3 <= N - 1; ++h3) {
        const double mu = static_cast<double>(N - (h3 < 0 ? -h3 : h3)) / static_cast<double>(N * N);
        Complex inner{};
        for (std::int64_t h1 = -N; h1 <= N; ++h1) {
            for (std::int64_t h2 = -N; h2 <= N; ++h2) {
                const FiniteSeq d = delta_diff(f3, {h1, h2, h3});
                for (const auto& v : d.values) inner += v;
            }
        }
        rhs += mu * inner;
    }
    rhs *= std::pow(static_cast<double>(N), 13.0);
    TwoSided out;
    out.lhs = std::abs(lhs);
    out.rhs = rhs;
    const double r = std::abs(rhs);
    out.ratio = r > 0.0 ? out.lhs / r : (out.lhs > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
    return out;
}

}  // namespace ergolab
