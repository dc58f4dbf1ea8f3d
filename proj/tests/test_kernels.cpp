#include <doctest.h>

#include <cmath>
#include <random>
#include <set>

#include "ergolab/expr.hpp"
#include "ergolab/kernels.hpp"
#include "oracle.hpp"

using namespace ergolab;

namespace {

const HighReal kC = parse_scalar("1.02").value;
constexpr double kTwoPi = 6.283185307179586476925286766559;

FiniteSeq random_seq(std::mt19937_64& rng, std::int64_t max_len) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    FiniteSeq g;
    g.begin = static_cast<std::int64_t>(rng() % 41) - 20;
    g.values.resize(1 + rng() % static_cast<std::uint64_t>(max_len));
    for (auto& v : g.values) v = Complex(u(rng), u(rng));
    return g;
}

}  // namespace

TEST_CASE("psi_inverse examples") {
    CHECK(psi_inverse(HighReal(1.0), HighReal(1.0), HighReal(7.0)) == HighReal(7.0));
    CHECK(psi_inverse(HighReal(2.0), HighReal(1.0), HighReal(7.0)) == HighReal(3.5));
    // 1148^(1/1.02) = 999.8688...; 1000^1.02 = 1148.15 is not an integer
    const HighReal got = psi_inverse(HighReal(1.0), kC, HighReal(1148.0));
    oracle::Mp want, e, diff;
    mpfr_set_d(want.get(), 1148.0, MPFR_RNDN);
    mpfr_set_d(e.get(), 1.0, MPFR_RNDN);
    oracle::Mp c;
    oracle::set_value(c.get(), "1.02");
    mpfr_div(e.get(), e.get(), c.get(), MPFR_RNDN);
    mpfr_pow(want.get(), want.get(), e.get(), MPFR_RNDN);
    mpfr_set_d(diff.get(), got.hi(), MPFR_RNDN);
    mpfr_add_d(diff.get(), diff.get(), got.lo(), MPFR_RNDN);
    mpfr_sub(diff.get(), diff.get(), want.get(), MPFR_RNDN);
    CHECK(std::abs(mpfr_get_d(diff.get(), MPFR_RNDN)) < 1000.0 * 0x1p-96);
    CHECK(std::abs(got.to_double() - 999.8688246) < 1e-6);
}

TEST_CASE("lambda_count examples") {
    const LambdaSet a = lambda_count(HighReal(1.0), HighReal(1.0), 10);
    CHECK(a.count == 10);
    for (int n = 1; n <= 10; ++n) CHECK(a.member[n]);
    const LambdaSet b = lambda_count(HighReal(2.0), HighReal(1.0), 10);
    CHECK(b.count == 5);
    for (int n = 1; n <= 10; ++n) CHECK(static_cast<bool>(b.member[n]) == (n % 2 == 0));
}

TEST_CASE("lambda_count matches direct enumeration with a 256-bit oracle") {
    for (const char* L : {"1", "sqrt(2)", "4.5"}) {
        const HighReal Lv = parse_scalar(L).value;
        for (std::int64_t N : {100, 5000}) {
            std::set<std::int64_t> want;
            for (std::int64_t n = 1;; ++n) {
                const std::int64_t v = oracle::floor_pow(L, "1.02", n);
                if (v > N) break;
                if (v >= 1) want.insert(v);
            }
            const LambdaSet got = lambda_count(Lv, kC, N);
            CHECK(got.count == static_cast<std::int64_t>(want.size()));
            for (std::int64_t n = 1; n <= N; ++n) CHECK(static_cast<bool>(got.member[n]) == (want.count(n) == 1));
            CHECK(got.first == *want.begin());
        }
    }
}

TEST_CASE("e_weight examples and telescoping") {
    CHECK(e_weight(HighReal(1.0), HighReal(1.0), 5) == HighReal(0.0));
    CHECK(e_weight(HighReal(2.0), HighReal(1.0), 5) == HighReal(-0.5));
    const double v = e_weight(HighReal(1.0), kC, 5).to_double();
    CHECK(v >= -1.0);
    CHECK(v <= 1.0);

    const HighReal L(3.0);
    auto psi = [&](std::int64_t n) { return psi_inverse(L, kC, HighReal::from_int(n)); };
    std::int64_t A = 1000;
    while (A < 4000) {
        std::int64_t B = A + 1;
        while (B < A + 50 && floor(psi(B)) == floor(psi(A))) ++B;
        if (floor(psi(B)) != floor(psi(A))) --B;  // keep [A, B] crossing-free
        if (B > A) {
            HighReal sum(0.0);
            for (std::int64_t n = A; n < B; ++n) sum += e_weight(L, kC, n);
            CHECK(std::abs((sum - (phi(-psi(B)) - phi(-psi(A)))).to_double()) < 1e-25);
        }
        A = B + 2;
    }
}

TEST_CASE("kernel_params examples") {
    const KernelParams p = kernel_params(kC);
    CHECK(std::abs(p.eps0.to_double() - (23.0 - 22.0 * 1.02) / (40.0 * 1.02)) < 1e-15);
    CHECK(std::abs(p.eps0.to_double() - 0.0137255) < 1e-6);
    CHECK(std::abs(p.sigma0.to_double() - 1.0 / 30.0) < 1e-15);
    CHECK(p.M(1000000) == 1);
    CHECK(p.M(2) >= 1);
    const KernelParams q = kernel_params(parse_scalar("23/22 - 1/10^9").value);
    CHECK(q.eps0.to_double() < 1e-8);
    CHECK_THROWS_AS(kernel_params(HighReal(1.0)), DomainError);
    CHECK_THROWS_AS(kernel_params(parse_scalar("23/22").value), DomainError);
}

TEST_CASE("fourier kernel with M = 1 equals the sine-difference form") {
    const KernelParams p = kernel_params(kC);
    const HighReal L = parse_scalar("sqrt(2)+3").value;
    const std::int64_t N = 4096;
    REQUIRE(p.M(N) == 1);
    const std::int64_t count = lambda_count(L, kC, N).count;
    const WeightSeq w = fourier_kernel(p, L, N);
    CHECK(w.imag_residual < 0x1p-60);
    double sup = 0.0;
    for (std::int64_t n = 1; n <= N; ++n) {
        // independent evaluation of psi at 256 bits
        oracle::Mp a, b, l, e;
        oracle::set_value(l.get(), "sqrt(2)");
        mpfr_add_ui(l.get(), l.get(), 3, MPFR_RNDN);
        mpfr_set_d(e.get(), 1.0, MPFR_RNDN);
        oracle::Mp cc;
        oracle::set_value(cc.get(), "1.02");
        mpfr_div(e.get(), e.get(), cc.get(), MPFR_RNDN);
        auto psi_sin = [&](std::int64_t m, mpfr_ptr out) {
            mpfr_set_si(out, static_cast<long>(m), MPFR_RNDN);
            mpfr_div(out, out, l.get(), MPFR_RNDN);
            mpfr_pow(out, out, e.get(), MPFR_RNDN);
            mpfr_const_pi(a.get(), MPFR_RNDN);
            mpfr_mul_ui(a.get(), a.get(), 2, MPFR_RNDN);
            mpfr_mul(out, out, a.get(), MPFR_RNDN);
            mpfr_sin(out, out, MPFR_RNDN);
        };
        oracle::Mp s1, s0;
        psi_sin(n + 1, s1.get());
        psi_sin(n, s0.get());
        mpfr_sub(b.get(), s1.get(), s0.get(), MPFR_RNDN);
        const double want = mpfr_get_d(b.get(), MPFR_RNDN) / (M_PI * static_cast<double>(count));
        CHECK(std::abs(w.at(n) - want) < 1e-15);
        CHECK(std::abs(w.at(n)) <= 2.0 / (M_PI * static_cast<double>(count)) + 1e-18);
        sup = std::max(sup, std::abs(w.at(n)));
    }
    CHECK(std::abs(w.sup - sup) < 1e-18);
}

TEST_CASE("fourier kernel vanishes when psi is integer-valued") {
    // c = 1 is outside the parameter range, so build the parameters by hand.
    KernelParams p;
    p.c = HighReal(1.0);
    p.eps0 = HighReal(0.0);
    p.sigma0 = HighReal(0.5);
    const WeightSeq w = fourier_kernel(p, HighReal(1.0), 64);
    for (double v : w.values) CHECK(std::abs(v) < 1e-15);
}

TEST_CASE("fourier kernel bound for the desk-scale case") {
    const KernelParams p = kernel_params(kC);
    const HighReal L(4.0);
    const std::int64_t N = 1000000;
    const std::int64_t count = lambda_count(L, kC, N).count;
    const WeightSeq w = fourier_kernel(p, L, N, count);
    CHECK(std::isfinite(w.at(1)));
    CHECK(std::abs(w.at(1)) <= 2.0 * p.M(N) / (M_PI * static_cast<double>(count)));
}

TEST_CASE("dyadic_split") {
    WeightSeq w;
    w.begin = 1;
    for (int n = 1; n <= 8; ++n) w.values.push_back(n * 1.5);
    const auto parts = dyadic_split(w, 8);
    REQUIRE(parts.size() == 4);
    const std::vector<std::pair<std::int64_t, std::int64_t>> blocks{{1, 2}, {2, 4}, {4, 8}, {8, 9}};
    for (std::size_t j = 0; j < 4; ++j) {
        for (std::int64_t n = 1; n <= 8; ++n) {
            const bool inside = n >= blocks[j].first && n < blocks[j].second;
            CHECK(parts[j].at(n) == (inside ? w.at(n) : 0.0));
        }
    }
    for (std::int64_t n = 1; n <= 8; ++n) {
        double s = 0.0;
        for (const auto& p : parts) s += p.at(n);
        CHECK(s == w.at(n));
    }
    WeightSeq one;
    one.begin = 1;
    one.values = {2.0};
    CHECK(dyadic_split(one, 1).size() == 1);
}

TEST_CASE("mu_N and r_H examples and sums") {
    CHECK(mu_N(3, 0) == Rational(1, 3));
    CHECK(mu_N(3, 2) == Rational(1, 9));
    CHECK(mu_N(3, 5) == Rational(0, 1));
    for (std::int64_t N : {1, 2, 7, 100}) {
        oracle::Fraction total;
        for (std::int64_t n = -N; n <= N; ++n) {
            const Rational r = mu_N(N, n);
            total.add(r.num, r.den);
        }
        CHECK(total.num == 1);
        CHECK(total.den == 1);
    }
    const std::vector<std::int64_t> H{1, 2, 3};
    CHECK(r_H(H, 0) == 3);
    CHECK(r_H(H, 1) == 2);
    CHECK(r_H(H, -2) == 1);
    std::mt19937_64 rng(6);
    for (int t = 0; t < 50; ++t) {
        std::set<std::int64_t> hs;
        while (hs.size() < 1 + rng() % 8) hs.insert(static_cast<std::int64_t>(rng() % 21) - 10);
        const std::vector<std::int64_t> Hv(hs.begin(), hs.end());
        std::int64_t total = 0;
        for (std::int64_t h = -20; h <= 20; ++h) total += r_H(Hv, h);
        CHECK(total == static_cast<std::int64_t>(Hv.size() * Hv.size()));
    }
}

TEST_CASE("delta_diff examples") {
    FiniteSeq ones;
    ones.begin = 0;
    ones.values.assign(10, Complex(1.0, 0.0));
    const FiniteSeq d = delta_diff(ones, {2, 3});
    CHECK(d.values.size() == 5);
    for (const auto& v : d.values) CHECK(v == Complex(1.0, 0.0));

    const double theta = std::sqrt(2.0) - 1.0;
    FiniteSeq lin, quad;
    lin.begin = quad.begin = -50;
    for (int x = -50; x <= 50; ++x) {
        lin.values.push_back(std::polar(1.0, kTwoPi * theta * x));
        quad.values.push_back(std::polar(1.0, kTwoPi * theta * x * x));
    }
    const FiniteSeq dl = delta_diff(lin, {3});
    for (std::int64_t x = dl.begin; x < dl.end(); ++x) {
        CHECK(std::abs(dl.at(x) - std::polar(1.0, -kTwoPi * theta * 3)) < 1e-10);
    }
    const FiniteSeq dq = delta_diff(quad, {2, 5});
    CHECK(dq.values.size() > 80);
    for (std::int64_t x = dq.begin; x < dq.end(); ++x) {
        CHECK(std::abs(dq.at(x) - std::polar(1.0, kTwoPi * 2.0 * theta * 2 * 5)) < 1e-9);
        CHECK(std::abs(std::abs(dq.at(x)) - 1.0) < 1e-12);
    }
}

TEST_CASE("van der Corput examples") {
    FiniteSeq ones;
    ones.begin = 1;
    ones.values.assign(10, Complex(1.0, 0.0));
    const VdcResult r = vdc_check(ones, {1, 2, 3, 4, 5});
    CHECK(r.lhs == 100.0);
    CHECK(r.difference_set_size == 14);
    CHECK(r.correlation == 210.0);
    CHECK(std::abs(r.rhs - 117.6) < 1e-12);

    FiniteSeq spike;
    spike.begin = 0;
    spike.values = {Complex(1.0, 0.0)};
    const VdcResult s = vdc_check(spike, {0});
    CHECK(s.lhs == 1.0);
    CHECK(s.rhs == 1.0);
    CHECK_THROWS_AS(vdc_check(spike, {}), DomainError);
}

TEST_CASE("van der Corput inequality on random instances") {
    std::mt19937_64 rng(17);
    for (int t = 0; t < 500; ++t) {
        const FiniteSeq g = random_seq(rng, 32);
        std::vector<std::int64_t> H(1 + rng() % 8);
        for (auto& h : H) h = static_cast<std::int64_t>(rng() % 21) - 10;
        const VdcResult r = vdc_check(g, H);
        CHECK(r.lhs <= r.rhs * (1.0 + 0x1p-40));
        // brute-force lhs
        Complex sum;
        for (const auto& v : g.values) sum += v;
        CHECK(std::abs(r.lhs - std::norm(sum)) < 1e-9 * (1.0 + r.lhs));
    }
}

TEST_CASE("two-sided correlation evaluator reports a finite ratio") {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    auto seq = [&] {
        FiniteSeq f;
        f.begin = -40;
        for (int i = 0; i < 200; ++i) f.values.push_back(std::polar(1.0, kTwoPi * u(rng)));
        return f;
    };
    const TwoSided t = correlation_both_sides(seq(), seq(), seq(), seq(), 2, 3, 8);
    CHECK(std::isfinite(t.lhs));
    CHECK(t.lhs >= 0.0);
    CHECK_THROWS_AS(correlation_both_sides(seq(), seq(), seq(), seq(), 2, 3, 17), DomainError);
}
