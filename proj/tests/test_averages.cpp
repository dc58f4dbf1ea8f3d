#include <doctest.h>

#include <cmath>

#include "ergolab/averages.hpp"
#include "ergolab/expr.hpp"
#include "oracle.hpp"

using namespace ergolab;

namespace {

const HighReal kTheta = parse_scalar("sqrt(2)-1").value;
const HighReal kC = parse_scalar("1.02").value;

AverageSpec rotation_spec(std::vector<std::int64_t> schedule, std::int64_t f_freq = 1, std::int64_t g_freq = -1) {
    const auto s = MPSystem::circle_rotation(kTheta);
    return AverageSpec{s, Observable::character(s, {f_freq}), Observable::character(s, {g_freq}),
                       std::move(schedule), 4, 3, false, {}};
}

TBParams tb(const char* a, const char* b) { return TBParams{parse_scalar(a), parse_scalar(b), kC, {}, {}, {}}; }

struct ThreadGuard {
    int saved = thread_count();
    ~ThreadGuard() { set_thread_count(saved); }
};

}  // namespace

TEST_CASE("lacunary schedule") {
    const auto s = lacunary_schedule(8, 1000000);
    CHECK(s.front() == 1);
    CHECK(s.back() == 1000000);
    for (std::size_t i = 1; i < s.size(); ++i) CHECK(s[i] > s[i - 1]);
    // every entry below n_max is floor(2^(m/8)) for some m
    for (std::size_t i = 0; i + 1 < s.size(); ++i) {
        bool found = false;
        for (int m = 0; m < 200 && !found; ++m) found = static_cast<std::int64_t>(std::floor(std::pow(2.0, m / 8.0) + 1e-12)) == s[i];
        CHECK(found);
    }
    CHECK(lacunary_schedule(1, 10) == std::vector<std::int64_t>{1, 2, 4, 8, 10});
    CHECK(lacunary_schedule(1, 16, 3) == std::vector<std::int64_t>{4, 8, 16});
}

TEST_CASE("constant observables give the constant series") {
    const auto s = MPSystem::skew_product(kTheta);
    AverageSpec spec{s, Observable::constant(s, 1.0), Observable::constant(s, 1.0), lacunary_schedule(4, 5000), 3, 1,
                     false, {}};
    const AverageSeries r = avg_nc_double(spec, tb("2", "1"));
    for (const auto& v : r.mean) CHECK(v == Complex(1.0, 0.0));
    const AverageSeries l = avg_linear_double(spec, LinearParams{parse_scalar("sqrt(2)"), parse_scalar("3"), parse_scalar("0.5"), 1});
    for (const auto& v : l.mean) CHECK(v == Complex(1.0, 0.0));
}

TEST_CASE("identity system gives f(x) g(x)") {
    const auto s = MPSystem::finite_cycle(1);
    AverageSpec spec{s, Observable::finite_table(s, {Complex(0.5, 0.25)}), Observable::finite_table(s, {Complex(2.0, 0.0)}),
                     {1, 10, 1000}, 2, 1, false, {}};
    const AverageSeries r = avg_nc_double(spec, tb("sqrt(2)", "1"));
    for (const auto& row : r.per_point) {
        for (const auto& v : row) CHECK(v == Complex(1.0, 0.5));
    }
}

TEST_CASE("linear diagonal case is a Birkhoff average of f g") {
    const auto s = MPSystem::finite_cycle(7);
    const std::vector<Complex> tf{1, 2, 3, 4, 5, 6, 7}, tg{0.5, -1, 2, 0, 1, 3, -2};
    std::vector<Complex> prod(7);
    for (int i = 0; i < 7; ++i) prod[i] = tf[i] * tg[i];
    AverageSpec spec{s, Observable::finite_table(s, tf), Observable::finite_table(s, tg), {5, 70, 701}, 4, 2, false, {}};
    const AverageSeries a = avg_linear_double(spec, LinearParams{Coefficient::integer(1), Coefficient::integer(1)});
    AverageSpec single{s, Observable::finite_table(s, prod), std::nullopt, {5, 70, 701}, 4, 2, false, {}};
    const SupProbe b = sup_average_probe(single, {Coefficient::integer(1)}, HighReal(1.0));
    for (std::size_t j = 0; j < a.per_point.size(); ++j) {
        for (std::size_t k = 0; k < 3; ++k) CHECK(a.per_point[j][k] == b.series.per_point[j][k]);
    }
    // N a multiple of M: the exact cyclic mean
    Complex mean;
    for (const auto& v : prod) mean += v;
    CHECK(a.mean[1] == mean / 7.0);
}

TEST_CASE("linear rotation average obeys the geometric-sum bound") {
    const auto s = MPSystem::circle_rotation(kTheta);
    AverageSpec spec{s, Observable::character(s, {1}), Observable::constant(s, 1.0), {100000}, 8, 1, false, {}};
    const AverageSeries a = avg_linear_double(spec, LinearParams{Coefficient::integer(1), Coefficient::integer(1)});
    const double t = kTheta.to_double();
    const double dist = std::min(t, 1.0 - t);
    for (const auto& row : a.per_point) CHECK(std::abs(row[0]) <= 2.0 / (100000.0 * dist));
}

TEST_CASE("incremental checkpoints equal fresh runs") {
    const std::vector<std::int64_t> sched{10, 137, 5000, 20000};
    const AverageSeries all = avg_nc_double(rotation_spec(sched), tb("sqrt(3)", "1"));
    for (std::size_t k = 0; k < sched.size(); ++k) {
        const AverageSeries one = avg_nc_double(rotation_spec({sched[k]}), tb("sqrt(3)", "1"));
        for (std::size_t j = 0; j < one.per_point.size(); ++j) CHECK(one.per_point[j][0] == all.per_point[j][k]);
        CHECK(one.boundary_flags == all.flags_at[k]);
    }
}

TEST_CASE("conjugation symmetry is exact") {
    const auto s = MPSystem::skew_product(kTheta);
    const Observable f = Observable::character(s, {1, 2}), g = Observable::character(s, {0, -1});
    const std::vector<std::int64_t> sched{100, 1000, 30000};
    AverageSpec a{s, f, g, sched, 4, 9, false, {}};
    AverageSpec b{s, g.conj(), f.conj(), sched, 4, 9, false, {}};
    const AverageSeries x = avg_nc_double(a, tb("sqrt(2)", "-1/3"));
    const AverageSeries y = avg_nc_double(b, tb("-1/3", "sqrt(2)"));
    for (std::size_t j = 0; j < x.per_point.size(); ++j) {
        for (std::size_t k = 0; k < sched.size(); ++k) CHECK(y.per_point[j][k] == std::conj(x.per_point[j][k]));
    }
}

TEST_CASE("averages never exceed the observable bounds") {
    const auto s = MPSystem::product({MPSystem::circle_rotation(kTheta), MPSystem::finite_cycle(6)});
    AverageSpec spec{s, Observable::character(s, {2, 1}), Observable::constant(s, Complex(0.0, 0.7)),
                     lacunary_schedule(8, 50000), 8, 4, false, {}};
    for (const auto& r : {avg_nc_double(spec, tb("2", "-1")),
                          avg_linear_double(spec, LinearParams{parse_scalar("sqrt(5)"), parse_scalar("-2")})}) {
        for (const auto& row : r.per_point) {
            for (const auto& v : row) CHECK(std::abs(v) <= r.bound * (1.0 + 1e-15));
        }
    }
}

TEST_CASE("scope checks") {
    CHECK_THROWS_AS(avg_nc_double(rotation_spec({100}), TBParams{parse_scalar("2"), parse_scalar("-2"), kC, {}, {}, {}}), ScopeError);
    CHECK_THROWS_AS(avg_nc_double(rotation_spec({100}), TBParams{parse_scalar("2"), parse_scalar("1"), HighReal(1.1), {}, {}, {}}), ScopeError);
    AverageSpec over = rotation_spec({100});
    over.override_scope = true;
    const AverageSeries r = avg_nc_double(over, TBParams{parse_scalar("2"), parse_scalar("1"), HighReal(1.5), {}, {}, {}});
    CHECK_FALSE(r.warnings.empty());
    CHECK_THROWS_AS(avg_nc_double(rotation_spec({100, 50}), tb("2", "1")), DomainError);

    const auto torus = MPSystem::torus_translation({kTheta, HighReal(0.3)});
    AverageSpec t{torus, Observable::character(torus, {1, 1}), Observable::character(torus, {1, 0}), {100}, 2, 1, false, {}};
    auto tc = [&](std::vector<const char*> b, std::vector<const char*> d) {
        TCParams p;
        for (auto x : b) p.b.push_back(parse_scalar(x));
        for (auto x : d) p.d.push_back(parse_scalar(x));
        p.c = kC;
        return avg_multi_TC(t, p);
    };
    CHECK_THROWS_AS(tc({"1", "2"}, {"1", "3"}), ScopeError);
    CHECK_THROWS_AS(tc({"1", "2"}, {"1", "2"}), ScopeError);
    CHECK_NOTHROW(tc({"1", "2"}, {"-3", "-6"}));
    CHECK_THROWS_AS(tc({"1"}, {"2"}), DomainError);
}

TEST_CASE("TC with one map reduces to the TB average") {
    const std::vector<std::int64_t> sched{10, 1000, 40000};
    AverageSpec spec = rotation_spec(sched);
    TCParams p{{parse_scalar("sqrt(2)")}, {parse_scalar("-1")}, kC, {}, {}, {}};
    const AverageSeries a = avg_multi_TC(spec, p);
    const AverageSeries b = avg_nc_double(spec, tb("sqrt(2)", "-1"));
    CHECK(a.per_point == b.per_point);
}

TEST_CASE("TC on a torus factorizes onto the first coordinate") {
    const HighReal t2 = parse_scalar("sqrt(3)-1").value;
    const auto torus = MPSystem::torus_translation({kTheta, t2});
    const auto circle = MPSystem::circle_rotation(kTheta);
    const std::vector<std::int64_t> sched{100, 10000, 100000};
    AverageSpec t{torus, Observable::character(torus, {1, 0}), Observable::character(torus, {-1, 0}), sched, 6, 2, false, {}};
    const auto tpts = sample_points(torus, 6, 2);
    AverageSpec c{circle, Observable::character(circle, {1}), Observable::character(circle, {-1}), sched, 6, 2, false, {}};
    for (const auto& x : tpts) {
        FlowPoint fp, cp;
        fp.base = x;
        cp.base.reals[0] = x.reals[0];
        cp.base.n_reals = 1;
        t.at_points.push_back(fp);
        c.at_points.push_back(cp);
    }
    TCParams p{{Coefficient::integer(1), Coefficient::integer(0)}, {Coefficient::integer(2), Coefficient::integer(0)}, kC, {}, {}, {}};
    const AverageSeries a = avg_multi_TC(t, p);
    const AverageSeries b = avg_nc_double(c, tb("1", "2"));
    for (std::size_t j = 0; j < tpts.size(); ++j) {
        for (std::size_t k = 0; k < sched.size(); ++k) CHECK(std::abs(a.per_point[j][k] - b.per_point[j][k]) < 0x1p-40);
    }
}

TEST_CASE("B, A and E in the full-density case") {
    const auto s = MPSystem::circle_rotation(kTheta);
    AverageSpec spec{s, Observable::character(s, {1}), Observable::character(s, {-1}), {10, 100, 1000}, 4, 1, false, {}};
    BAEParams p;
    p.alpha = parse_scalar("sqrt(2)");
    p.beta = Coefficient::integer(1);
    p.c = HighReal(1.0);
    p.L = HighReal(1.0);
    p.variant = BAEVariant::B;
    const AverageSeries B = avg_BAE_family(spec, p);
    p.variant = BAEVariant::A;
    const AverageSeries A = avg_BAE_family(spec, p);
    p.variant = BAEVariant::E;
    const AverageSeries E = avg_BAE_family(spec, p);
    CHECK(B.per_point == A.per_point);
    for (const auto& row : E.per_point) {
        for (const auto& v : row) CHECK(v == Complex(0.0, 0.0));
    }
}

TEST_CASE("B average matches a direct flow computation") {
    // ir case with L = 4: Lambda = {floor(4 n^c)}, flow steps of beta / L.
    const auto s = MPSystem::finite_cycle(9);
    std::vector<Complex> tf(9), tg(9);
    for (int i = 0; i < 9; ++i) {
        tf[i] = Complex(i % 3, 1.0);
        tg[i] = Complex(1.0, (i * 5) % 4);
    }
    AverageSpec spec{s, Observable::finite_table(s, tf), Observable::finite_table(s, tg), {3000}, 3, 7, false, {}};
    BAEParams p;
    p.alpha = parse_scalar("3/2");
    p.beta = Coefficient::integer(1);
    p.c = kC;
    p.L = HighReal(4.0);
    p.variant = BAEVariant::B;
    const AverageSeries B = avg_BAE_family(spec, p);
    const auto pts = sample_flow_points(SuspensionFlow(s), 3, 7);
    std::vector<char> member(3001, 0);
    std::int64_t count = 0;
    for (std::int64_t n = 1;; ++n) {
        const std::int64_t v = oracle::floor_pow("4", "1.02", n);
        if (v > 3000) break;
        if (v >= 1 && !member[v]) {
            member[v] = 1;
            ++count;
        }
    }
    for (std::size_t j = 0; j < pts.size(); ++j) {
        const double h = pts[j].heights[0].to_double();
        const std::int64_t x = pts[j].base.residues[0];
        Complex sum;
        for (std::int64_t n = 1; n <= 3000; ++n) {
            if (!member[n]) continue;
            // times m / 4 with m = floor(3n/2) and m = n; quarters are exact in binary
            const double tf_time = static_cast<double>((3 * n) / 2) / 4.0 + h;
            const double tg_time = static_cast<double>(n) / 4.0 + h;
            const auto kf = static_cast<std::int64_t>(std::floor(tf_time));
            const auto kg = static_cast<std::int64_t>(std::floor(tg_time));
            sum += tf[oracle::mod(x + kf, 9)] * tg[oracle::mod(x + kg, 9)];
        }
        CHECK(std::abs(B.per_point[j][0] - sum / static_cast<double>(count)) < 1e-12);
    }
}

TEST_CASE("empty Lambda is an error") {
    const auto s = MPSystem::circle_rotation(kTheta);
    AverageSpec spec{s, Observable::character(s, {1}), Observable::character(s, {-1}), {3}, 2, 1, false, {}};
    BAEParams p;
    p.alpha = parse_scalar("sqrt(2)");
    p.beta = Coefficient::integer(1);
    p.c = kC;
    p.L = HighReal(10.0);
    CHECK_THROWS_AS(avg_BAE_family(spec, p), DomainError);
}

TEST_CASE("W vanishes for a zero observable and for integer psi") {
    const auto s = MPSystem::circle_rotation(kTheta);
    AverageSpec spec{s, Observable::constant(s, 0.0), Observable::character(s, {-1}), {64, 1024}, 3, 1, false, {}};
    WParams p{parse_scalar("sqrt(2)"), Coefficient::integer(1), kC, HighReal(5.0)};
    const WResult a = avg_W(spec, p);
    for (double v : a.l1) CHECK(v == 0.0);

    AverageSpec one{s, Observable::character(s, {1}), Observable::character(s, {-1}), {64, 1024}, 3, 1, true, {}};
    const WResult b = avg_W(one, WParams{parse_scalar("sqrt(2)"), Coefficient::integer(1), HighReal(1.0), HighReal(1.0)});
    for (double v : b.l1) CHECK(v < 1e-14);
    CHECK_FALSE(b.warnings.empty());
    one.override_scope = false;
    CHECK_THROWS_AS(avg_W(one, WParams{parse_scalar("sqrt(2)"), Coefficient::integer(1), HighReal(1.0), HighReal(1.0)}),
                    ScopeError);
}

TEST_CASE("sup probe trivial cases") {
    const auto s = MPSystem::circle_rotation(kTheta);
    AverageSpec one{s, Observable::constant(s, 1.0), std::nullopt, lacunary_schedule(8, 1000), 4, 1, false, {}};
    const SupProbe a = sup_average_probe(one, {parse_scalar("sqrt(2)")}, kC);
    for (double v : a.per_point_sup) CHECK(v == 1.0);
    AverageSpec zero{s, Observable::constant(s, 0.0), std::nullopt, lacunary_schedule(8, 1000), 4, 1, false, {}};
    CHECK(sup_average_probe(zero, {parse_scalar("sqrt(2)")}, kC).lp_mean == 0.0);
    AverageSpec chr{s, Observable::character(s, {1}), std::nullopt, lacunary_schedule(8, 100000), 8, 1, false, {}};
    CHECK(sup_average_probe(chr, {parse_scalar("sqrt(2)")}, kC).lp_mean <= 10.0);
}

TEST_CASE("oscillation") {
    CHECK(oscillation(std::vector<Complex>(9, Complex(0.3, 0.1))) == 0.0);
    auto harmonic = [](int K) {
        std::vector<Complex> v;
        for (int m = 1; m <= K; ++m) v.emplace_back(1.0 / m, 0.0);
        return oscillation(v);
    };
    CHECK(harmonic(30) < harmonic(9));
    CHECK(harmonic(300) < harmonic(30));
    CHECK_THROWS_AS(oscillation(std::vector<Complex>{1.0, 2.0}), DomainError);
}

TEST_CASE("results do not depend on the worker count") {
    ThreadGuard guard;
    AverageSpec spec = rotation_spec(lacunary_schedule(8, 60000));
    spec.points = 5;
    set_thread_count(1);
    const AverageSeries a = avg_nc_double(spec, tb("sqrt(2)", "1"));
    set_thread_count(7);
    const AverageSeries b = avg_nc_double(spec, tb("sqrt(2)", "1"));
    CHECK(a.per_point == b.per_point);
    CHECK(a.mean == b.mean);
    CHECK(a.flags_at == b.flags_at);
}

TEST_CASE("MPFR floors agree with double-double floors") {
    AverageSpec spec = rotation_spec({1000, 50000});
    TBParams p = tb("sqrt(2)", "1");
    const AverageSeries a = avg_nc_double(spec, p);
    p.alpha_mp = parse_scalar_mp("sqrt(2)", 200);
    p.beta_mp = parse_scalar_mp("1", 200);
    p.c_mp = parse_scalar_mp("1.02", 200);
    const AverageSeries b = avg_nc_double(spec, p);
    CHECK(a.per_point == b.per_point);
}

TEST_CASE("negative orbit indices") {
    const auto s = MPSystem::finite_cycle(5);
    AverageSpec spec{s, Observable::finite_table(s, {1, 2, 3, 4, 5}), Observable::finite_table(s, {1, 0, 0, 0, 0}),
                     {200}, 1, 1, false, {}};
    SystemPoint x;
    x.n_residues = 1;
    x.residues[0] = 2;
    FlowPoint fp;
    fp.base = x;
    spec.at_points = {fp};
    const AverageSeries r = avg_nc_double(spec, tb("-3/2", "1"));
    oracle::Fraction want;
    for (std::int64_t n = 1; n <= 200; ++n) {
        const std::int64_t a = oracle::floor_pow("-3/2", "1.02", n);
        const std::int64_t b = oracle::floor_pow("1", "1.02", n);
        want.add((oracle::mod(2 + a, 5) + 1) * (oracle::mod(2 + b, 5) == 0 ? 1 : 0), 200);
    }
    CHECK(r.per_point[0][0].real() == want.to_double());
}
