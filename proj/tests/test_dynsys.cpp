#include <doctest.h>

#include <cmath>
#include <random>

#include "ergolab/dynsys.hpp"
#include "ergolab/expr.hpp"
#include "oracle.hpp"

using namespace ergolab;

namespace {

SystemPoint circle_point(double x) {
    SystemPoint p;
    p.reals[0] = HighReal(x);
    p.n_reals = 1;
    return p;
}

SystemPoint skew_point(double x, double y) {
    SystemPoint p;
    p.reals[0] = HighReal(x);
    p.reals[1] = HighReal(y);
    p.n_reals = 2;
    return p;
}

// Distance on the circle between two HighReal coordinates.
double circ_dist(const HighReal& a, const HighReal& b) {
    const double d = frac(a - b).to_double();
    return std::min(d, 1.0 - d);
}

double max_coord_dist(const SystemPoint& a, const SystemPoint& b) {
    double d = 0.0;
    for (int i = 0; i < a.n_reals; ++i) d = std::max(d, circ_dist(a.reals[i], b.reals[i]));
    return d;
}

std::vector<MPSystem> catalog() {
    const HighReal t = parse_scalar("sqrt(2)-1").value;
    return {MPSystem::circle_rotation(t),
            MPSystem::torus_translation({t, parse_scalar("sqrt(3)-1").value, HighReal(0.125)}),
            MPSystem::skew_product(t),
            MPSystem::bernoulli_shift(3, 42),
            MPSystem::finite_cycle(12),
            MPSystem::product({MPSystem::circle_rotation(t), MPSystem::finite_cycle(5),
                               MPSystem::bernoulli_shift(2, 9)})};
}

}  // namespace

TEST_CASE("power_apply examples") {
    const auto rot = MPSystem::circle_rotation(HighReal(0.3));
    CHECK(std::abs(power_apply(rot, 2, circle_point(0.5)).reals[0].to_double() - 0.1) < 1e-15);

    const HighReal th = parse_scalar("sqrt(2)-1").value;
    const auto skew = MPSystem::skew_product(th);
    const SystemPoint p = skew_point(0.2, 0.7);
    const SystemPoint q = power_apply(skew, 3, p);
    CHECK(circ_dist(q.reals[0], HighReal(0.2) + HighReal(3.0) * th) < 1e-25);
    CHECK(circ_dist(q.reals[1], HighReal(0.7) + HighReal(3.0) * HighReal(0.2) + HighReal(3.0) * th) < 1e-25);

    for (const auto& s : catalog()) {
        const auto pts = sample_points(s, 3, 1);
        for (const auto& x : pts) CHECK(power_apply(s, 0, x) == x);
    }
}

TEST_CASE("skew product closed form matches step-by-step iteration") {
    const HighReal th = parse_scalar("sqrt(5)-2").value;
    const auto skew = MPSystem::skew_product(th);
    SystemPoint step = skew_point(0.31, 0.77);
    const SystemPoint start = step;
    for (int k = 1; k <= 500; ++k) {
        step = power_apply(skew, 1, step);
        CHECK(max_coord_dist(step, power_apply(skew, k, start)) < 1e-25);
    }
}

TEST_CASE("group law and invertibility on every system kind") {
    std::mt19937_64 rng(21);
    for (const auto& s : catalog()) {
        const auto pts = sample_points(s, 1000, 5);
        double worst = 0.0;
        for (const auto& x : pts) {
            const auto j = static_cast<std::int64_t>(rng() % 2000001) - 1000000;
            const auto k = static_cast<std::int64_t>(rng() % 2000001) - 1000000;
            const SystemPoint a = power_apply(s, j + k, x);
            const SystemPoint b = power_apply(s, j, power_apply(s, k, x));
            worst = std::max(worst, max_coord_dist(a, b));
            for (int i = 0; i < a.n_residues; ++i) CHECK(a.residues[i] == b.residues[i]);
            for (int i = 0; i < a.n_shifts; ++i) CHECK(a.offsets[i] == b.offsets[i]);
            const SystemPoint back = power_apply(s, -k, power_apply(s, k, x));
            worst = std::max(worst, max_coord_dist(back, x));
            for (int i = 0; i < x.n_residues; ++i) CHECK(back.residues[i] == x.residues[i]);
            for (int i = 0; i < x.n_shifts; ++i) CHECK(back.offsets[i] == x.offsets[i]);
        }
        CHECK_MESSAGE(worst < 0x1p-80, s.name());
    }
}

TEST_CASE("coordinates stay canonical after large powers") {
    for (const auto& s : catalog()) {
        for (const auto& x : sample_points(s, 50, 3)) {
            for (std::int64_t k : {std::int64_t{-1} << 40, std::int64_t{-7}, std::int64_t{1} << 45}) {
                const SystemPoint y = power_apply(s, k, x);
                check_point(s, y);
                for (int i = 0; i < y.n_reals; ++i) {
                    CHECK(y.reals[i] >= HighReal(0.0));
                    CHECK(y.reals[i] < HighReal(1.0));
                }
            }
        }
    }
    CHECK_THROWS_AS(power_apply(catalog()[0], kMaxPower + 1, circle_point(0.1)), DomainError);
}

TEST_CASE("product tuple components commute") {
    const auto s = catalog()[5];
    REQUIRE(s.tuple_size() == 3);
    for (const auto& x : sample_points(s, 200, 4)) {
        for (int i = 0; i < 3; ++i) {
            for (int j = 0; j < 3; ++j) {
                if (i == j) continue;  // same factor: group law, checked above
                const SystemPoint a = component_apply(s, i, 17, component_apply(s, j, -5, x));
                const SystemPoint b = component_apply(s, j, -5, component_apply(s, i, 17, x));
                CHECK(a == b);
            }
        }
    }
    const auto torus = catalog()[1];
    CHECK(torus.tuple_size() == 3);
    const SystemPoint x = sample_points(torus, 1, 1)[0];
    CHECK(component_apply(torus, 0, 3, component_apply(torus, 2, 4, x)) ==
          component_apply(torus, 2, 4, component_apply(torus, 0, 3, x)));
}

TEST_CASE("mismatched points are rejected") {
    const auto rot = catalog()[0];
    const auto cyc = catalog()[4];
    SystemPoint r;
    r.residues[0] = 3;
    r.n_residues = 1;
    CHECK_THROWS_AS(power_apply(rot, 1, r), TypeError);
    CHECK_THROWS_AS(power_apply(cyc, 1, circle_point(0.2)), TypeError);
    const Observable f = Observable::character(rot, {1});
    CHECK_THROWS_AS(observe(f, r), TypeError);
    CHECK_THROWS_AS(Observable::character(rot, {1, 2}), TypeError);
    CHECK_THROWS_AS(Observable::finite_table(rot, {1.0}), TypeError);
    CHECK_THROWS_AS(Observable::bernoulli_mean_zero(rot), TypeError);
}

TEST_CASE("observe examples") {
    const auto rot = catalog()[0];
    CHECK(observe(Observable::constant(rot, 1.0), circle_point(0.9)) == Complex(1.0, 0.0));
    CHECK(observe(Observable::character(rot, {1}), circle_point(0.25)) == Complex(0.0, 1.0));
    CHECK(observe(Observable::character(rot, {1}).conj(), circle_point(0.25)) == Complex(0.0, -1.0));

    const auto bern = MPSystem::bernoulli_shift(2, 77);
    const Observable b = Observable::bernoulli_mean_zero(bern);
    SystemPoint x = sample_points(bern, 1, 1)[0];
    for (int k = 0; k < 64; ++k) {
        const SystemPoint y = power_apply(bern, k, x);
        const int sym = bernoulli_symbol(y.seeds[0], y.offsets[0], 2);
        CHECK(observe(b, y).real() == (sym == 1 ? 0.5 : -0.5));
    }

    const auto cyc = MPSystem::finite_cycle(4);
    const Observable t = Observable::finite_table(cyc, {1.0, 2.0, 3.0, 4.0});
    SystemPoint r;
    r.n_residues = 1;
    for (int i = 0; i < 4; ++i) {
        r.residues[0] = i;
        CHECK(observe(t, r).real() == i + 1.0);
        // character on Z/4 lands exactly on the quarter turns
        const Complex e = observe(Observable::character(cyc, {1}), r);
        const Complex want[] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
        CHECK(e == want[i]);
    }
}

TEST_CASE("observables respect their bounds") {
    for (const auto& s : catalog()) {
        std::vector<Observable> obs{Observable::constant(s, Complex(0.6, -0.8))};
        std::vector<std::int64_t> freq(static_cast<std::size_t>(s.angle_count()), 3);
        if (!freq.empty()) obs.push_back(Observable::character(s, freq));
        if (s.is_finite()) {
            std::vector<Complex> vals(static_cast<std::size_t>(*s.period()));
            for (std::size_t i = 0; i < vals.size(); ++i) vals[i] = Complex(std::sin(i * 1.0), std::cos(i * 3.0));
            obs.push_back(Observable::finite_table(s, vals));
        }
        for (const auto& f : obs) {
            for (const auto& x : sample_points(s, 500, 8)) CHECK(std::abs(observe(f, x)) <= f.bound() + 1e-15);
        }
    }
}

TEST_CASE("sample_points: support, determinism and uniformity") {
    const auto cyc = MPSystem::finite_cycle(4);
    for (const auto& x : sample_points(cyc, 4, 99)) {
        CHECK(x.residues[0] >= 0);
        CHECK(x.residues[0] < 4);
    }
    const auto rot = catalog()[0];
    const auto a = sample_points(rot, 100, 7);
    const auto b = sample_points(rot, 100, 7);
    CHECK(a == b);
    const auto many = sample_points(rot, 10000, 1);
    double mean = 0.0;
    for (const auto& x : many) mean += x.reals[0].to_double();
    CHECK(std::abs(mean / 10000.0 - 0.5) < 0.02);
}

TEST_CASE("pushforward of a sample stays uniform on 16 cells") {
    for (const auto& s : {catalog()[0], catalog()[2]}) {
        const auto pts = sample_points(s, 10000, 13);
        std::array<int, 16> cells{};
        for (const auto& x : pts) {
            const SystemPoint y = power_apply(s, 123457, x);
            int cell;
            if (y.n_reals == 1) {
                cell = static_cast<int>(y.reals[0].to_double() * 16.0);
            } else {
                cell = static_cast<int>(y.reals[0].to_double() * 4.0) * 4 + static_cast<int>(y.reals[1].to_double() * 4.0);
            }
            ++cells[static_cast<std::size_t>(cell)];
        }
        for (int c : cells) CHECK(std::abs(c / 10000.0 - 1.0 / 16.0) < 0.05);
    }
}

TEST_CASE("bernoulli symbols look iid uniform") {
    std::array<int, 3> counts{};
    int pairs_equal = 0;
    for (std::int64_t i = 0; i < 30000; ++i) {
        const int a = bernoulli_symbol(5, i, 3);
        ++counts[static_cast<std::size_t>(a)];
        pairs_equal += a == bernoulli_symbol(5, i + 1, 3);
    }
    for (int c : counts) CHECK(std::abs(c / 30000.0 - 1.0 / 3.0) < 0.02);
    CHECK(std::abs(pairs_equal / 30000.0 - 1.0 / 3.0) < 0.02);
}

TEST_CASE("system metadata") {
    const auto s = catalog();
    CHECK(s[4].period().value() == 12);
    CHECK(s[4].is_finite());
    CHECK_FALSE(s[0].is_finite());
    CHECK(MPSystem::product({MPSystem::finite_cycle(4), MPSystem::finite_cycle(6)}).period().value() == 12);
    CHECK(s[2].angle_count() == 2);
    CHECK(s[1].angle_count() == 3);
    CHECK_THROWS_AS(MPSystem::finite_cycle(0), DomainError);
    CHECK_THROWS_AS(MPSystem::bernoulli_shift(1, 0), DomainError);
}
