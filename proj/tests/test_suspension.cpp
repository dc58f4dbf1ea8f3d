#include <doctest.h>

#include <random>

#include "ergolab/expr.hpp"
#include "ergolab/suspension.hpp"

using namespace ergolab;

namespace {

FlowPoint at(const MPSystem& s, double height, std::uint64_t seed = 1) {
    FlowPoint p;
    p.base = sample_points(s, 1, seed)[0];
    p.heights[0] = HighReal(height);
    p.m = 1;
    return p;
}

double hdist(const HighReal& a, const HighReal& b) {
    const double d = frac(a - b).to_double();
    return std::min(d, 1.0 - d);
}

}  // namespace

TEST_CASE("flow_apply examples") {
    const auto s = MPSystem::finite_cycle(10);
    const SuspensionFlow flow(s);
    const FlowPoint p = at(s, 0.7);
    const FlowPoint a = flow_apply(flow, {HighReal(0.5)}, p);
    CHECK(a.base == power_apply(s, 1, p.base));
    CHECK(std::abs(a.heights[0].to_double() - 0.2) < 1e-15);
    const FlowPoint b = flow_apply(flow, {HighReal(-0.9)}, p);
    CHECK(b.base == power_apply(s, -1, p.base));
    CHECK(std::abs(b.heights[0].to_double() - 0.8) < 1e-15);
    const FlowPoint c = flow_apply(flow, {HighReal(0.0)}, p);
    CHECK(c.base == p.base);
    CHECK(c.heights[0] == p.heights[0]);
    CHECK_THROWS_AS(flow_apply(flow, {HighReal(1.0), HighReal(2.0)}, p), DomainError);
}

TEST_CASE("flow group law") {
    const HighReal th = parse_scalar("sqrt(2)-1").value;
    const auto s = MPSystem::skew_product(th);
    const SuspensionFlow flow(s);
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(-1e6, 1e6);
    const auto pts = sample_flow_points(flow, 1000, 3);
    for (const auto& p : pts) {
        const HighReal t = HighReal::from_parts(u(rng), 0.0) / HighReal(7.0);
        const HighReal v = HighReal::from_parts(u(rng), 0.0) / HighReal(3.0);
        const FlowPoint a = flow_apply(flow, {t}, flow_apply(flow, {v}, p));
        const FlowPoint b = flow_apply(flow, {t + v}, p);
        CHECK(hdist(a.heights[0], b.heights[0]) < 0x1p-80);
        // integer parts agree exactly, so the bases differ only by rounding
        CHECK(hdist(a.base.reals[0], b.base.reals[0]) < 0x1p-70);
        CHECK(hdist(a.base.reals[1], b.base.reals[1]) < 0x1p-60);
    }
}

TEST_CASE("integer times act as powers of T") {
    const auto s = MPSystem::bernoulli_shift(2, 5);
    const SuspensionFlow flow(s);
    const FlowPoint p = at(s, 0.0);
    for (std::int64_t k : {-5, 0, 3, 1000}) {
        const FlowPoint q = flow_apply(flow, {HighReal::from_int(k)}, p);
        CHECK(q.base == power_apply(s, k, p.base));
        CHECK(q.heights[0] == HighReal(0.0));
    }
}

TEST_CASE("height carry is one exactly on [1 - s, 1)") {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 10000; ++i) {
        const double s = u(rng), t = u(rng);
        CHECK(height_carry(HighReal(t), HighReal(s)) == (t >= 1.0 - s ? 1 : 0));
    }
}

TEST_CASE("multi-parameter flow uses the commuting tuple") {
    const auto s = MPSystem::torus_translation({parse_scalar("sqrt(2)-1").value, parse_scalar("sqrt(3)-1").value});
    const SuspensionFlow flow = SuspensionFlow::multi(s);
    CHECK(flow.dim() == 2);
    FlowPoint p = sample_flow_points(flow, 1, 9)[0];
    const FlowPoint q = flow_apply(flow, {HighReal(2.0), HighReal(-3.0)}, p);
    const SystemPoint want = component_apply(s, 1, -3, component_apply(s, 0, 2, p.base));
    CHECK(hdist(q.base.reals[0], want.reals[0]) < 1e-28);
    CHECK(hdist(q.base.reals[1], want.reals[1]) < 1e-28);
}

TEST_CASE("lifted observables ignore the height") {
    const auto s = MPSystem::circle_rotation(HighReal(0.1));
    const FlowObservable one = lift_observable(Observable::constant(s, 1.0));
    const FlowObservable chr = lift_observable(Observable::character(s, {1}));
    FlowPoint p;
    p.base.reals[0] = HighReal(0.25);
    p.base.n_reals = 1;
    p.heights[0] = HighReal(0.3);
    CHECK(one.evaluate(p) == Complex(1.0, 0.0));
    CHECK(chr.evaluate(p) == Complex(0.0, 1.0));
    FlowPoint r = p;
    r.heights[0] = HighReal(0.9);
    CHECK(chr.evaluate(r) == chr.evaluate(p));
}

TEST_CASE("sampled heights lie in [0, 1)") {
    const SuspensionFlow flow(MPSystem::finite_cycle(3));
    for (const auto& p : sample_flow_points(flow, 2000, 1)) {
        CHECK(p.heights[0] >= HighReal(0.0));
        CHECK(p.heights[0] < HighReal(1.0));
    }
}
