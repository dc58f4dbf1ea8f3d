#include "ergolab/suspension.hpp"

#include <random>

namespace ergolab {

SuspensionFlow::SuspensionFlow(MPSystem system) : system_(std::move(system)), m_(1) {}

SuspensionFlow SuspensionFlow::multi(MPSystem system) {
    const int m = system.tuple_size();
    if (m > static_cast<int>(FlowPoint::kMaxDim)) throw DomainError("flow dimension exceeds 8");
    return SuspensionFlow(std::move(system), m);
}

int height_carry(const HighReal& t, const HighReal& s) {
    return t + s >= HighReal(1.0) ? 1 : 0;
}

void flow_apply_split(const SuspensionFlow& flow, const FloorResult* t, FlowPoint& p) {
    for (int i = 0; i < flow.dim(); ++i) {
        const HighReal h = t[i].frac_value + p.heights[i];
        const int carry = h >= HighReal(1.0) ? 1 : 0;
        p.heights[i] = carry ? h - HighReal(1.0) : h;
        const std::int64_t k = t[i].floor_value + carry;
        if (flow.dim() == 1) {
            power_apply_inplace(flow.system(), k, p.base);
        } else {
            component_apply_inplace(flow.system(), i, k, p.base);
        }
    }
}

FlowPoint flow_apply(const SuspensionFlow& flow, const std::vector<HighReal>& t, const FlowPoint& p) {
    if (static_cast<int>(t.size()) != flow.dim() || p.m != flow.dim()) {
        throw DomainError("flow time and point dimensions must match the flow");
    }
    check_point(flow.system(), p.base);
    std::array<FloorResult, FlowPoint::kMaxDim> split{};
    for (int i = 0; i < flow.dim(); ++i) {
        if (!t[i].is_finite()) throw DomainError("non-finite flow time");
        split[i] = split_floor(t[i]);
        if (split[i].floor_value > kMaxPower || split[i].floor_value < -kMaxPower) {
            throw DomainError("flow time exceeds 2^62");
        }
    }
    FlowPoint q = p;
    flow_apply_split(flow, split.data(), q);
    return q;
}

FlowObservable lift_observable(const Observable& obs) { return FlowObservable(obs); }

std::vector<FlowPoint> sample_flow_points(const SuspensionFlow& flow, std::size_t count,
                                          std::uint64_t seed) {
    const auto base = sample_points(flow.system(), count, seed);
    std::mt19937_64 rng(seed ^ 0x5bd1e9955bd1e995ULL);
    std::vector<FlowPoint> out(count);
    for (std::size_t j = 0; j < count; ++j) {
        out[j].base = base[j];
        out[j].m = flow.dim();
        for (int i = 0; i < flow.dim(); ++i) {
            const double hi = static_cast<double>(rng() >> 11) * 0x1p-53;
            const double lo = static_cast<double>(rng() >> 11) * 0x1p-106;
            out[j].heights[i] = HighReal::from_parts(hi, lo);
        }
    }
    return out;
}

}  // namespace ergolab
