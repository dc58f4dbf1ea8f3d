#pragma once

// Suspension flows over a system: S^t(x, s) = (T^floor(t+s) x, {t+s}), and the
// m-parameter version driven by a commuting tuple T_1..T_m.

#include <array>
#include <vector>

#include "ergolab/dynsys.hpp"

namespace ergolab {

struct FlowPoint {
    static constexpr std::size_t kMaxDim = 8;

    SystemPoint base;
    std::array<HighReal, kMaxDim> heights{};
    int m = 1;
};

class SuspensionFlow {
public:
    /// One-parameter flow over T.
    explicit SuspensionFlow(MPSystem system);
    /// m-parameter flow over the natural commuting tuple of `system`.
    static SuspensionFlow multi(MPSystem system);

    const MPSystem& system() const { return system_; }
    int dim() const { return m_; }

private:
    SuspensionFlow(MPSystem system, int m) : system_(std::move(system)), m_(m) {}
    MPSystem system_;
    int m_;
};

/// S^t p. Heights are reduced mod 1 on every application.
FlowPoint flow_apply(const SuspensionFlow& flow, const std::vector<HighReal>& t, const FlowPoint& p);

/// S^t p with every t_i given as a precomputed floor/fraction pair, so the
/// integer part is decided once by the caller. No validation.
void flow_apply_split(const SuspensionFlow& flow, const FloorResult* t, FlowPoint& p);

/// Integer carry floor(t + s) in {0, 1} for t, s in [0, 1); equals 1 exactly
/// when t lies in L_1(s) = [1 - s, 1).
int height_carry(const HighReal& t, const HighReal& s);

/// Height-independent lift f~(x, s) = f(x).
class FlowObservable {
public:
    explicit FlowObservable(Observable base) : base_(std::move(base)) {}
    Complex evaluate(const FlowPoint& p) const { return base_.evaluate(p.base); }
    const Observable& base() const { return base_; }
    double bound() const { return base_.bound(); }

private:
    Observable base_;
};

FlowObservable lift_observable(const Observable& obs);

/// Points of the suspension space: base points from sample_points and
/// independent uniform heights.
std::vector<FlowPoint> sample_flow_points(const SuspensionFlow& flow, std::size_t count,
                                          std::uint64_t seed);

}  // namespace ergolab
