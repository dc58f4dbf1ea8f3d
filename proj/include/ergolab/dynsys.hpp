#pragma once

// Invertible measure-preserving systems with closed-form powers T^k, bounded
// observables on their points, and deterministic sampling from the invariant
// measure.

#include <array>
#include <complex>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "ergolab/precision.hpp"

namespace ergolab {

using Complex = std::complex<double>;

struct TypeError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// A point of any catalog system, stored flat so that orbit evaluation never
/// allocates. Angle coordinates (circle, torus, skew product) live in `reals`,
/// cycle residues in `residues`, and each Bernoulli factor contributes one
/// (seed, offset) pair. Product systems concatenate their factors' slots.
struct SystemPoint {
    static constexpr std::size_t kCapacity = 8;

    std::array<HighReal, kCapacity> reals{};
    std::array<std::int64_t, kCapacity> residues{};
    std::array<std::uint64_t, kCapacity> seeds{};
    std::array<std::int64_t, kCapacity> offsets{};
    std::uint8_t n_reals = 0;
    std::uint8_t n_residues = 0;
    std::uint8_t n_shifts = 0;

    friend bool operator==(const SystemPoint& a, const SystemPoint& b);
};

/// Slot counts of a system's points.
struct PointLayout {
    int reals = 0;
    int residues = 0;
    int shifts = 0;
    friend bool operator==(const PointLayout&, const PointLayout&) = default;
};

class MPSystem;

struct CircleRotation {
    HighReal theta;
};
struct TorusTranslation {
    std::vector<HighReal> theta;
};
/// (x, y) -> (x + theta, y + x) on the 2-torus.
struct SkewProduct {
    HighReal theta;
};
/// Two-sided shift on alphabet^Z; the symbol at position j of point
/// (seed, offset) is prf(seed, offset + j).
struct BernoulliShift {
    int alphabet_size = 2;
    std::uint64_t prf_seed = 0;
};
struct FiniteCycle {
    std::int64_t modulus = 1;
};
struct ProductSystem {
    std::vector<MPSystem> factors;
};

class MPSystem {
public:
    using Kind = std::variant<CircleRotation, TorusTranslation, SkewProduct, BernoulliShift,
                              FiniteCycle, ProductSystem>;

    static MPSystem circle_rotation(HighReal theta);
    static MPSystem torus_translation(std::vector<HighReal> theta);
    static MPSystem skew_product(HighReal theta);
    static MPSystem bernoulli_shift(int alphabet_size, std::uint64_t prf_seed);
    static MPSystem finite_cycle(std::int64_t modulus);
    static MPSystem product(std::vector<MPSystem> factors);

    const Kind& kind() const { return kind_; }
    std::string name() const;
    PointLayout layout() const;
    /// Number of angle coordinates seen by characters and indicators
    /// (cycle residues count as r/M).
    int angle_count() const;
    /// Number of maps T_1..T_m in the natural commuting tuple: the coordinate
    /// translations of a torus, the factor maps of a product, otherwise 1.
    int tuple_size() const;
    /// Smallest p with T^p = id, when the system is periodic.
    std::optional<std::int64_t> period() const;
    bool is_finite() const;

private:
    explicit MPSystem(Kind k) : kind_(std::move(k)) {}
    Kind kind_;
};

inline constexpr std::int64_t kMaxPower = std::int64_t{1} << 62;

/// T^k x.
SystemPoint power_apply(const MPSystem& system, std::int64_t k, const SystemPoint& x);
/// T_i^k x for the i-th map of the commuting tuple.
SystemPoint component_apply(const MPSystem& system, int i, std::int64_t k, const SystemPoint& x);
/// In-place variant used by the averaging loops.
void power_apply_inplace(const MPSystem& system, std::int64_t k, SystemPoint& x);
void component_apply_inplace(const MPSystem& system, int i, std::int64_t k, SystemPoint& x);

/// Throws TypeError unless x has the layout of `system`.
void check_point(const MPSystem& system, const SystemPoint& x);

/// Angle coordinates of x in [0,1), in the order used by characters.
std::vector<HighReal> angles(const MPSystem& system, const SystemPoint& x);

/// Symbol at position j of a Bernoulli factor.
int bernoulli_symbol(std::uint64_t seed, std::int64_t position, int alphabet_size);

std::vector<SystemPoint> sample_points(const MPSystem& system, std::size_t count,
                                       std::uint64_t seed);

// ---------------------------------------------------------------------------

/// A bounded complex function bound to one system.
class Observable {
public:
    enum class Kind { Constant, Character, CoordinateIndicator, BernoulliMeanZero, FiniteTable };

    static Observable constant(const MPSystem& system, Complex value);
    /// e(<freq, angles(x)>).
    static Observable character(const MPSystem& system, std::vector<std::int64_t> freq);
    /// Indicator of the box prod [lo_i, hi_i) in angle coordinates.
    static Observable coordinate_indicator(const MPSystem& system,
                                           std::vector<std::pair<double, double>> cell);
    /// x_0 minus the alphabet mean on the `shift_index`-th Bernoulli factor.
    static Observable bernoulli_mean_zero(const MPSystem& system, int shift_index = 0);
    /// Table indexed by the residues of all cycle factors, row-major.
    static Observable finite_table(const MPSystem& system, std::vector<Complex> values);

    Kind kind() const { return kind_; }
    double bound() const { return bound_; }
    const PointLayout& layout() const { return layout_; }
    /// Unchecked evaluation for hot loops; the point must match layout().
    Complex evaluate(const SystemPoint& x) const;
    /// Conjugate observable; same bound.
    Observable conj() const;

private:
    Observable() = default;
    Kind kind_ = Kind::Constant;
    PointLayout layout_;
    double bound_ = 0.0;
    Complex constant_{};
    std::vector<std::int64_t> freq_;
    std::vector<std::int64_t> angle_moduli_;  // 0 for real coordinates, M for residues
    std::vector<int> angle_slots_;            // slot index into reals or residues
    std::vector<std::pair<double, double>> cell_;
    int shift_index_ = 0;
    int alphabet_ = 2;
    std::vector<Complex> table_;
    std::vector<std::int64_t> table_moduli_;
    bool conjugated_ = false;
};

/// Checked evaluation.
Complex observe(const Observable& obs, const SystemPoint& x);

/// e(t) = exp(2 pi i t) for t already reduced to [0, 1).
Complex unit_phase(double t);

}  // namespace ergolab
