#pragma once

// Extended-precision scalars for orbit indices such as floor(alpha * n^c).
//
// HighReal is an unevaluated sum hi + lo of two doubles (|lo| <= ulp(hi)/2),
// giving roughly 106 significant bits. Every operation is built from
// error-free transforms, so results are deterministic for a given input on
// any IEEE-754 platform compiled without FP contraction.
//
// MpReal wraps an MPFR value for runs that ask for more than 106 bits.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

#include <mpfr.h>

namespace ergolab {

struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};

class HighReal {
public:
    constexpr HighReal() = default;
    constexpr HighReal(double x) : hi_(x), lo_(0.0) {}  // NOLINT: implicit by intent
    static HighReal from_parts(double hi, double lo);
    static HighReal from_int(std::int64_t n);

    double hi() const { return hi_; }
    double lo() const { return lo_; }
    double to_double() const { return hi_ + lo_; }
    static constexpr int precision_bits() { return 106; }
    bool is_finite() const;

    HighReal operator-() const { return raw(-hi_, -lo_); }
    HighReal& operator+=(const HighReal& o);
    HighReal& operator-=(const HighReal& o);
    HighReal& operator*=(const HighReal& o);
    HighReal& operator/=(const HighReal& o);

    friend HighReal operator+(HighReal a, const HighReal& b) { return a += b; }
    friend HighReal operator-(HighReal a, const HighReal& b) { return a -= b; }
    friend HighReal operator*(HighReal a, const HighReal& b) { return a *= b; }
    friend HighReal operator/(HighReal a, const HighReal& b) { return a /= b; }

    friend bool operator==(const HighReal& a, const HighReal& b) {
        return a.hi_ == b.hi_ && a.lo_ == b.lo_;
    }
    friend bool operator<(const HighReal& a, const HighReal& b) {
        return a.hi_ < b.hi_ || (a.hi_ == b.hi_ && a.lo_ < b.lo_);
    }
    friend bool operator>(const HighReal& a, const HighReal& b) { return b < a; }
    friend bool operator<=(const HighReal& a, const HighReal& b) { return !(b < a); }
    friend bool operator>=(const HighReal& a, const HighReal& b) { return !(a < b); }

private:
    static constexpr HighReal raw(double hi, double lo) {
        HighReal r;
        r.hi_ = hi;
        r.lo_ = lo;
        return r;
    }
    double hi_ = 0.0;
    double lo_ = 0.0;
};

HighReal abs(const HighReal& x);
HighReal floor(const HighReal& x);
HighReal ldexp(const HighReal& x, int e);
HighReal sqrt(const HighReal& x);
HighReal exp(const HighReal& x);
HighReal log(const HighReal& x);
/// x^y for x > 0; x^1 and x^0 are returned exactly.
HighReal pow(const HighReal& x, const HighReal& y);
/// n^c for an integer n >= 1, the hot path of every fractional-power sequence.
HighReal pow_int(std::int64_t n, const HighReal& c);

namespace constants {
HighReal pi();
HighReal ln2();
HighReal sqrt2();
HighReal golden();
HighReal e();
}  // namespace constants

/// Converts an integral HighReal to int64; throws DomainError when out of range.
std::int64_t to_int64(const HighReal& x);
/// Decimal rendering with up to `digits` significant digits.
std::string to_string(const HighReal& x, int digits = 32);

// ---------------------------------------------------------------------------
// Fractional parts and floors.

/// Guard width for FloorResult::boundary_flag.
inline constexpr double kBoundaryGuard = 0x1p-40;

struct FloorResult {
    std::int64_t floor_value = 0;
    HighReal frac_value;
    bool boundary_flag = false;
};

/// x - floor(x) in [0, 1).
HighReal frac(const HighReal& x);
/// {x} - 1/2.
HighReal phi(const HighReal& x);
/// Floor and fractional part of x with the boundary flag set when {x} is
/// within kBoundaryGuard of 0 or 1.
FloorResult split_floor(const HighReal& x);

struct Rational {
    std::int64_t num = 0;
    std::int64_t den = 1;

    Rational() = default;
    Rational(std::int64_t n, std::int64_t d);
    HighReal value() const;
    friend bool operator==(const Rational&, const Rational&) = default;
};

/// Floor of p/q for any sign of p (q > 0).
std::int64_t floor_div(__int128 p, __int128 q);

/// A real coefficient that remembers an exact rational form when it has one.
struct Coefficient {
    HighReal value;
    std::optional<Rational> exact;

    Coefficient() = default;
    /// Dyadic values (lo part zero) also get their exact form.
    Coefficient(HighReal v);  // NOLINT
    /// Every finite double is a dyadic rational; it is kept exact when it fits.
    Coefficient(double v);  // NOLINT
    Coefficient(Rational r) : value(r.value()), exact(r) {}  // NOLINT
    static Coefficient integer(std::int64_t n) { return Coefficient(Rational(n, 1)); }
};

/// floor(alpha * n^c) together with its fractional part.
///
/// With c == 1 and an exact rational alpha the floor is computed in integer
/// arithmetic. Otherwise the product is formed in double-double; if {alpha n^c}
/// is closer to an integer than the arithmetic can resolve, the downward floor
/// is returned with the boundary flag set.
FloorResult floor_pow(const Coefficient& alpha, const HighReal& c, std::int64_t n);
/// Same, with n^c supplied by the caller (shared across several alphas).
FloorResult floor_scaled(const Coefficient& alpha, const HighReal& c, std::int64_t n,
                         const HighReal& n_pow_c);

// ---------------------------------------------------------------------------
// Arbitrary precision (MPFR) for oracle-grade runs.

class MpReal {
public:
    explicit MpReal(int bits);
    MpReal(int bits, double v);
    MpReal(int bits, const HighReal& v);
    MpReal(const MpReal& o);
    MpReal(MpReal&& o) noexcept;
    MpReal& operator=(const MpReal& o);
    MpReal& operator=(MpReal&& o) noexcept;
    ~MpReal();

    int bits() const { return bits_; }
    mpfr_ptr get() { return value_; }
    mpfr_srcptr get() const { return value_; }
    double to_double() const;
    HighReal to_high() const;
    std::string to_string(int digits = 40) const;

private:
    int bits_;
    mpfr_t value_;
};

/// floor(alpha * n^c) evaluated with `bits` of working precision.
FloorResult floor_pow_mp(const MpReal& alpha, const MpReal& c, std::int64_t n);

}  // namespace ergolab
