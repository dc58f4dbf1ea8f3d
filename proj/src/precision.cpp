#include "ergolab/precision.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <numeric>

namespace ergolab {

namespace {

// Error-free transforms. Dekker splitting keeps two_prod independent of a
// hardware FMA, so results match across machines.
inline double two_sum(double a, double b, double& err) {
    const double s = a + b;
    const double bb = s - a;
    err = (a - (s - bb)) + (b - bb);
    return s;
}

inline double quick_two_sum(double a, double b, double& err) {
    const double s = a + b;
    err = b - (s - a);
    return s;
}

inline void split(double a, double& hi, double& lo) {
    constexpr double kSplitter = 134217729.0;  // 2^27 + 1
    const double t = kSplitter * a;
    hi = t - (t - a);
    lo = a - hi;
}

inline double two_prod(double a, double b, double& err) {
    const double p = a * b;
    double ah, al, bh, bl;
    split(a, ah, al);
    split(b, bh, bl);
    err = ((ah * bh - p) + ah * bl + al * bh) + al * bl;
    return p;
}

HighReal mul_double(const HighReal& a, double b) {
    double p2;
    const double p1 = two_prod(a.hi(), b, p2);
    p2 += a.lo() * b;
    double lo;
    const double hi = quick_two_sum(p1, p2, lo);
    return HighReal::from_parts(hi, lo);
}

constexpr int kExpHalvings = 10;
constexpr int kTaylorTerms = 14;

const std::array<HighReal, kTaylorTerms>& inverse_factorials() {
    static const auto table = [] {
        std::array<HighReal, kTaylorTerms> t{};
        HighReal fact(1.0);
        for (int i = 0; i < kTaylorTerms; ++i) {
            fact *= HighReal(static_cast<double>(i + 1));
            t[i] = HighReal(1.0) / fact;  // 1/(i+1)!
        }
        return t;
    }();
    return table;
}

}  // namespace

HighReal HighReal::from_parts(double hi, double lo) {
    double err;
    const double s = quick_two_sum(hi, lo, err);
    return raw(s, err);
}

HighReal HighReal::from_int(std::int64_t n) {
    const double hi = static_cast<double>(n);
    const __int128 rest = static_cast<__int128>(n) - static_cast<__int128>(hi);
    return raw(hi, static_cast<double>(rest));
}

bool HighReal::is_finite() const { return std::isfinite(hi_) && std::isfinite(lo_); }

HighReal& HighReal::operator+=(const HighReal& o) {
    double s2, t2;
    double s1 = two_sum(hi_, o.hi_, s2);
    const double t1 = two_sum(lo_, o.lo_, t2);
    s2 += t1;
    s1 = quick_two_sum(s1, s2, s2);
    s2 += t2;
    hi_ = quick_two_sum(s1, s2, lo_);
    return *this;
}

HighReal& HighReal::operator-=(const HighReal& o) { return *this += -o; }

HighReal& HighReal::operator*=(const HighReal& o) {
    double p2;
    const double p1 = two_prod(hi_, o.hi_, p2);
    p2 += hi_ * o.lo_ + lo_ * o.hi_;
    hi_ = quick_two_sum(p1, p2, lo_);
    return *this;
}

HighReal& HighReal::operator/=(const HighReal& o) {
    const double q1 = hi_ / o.hi_;
    HighReal r = *this - mul_double(o, q1);
    const double q2 = r.hi_ / o.hi_;
    r -= mul_double(o, q2);
    const double q3 = r.hi_ / o.hi_;
    double e;
    const double s = quick_two_sum(q1, q2, e);
    *this = raw(s, e) + HighReal(q3);
    return *this;
}

HighReal abs(const HighReal& x) { return x.hi() < 0.0 ? -x : x; }

HighReal floor(const HighReal& x) {
    double hi = std::floor(x.hi());
    double lo = 0.0;
    if (hi == x.hi()) {
        lo = std::floor(x.lo());
    }
    return HighReal::from_parts(hi, lo);
}

HighReal ldexp(const HighReal& x, int e) {
    return HighReal::from_parts(std::ldexp(x.hi(), e), std::ldexp(x.lo(), e));
}

HighReal sqrt(const HighReal& x) {
    if (x.hi() < 0.0) throw DomainError("sqrt of a negative number");
    if (x.hi() == 0.0) return HighReal(0.0);
    const double y = std::sqrt(x.hi());
    const HighReal yy(y);
    const HighReal residual = x - yy * yy;
    return yy + residual / HighReal(2.0 * y);
}

HighReal exp(const HighReal& x) {
    if (!x.is_finite()) throw DomainError("exp of a non-finite value");
    if (x.hi() > 709.0) throw DomainError("exp overflow");
    if (x.hi() < -745.0) return HighReal(0.0);
    if (x.hi() == 0.0 && x.lo() == 0.0) return HighReal(1.0);

    const HighReal ln2 = constants::ln2();
    const double k = std::nearbyint(x.hi() / ln2.hi());
    HighReal r = x - mul_double(ln2, k);
    r = ldexp(r, -kExpHalvings);

    // expm1(r) by Taylor series, then undo the halvings via (1+s)^2 - 1 = 2s + s^2.
    const auto& inv_fact = inverse_factorials();
    HighReal power = r;
    HighReal s = r;
    for (int i = 1; i < kTaylorTerms; ++i) {
        power *= r;
        const HighReal term = power * inv_fact[i];
        s += term;
        if (std::abs(term.hi()) < 1e-36) break;
    }
    for (int i = 0; i < kExpHalvings; ++i) {
        s = ldexp(s, 1) + s * s;
    }
    s += HighReal(1.0);
    return ldexp(s, static_cast<int>(k));
}

HighReal log(const HighReal& x) {
    if (!(x.hi() > 0.0)) throw DomainError("log of a non-positive number");
    if (x.hi() == 1.0 && x.lo() == 0.0) return HighReal(0.0);
    // One Newton step on exp(y) = x doubles the 53 correct bits of std::log.
    HighReal y(std::log(x.hi()));
    y = y + x * exp(-y) - HighReal(1.0);
    return y;
}

HighReal pow(const HighReal& x, const HighReal& y) {
    if (y == HighReal(1.0)) return x;
    if (y == HighReal(0.0)) return HighReal(1.0);
    if (x.hi() == 0.0) return HighReal(0.0);
    if (x.hi() < 0.0) throw DomainError("pow with a negative base");
    return exp(y * log(x));
}

HighReal pow_int(std::int64_t n, const HighReal& c) {
    if (n < 1) throw DomainError("pow_int expects n >= 1");
    if (c == HighReal(1.0) || n == 1) return HighReal::from_int(n);
    return exp(c * log(HighReal::from_int(n)));
}

namespace constants {
HighReal pi() { return HighReal::from_parts(3.141592653589793116e+00, 1.224646799147353207e-16); }
HighReal ln2() { return HighReal::from_parts(6.931471805599452862e-01, 2.319046813846299558e-17); }
HighReal sqrt2() {
    static const HighReal v = sqrt(HighReal(2.0));
    return v;
}
HighReal golden() {
    static const HighReal v = (HighReal(1.0) + sqrt(HighReal(5.0))) / HighReal(2.0);
    return v;
}
HighReal e() {
    static const HighReal v = exp(HighReal(1.0));
    return v;
}
}  // namespace constants

std::int64_t to_int64(const HighReal& x) {
    if (!x.is_finite() || std::abs(x.hi()) >= 0x1p63) {
        throw DomainError("value does not fit a signed 64-bit integer");
    }
    const __int128 v = static_cast<__int128>(x.hi()) + static_cast<__int128>(x.lo());
    return static_cast<std::int64_t>(v);
}

std::string to_string(const HighReal& x, int digits) {
    return MpReal(160, x).to_string(digits);
}

HighReal frac(const HighReal& x) {
    if (!x.is_finite()) throw DomainError("frac of a non-finite value");
    HighReal r = x - floor(x);
    if (r.hi() < 0.0) r = HighReal(0.0);
    if (r >= HighReal(1.0)) r = HighReal(0.0);
    return r;
}

HighReal phi(const HighReal& x) { return frac(x) - HighReal(0.5); }

FloorResult split_floor(const HighReal& x) {
    if (!x.is_finite()) throw DomainError("floor of a non-finite value");
    FloorResult out;
    HighReal fl = floor(x);
    HighReal fr = x - fl;
    if (fr >= HighReal(1.0)) {
        fl += HighReal(1.0);
        fr -= HighReal(1.0);
    }
    out.floor_value = to_int64(fl);
    out.frac_value = fr;
    const double f = fr.to_double();
    out.boundary_flag = f < kBoundaryGuard || f > 1.0 - kBoundaryGuard;
    return out;
}

Rational::Rational(std::int64_t n, std::int64_t d) {
    if (d == 0) throw DomainError("rational with zero denominator");
    if (d < 0) {
        n = -n;
        d = -d;
    }
    const std::int64_t g = std::gcd(n < 0 ? -n : n, d);
    num = g ? n / g : n;
    den = g ? d / g : d;
}

Coefficient::Coefficient(double v) : value(v) {
    if (!std::isfinite(v)) return;
    double scaled = v;
    for (int k = 0; k <= 62; ++k) {
        if (std::abs(scaled) >= 0x1p62) return;
        if (scaled == std::nearbyint(scaled)) {
            exact = Rational(static_cast<std::int64_t>(scaled), std::int64_t{1} << k);
            return;
        }
        scaled *= 2.0;
    }
}

Coefficient::Coefficient(HighReal v) : value(v) {
    if (v.lo() == 0.0) exact = Coefficient(v.hi()).exact;
}

HighReal Rational::value() const { return HighReal::from_int(num) / HighReal::from_int(den); }

std::int64_t floor_div(__int128 p, __int128 q) {
    __int128 d = p / q;
    if ((p % q != 0) && ((p < 0) != (q < 0))) --d;
    return static_cast<std::int64_t>(d);
}

FloorResult floor_scaled(const Coefficient& alpha, const HighReal& c, std::int64_t n,
                         const HighReal& n_pow_c) {
    if (alpha.exact && (c == HighReal(1.0) || n == 1)) {
        // Certified: exact integer arithmetic, never ambiguous.
        const __int128 p = static_cast<__int128>(alpha.exact->num) * n;
        const __int128 q = alpha.exact->den;
        FloorResult out;
        out.floor_value = floor_div(p, q);
        const __int128 rem = p - static_cast<__int128>(out.floor_value) * q;
        out.frac_value = HighReal::from_int(static_cast<std::int64_t>(rem)) /
                         HighReal::from_int(static_cast<std::int64_t>(q));
        out.boundary_flag = false;
        return out;
    }
    const HighReal v = alpha.value * n_pow_c;
    FloorResult out = split_floor(v);
    // Relative error of the double-double product is well below 2^-100.
    const double resolvable = std::abs(v.hi()) * 0x1p-100;
    const bool exact_power = n == 1 || c == HighReal(1.0);
    if (!exact_power && out.frac_value.to_double() < resolvable) {
        out.floor_value -= 1;
        out.frac_value = HighReal::from_parts(1.0, -0x1p-104);
        out.boundary_flag = true;
    }
    return out;
}

FloorResult floor_pow(const Coefficient& alpha, const HighReal& c, std::int64_t n) {
    if (n < 1) throw DomainError("floor_pow expects n >= 1");
    if (!(c.hi() > 0.0 && c < HighReal(2.0))) throw DomainError("floor_pow expects c in (0, 2)");
    if (alpha.value.hi() == 0.0) throw DomainError("floor_pow expects alpha != 0");
    return floor_scaled(alpha, c, n, pow_int(n, c));
}

// ---------------------------------------------------------------------------

MpReal::MpReal(int bits) : bits_(bits) {
    mpfr_init2(value_, bits);
    mpfr_set_zero(value_, 1);
}

MpReal::MpReal(int bits, double v) : bits_(bits) {
    mpfr_init2(value_, bits);
    mpfr_set_d(value_, v, MPFR_RNDN);
}

MpReal::MpReal(int bits, const HighReal& v) : bits_(bits) {
    mpfr_init2(value_, bits);
    mpfr_set_d(value_, v.hi(), MPFR_RNDN);
    mpfr_add_d(value_, value_, v.lo(), MPFR_RNDN);
}

MpReal::MpReal(const MpReal& o) : bits_(o.bits_) {
    mpfr_init2(value_, bits_);
    mpfr_set(value_, o.value_, MPFR_RNDN);
}

MpReal::MpReal(MpReal&& o) noexcept : bits_(o.bits_) {
    mpfr_init2(value_, bits_);
    mpfr_swap(value_, o.value_);
}

MpReal& MpReal::operator=(const MpReal& o) {
    if (this != &o) {
        mpfr_set_prec(value_, o.bits_);
        bits_ = o.bits_;
        mpfr_set(value_, o.value_, MPFR_RNDN);
    }
    return *this;
}

MpReal& MpReal::operator=(MpReal&& o) noexcept {
    if (this != &o) {
        mpfr_swap(value_, o.value_);
        std::swap(bits_, o.bits_);
    }
    return *this;
}

MpReal::~MpReal() { mpfr_clear(value_); }

double MpReal::to_double() const { return mpfr_get_d(value_, MPFR_RNDN); }

HighReal MpReal::to_high() const {
    const double hi = mpfr_get_d(value_, MPFR_RNDN);
    MpReal rest(bits_);
    mpfr_sub_d(rest.get(), value_, hi, MPFR_RNDN);
    return HighReal::from_parts(hi, rest.to_double());
}

std::string MpReal::to_string(int digits) const {
    char* buf = nullptr;
    mpfr_asprintf(&buf, "%.*Rg", digits, value_);
    std::string s(buf);
    mpfr_free_str(buf);
    return s;
}

FloorResult floor_pow_mp(const MpReal& alpha, const MpReal& c, std::int64_t n) {
    if (n < 1) throw DomainError("floor_pow expects n >= 1");
    const int bits = alpha.bits();
    MpReal v(bits);
    mpfr_set_si(v.get(), static_cast<long>(n), MPFR_RNDN);
    mpfr_pow(v.get(), v.get(), c.get(), MPFR_RNDN);
    mpfr_mul(v.get(), v.get(), alpha.get(), MPFR_RNDN);
    if (mpfr_cmpabs_ui(v.get(), 1UL << 53) >= 0) {
        throw DomainError("orbit index exceeds 2^53 in the MPFR path");
    }
    MpReal fl(bits);
    mpfr_floor(fl.get(), v.get());
    MpReal fr(bits);
    mpfr_sub(fr.get(), v.get(), fl.get(), MPFR_RNDN);

    FloorResult out;
    out.floor_value = static_cast<std::int64_t>(fl.to_double());
    out.frac_value = fr.to_high();
    const double f = fr.to_double();
    out.boundary_flag = f < kBoundaryGuard || f > 1.0 - kBoundaryGuard;
    // n = 1: the power is exactly 1 and v is alpha itself
    if (n == 1 && mpfr_integer_p(v.get())) out.boundary_flag = false;
    const double resolvable = std::abs(v.to_double()) * std::ldexp(1.0, 12 - bits);
    if (n > 1 && f < resolvable && !mpfr_integer_p(c.get())) {
        out.floor_value -= 1;
        out.frac_value = HighReal::from_parts(1.0, -0x1p-104);
        out.boundary_flag = true;
    }
    return out;
}

}  // namespace ergolab
