#include "ergolab/dynsys.hpp"

#include <cmath>
#include <numeric>
#include <random>

namespace ergolab {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

struct Slots {
    int real = 0;
    int residue = 0;
    int shift = 0;
};


HighReal add_frac(const HighReal& a, const HighReal& b);

// {a * theta} to full working precision for any |a| < 2^124: a is cut into
// 31-bit limbs and each limb times each double of theta is an exact product,
// reduced mod 1 before the terms are summed.
HighReal mul_frac(__int128 a, const HighReal& theta) {
    const bool neg = a < 0;
    unsigned __int128 m = neg ? static_cast<unsigned __int128>(-a) : static_cast<unsigned __int128>(a);
    HighReal acc(0.0);
    for (int shift = 0; m != 0; shift += 31, m >>= 31) {
        const auto limb = static_cast<double>(static_cast<std::uint64_t>(m & 0x7fffffffu));
        if (limb == 0.0) continue;
        const HighReal scale(std::ldexp(1.0, shift));
        for (const double part : {theta.hi(), theta.lo()}) {
            if (part == 0.0) continue;
            acc = add_frac(acc, frac((HighReal(limb) * HighReal(part)) * scale));
        }
    }
    if (neg && acc.hi() != 0.0) acc = HighReal(1.0) - acc;
    return frac(acc);
}
HighReal mul_frac(std::int64_t k, const HighReal& theta) { return mul_frac(static_cast<__int128>(k), theta); }

HighReal add_frac(const HighReal& a, const HighReal& b) {
    HighReal s = a + b;
    if (s >= HighReal(1.0)) s -= HighReal(1.0);
    if (s.hi() < 0.0) s += HighReal(1.0);
    return frac(s);
}

std::int64_t mod_add(std::int64_t r, std::int64_t k, std::int64_t m) {
    const std::int64_t step = k % m;
    std::int64_t v = (r + step) % m;
    if (v < 0) v += m;
    return v;
}

void check_power(std::int64_t k) {
    if (k > kMaxPower || k < -kMaxPower) throw DomainError("power exceeds 2^62");
}

void apply_impl(const MPSystem& system, std::int64_t k, SystemPoint& x, Slots& at) {
    std::visit(
        Overloaded{
            [&](const CircleRotation& s) {
                x.reals[at.real] = add_frac(x.reals[at.real], mul_frac(k, s.theta));
                at.real += 1;
            },
            [&](const TorusTranslation& s) {
                for (const auto& th : s.theta) {
                    x.reals[at.real] = add_frac(x.reals[at.real], mul_frac(k, th));
                    at.real += 1;
                }
            },
            [&](const SkewProduct& s) {
                // T^k(x, y) = (x + k theta, y + k x + k(k-1)/2 theta)
                const HighReal xc = x.reals[at.real];
                const __int128 tri = static_cast<__int128>(k) * (k - 1) / 2;
                const HighReal y_shift = add_frac(mul_frac(k, xc), mul_frac(tri, s.theta));
                x.reals[at.real + 1] = add_frac(x.reals[at.real + 1], y_shift);
                x.reals[at.real] = add_frac(xc, mul_frac(k, s.theta));
                at.real += 2;
            },
            [&](const BernoulliShift&) {
                std::int64_t& off = x.offsets[at.shift];
                const __int128 next = static_cast<__int128>(off) + k;
                if (next > kMaxPower || next < -kMaxPower) {
                    throw DomainError("bernoulli offset exceeds 2^62");
                }
                off = static_cast<std::int64_t>(next);
                at.shift += 1;
            },
            [&](const FiniteCycle& s) {
                x.residues[at.residue] = mod_add(x.residues[at.residue], k, s.modulus);
                at.residue += 1;
            },
            [&](const ProductSystem& s) {
                for (const auto& f : s.factors) apply_impl(f, k, x, at);
            },
        },
        system.kind());
}

void skip_impl(const MPSystem& system, Slots& at) {
    const PointLayout l = system.layout();
    at.real += l.reals;
    at.residue += l.residues;
    at.shift += l.shifts;
}

// Angle slots: (slot, modulus) with modulus 0 meaning a real coordinate.
void angle_slots_impl(const MPSystem& system, Slots& at,
                      std::vector<std::pair<int, std::int64_t>>& out) {
    std::visit(Overloaded{
                   [&](const CircleRotation&) { out.emplace_back(at.real++, 0); },
                   [&](const TorusTranslation& s) {
                       for (std::size_t i = 0; i < s.theta.size(); ++i) out.emplace_back(at.real++, 0);
                   },
                   [&](const SkewProduct&) {
                       out.emplace_back(at.real++, 0);
                       out.emplace_back(at.real++, 0);
                   },
                   [&](const BernoulliShift&) { at.shift += 1; },
                   [&](const FiniteCycle& s) { out.emplace_back(at.residue++, s.modulus); },
                   [&](const ProductSystem& s) {
                       for (const auto& f : s.factors) angle_slots_impl(f, at, out);
                   },
               },
               system.kind());
}

void collect_moduli(const MPSystem& system, std::vector<std::int64_t>& out) {
    std::visit(Overloaded{
                   [&](const FiniteCycle& s) { out.push_back(s.modulus); },
                   [&](const ProductSystem& s) {
                       for (const auto& f : s.factors) collect_moduli(f, out);
                   },
                   [&](const auto&) {},
               },
               system.kind());
}

void collect_alphabets(const MPSystem& system, std::vector<int>& out) {
    std::visit(Overloaded{
                   [&](const BernoulliShift& s) { out.push_back(s.alphabet_size); },
                   [&](const ProductSystem& s) {
                       for (const auto& f : s.factors) collect_alphabets(f, out);
                   },
                   [&](const auto&) {},
               },
               system.kind());
}

std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

HighReal uniform_high(std::mt19937_64& rng) {
    const double hi = static_cast<double>(rng() >> 11) * 0x1p-53;
    const double lo = static_cast<double>(rng() >> 11) * 0x1p-106;
    return HighReal::from_parts(hi, lo);
}

std::int64_t uniform_below(std::mt19937_64& rng, std::int64_t m) {
    const unsigned __int128 prod = static_cast<unsigned __int128>(rng()) * static_cast<std::uint64_t>(m);
    return static_cast<std::int64_t>(prod >> 64);
}

void sample_impl(const MPSystem& system, std::mt19937_64& rng, SystemPoint& p, Slots& at) {
    std::visit(Overloaded{
                   [&](const CircleRotation&) { p.reals[at.real++] = uniform_high(rng); },
                   [&](const TorusTranslation& s) {
                       for (std::size_t i = 0; i < s.theta.size(); ++i) p.reals[at.real++] = uniform_high(rng);
                   },
                   [&](const SkewProduct&) {
                       p.reals[at.real++] = uniform_high(rng);
                       p.reals[at.real++] = uniform_high(rng);
                   },
                   [&](const BernoulliShift&) {
                       p.seeds[at.shift] = rng();
                       p.offsets[at.shift] = 0;
                       at.shift += 1;
                   },
                   [&](const FiniteCycle& s) { p.residues[at.residue++] = uniform_below(rng, s.modulus); },
                   [&](const ProductSystem& s) {
                       for (const auto& f : s.factors) sample_impl(f, rng, p, at);
                   },
               },
               system.kind());
}

}  // namespace

bool operator==(const SystemPoint& a, const SystemPoint& b) {
    if (a.n_reals != b.n_reals || a.n_residues != b.n_residues || a.n_shifts != b.n_shifts) return false;
    for (int i = 0; i < a.n_reals; ++i) if (!(a.reals[i] == b.reals[i])) return false;
    for (int i = 0; i < a.n_residues; ++i) if (a.residues[i] != b.residues[i]) return false;
    for (int i = 0; i < a.n_shifts; ++i) {
        if (a.seeds[i] != b.seeds[i] || a.offsets[i] != b.offsets[i]) return false;
    }
    return true;
}

MPSystem MPSystem::circle_rotation(HighReal theta) { return MPSystem(CircleRotation{frac(theta)}); }

MPSystem MPSystem::torus_translation(std::vector<HighReal> theta) {
    if (theta.empty()) throw DomainError("torus translation needs at least one coordinate");
    for (auto& t : theta) t = frac(t);
    return MPSystem(TorusTranslation{std::move(theta)});
}

MPSystem MPSystem::skew_product(HighReal theta) { return MPSystem(SkewProduct{frac(theta)}); }

MPSystem MPSystem::bernoulli_shift(int alphabet_size, std::uint64_t prf_seed) {
    if (alphabet_size < 2) throw DomainError("bernoulli alphabet needs at least 2 symbols");
    return MPSystem(BernoulliShift{alphabet_size, prf_seed});
}

MPSystem MPSystem::finite_cycle(std::int64_t modulus) {
    if (modulus < 1) throw DomainError("finite cycle modulus must be >= 1");
    return MPSystem(FiniteCycle{modulus});
}

MPSystem MPSystem::product(std::vector<MPSystem> factors) {
    if (factors.empty()) throw DomainError("product of zero systems");
    MPSystem p(ProductSystem{std::move(factors)});
    const PointLayout l = p.layout();
    const auto cap = static_cast<int>(SystemPoint::kCapacity);
    if (l.reals > cap || l.residues > cap || l.shifts > cap) {
        throw DomainError("product exceeds point capacity");
    }
    return p;
}

std::string MPSystem::name() const {
    return std::visit(Overloaded{
                          [](const CircleRotation&) { return std::string("circle_rotation"); },
                          [](const TorusTranslation&) { return std::string("torus_translation"); },
                          [](const SkewProduct&) { return std::string("skew_product"); },
                          [](const BernoulliShift&) { return std::string("bernoulli_shift"); },
                          [](const FiniteCycle&) { return std::string("finite_cycle"); },
                          [](const ProductSystem&) { return std::string("product"); },
                      },
                      kind_);
}

PointLayout MPSystem::layout() const {
    return std::visit(Overloaded{
                          [](const CircleRotation&) { return PointLayout{1, 0, 0}; },
                          [](const TorusTranslation& s) {
                              return PointLayout{static_cast<int>(s.theta.size()), 0, 0};
                          },
                          [](const SkewProduct&) { return PointLayout{2, 0, 0}; },
                          [](const BernoulliShift&) { return PointLayout{0, 0, 1}; },
                          [](const FiniteCycle&) { return PointLayout{0, 1, 0}; },
                          [](const ProductSystem& s) {
                              PointLayout l;
                              for (const auto& f : s.factors) {
                                  const PointLayout fl = f.layout();
                                  l.reals += fl.reals;
                                  l.residues += fl.residues;
                                  l.shifts += fl.shifts;
                              }
                              return l;
                          },
                      },
                      kind_);
}

int MPSystem::angle_count() const {
    const PointLayout l = layout();
    return l.reals + l.residues;
}

int MPSystem::tuple_size() const {
    if (const auto* t = std::get_if<TorusTranslation>(&kind_)) return static_cast<int>(t->theta.size());
    if (const auto* p = std::get_if<ProductSystem>(&kind_)) return static_cast<int>(p->factors.size());
    return 1;
}

std::optional<std::int64_t> MPSystem::period() const {
    if (const auto* c = std::get_if<FiniteCycle>(&kind_)) return c->modulus;
    if (const auto* p = std::get_if<ProductSystem>(&kind_)) {
        std::int64_t l = 1;
        for (const auto& f : p->factors) {
            const auto fp = f.period();
            if (!fp) return std::nullopt;
            l = std::lcm(l, *fp);
        }
        return l;
    }
    return std::nullopt;
}

bool MPSystem::is_finite() const { return period().has_value(); }

void check_point(const MPSystem& system, const SystemPoint& x) {
    const PointLayout l = system.layout();
    if (x.n_reals != l.reals || x.n_residues != l.residues || x.n_shifts != l.shifts) {
        throw TypeError("point does not belong to a " + system.name() + " system");
    }
}

void power_apply_inplace(const MPSystem& system, std::int64_t k, SystemPoint& x) {
    if (k == 0) return;
    Slots at;
    apply_impl(system, k, x, at);
}

SystemPoint power_apply(const MPSystem& system, std::int64_t k, const SystemPoint& x) {
    check_power(k);
    check_point(system, x);
    SystemPoint y = x;
    power_apply_inplace(system, k, y);
    return y;
}

void component_apply_inplace(const MPSystem& system, int i, std::int64_t k, SystemPoint& x) {
    if (k == 0) return;
    if (const auto* t = std::get_if<TorusTranslation>(&system.kind())) {
        x.reals[i] = add_frac(x.reals[i], mul_frac(k, t->theta[i]));
        return;
    }
    if (const auto* p = std::get_if<ProductSystem>(&system.kind())) {
        Slots at;
        for (int j = 0; j < i; ++j) skip_impl(p->factors[j], at);
        apply_impl(p->factors[i], k, x, at);
        return;
    }
    power_apply_inplace(system, k, x);
}

SystemPoint component_apply(const MPSystem& system, int i, std::int64_t k, const SystemPoint& x) {
    check_power(k);
    check_point(system, x);
    if (i < 0 || i >= system.tuple_size()) throw DomainError("tuple index out of range");
    SystemPoint y = x;
    component_apply_inplace(system, i, k, y);
    return y;
}

std::vector<HighReal> angles(const MPSystem& system, const SystemPoint& x) {
    check_point(system, x);
    std::vector<std::pair<int, std::int64_t>> slots;
    Slots at;
    angle_slots_impl(system, at, slots);
    std::vector<HighReal> out;
    for (const auto& [slot, m] : slots) {
        out.push_back(m == 0 ? x.reals[slot]
                             : HighReal::from_int(x.residues[slot]) / HighReal::from_int(m));
    }
    return out;
}

int bernoulli_symbol(std::uint64_t seed, std::int64_t position, int alphabet_size) {
    const std::uint64_t h =
        mix64(mix64(seed + 0x9e3779b97f4a7c15ULL) ^ static_cast<std::uint64_t>(position));
    return static_cast<int>((static_cast<unsigned __int128>(h) * static_cast<unsigned>(alphabet_size)) >> 64);
}

std::vector<SystemPoint> sample_points(const MPSystem& system, std::size_t count,
                                       std::uint64_t seed) {
    if (count < 1) throw DomainError("sample count must be >= 1");
    std::mt19937_64 rng(seed);
    const PointLayout l = system.layout();
    std::vector<SystemPoint> out(count);
    for (auto& p : out) {
        p.n_reals = static_cast<std::uint8_t>(l.reals);
        p.n_residues = static_cast<std::uint8_t>(l.residues);
        p.n_shifts = static_cast<std::uint8_t>(l.shifts);
        Slots at;
        sample_impl(system, rng, p, at);
    }
    return out;
}

// ---------------------------------------------------------------------------

Complex unit_phase(double t) {
    constexpr double kTwoPi = 6.283185307179586476925286766559;
    if (t == 0.0) return {1.0, 0.0};
    if (t == 0.25) return {0.0, 1.0};
    if (t == 0.5) return {-1.0, 0.0};
    if (t == 0.75) return {0.0, -1.0};
    return {std::cos(kTwoPi * t), std::sin(kTwoPi * t)};
}

Observable Observable::constant(const MPSystem& system, Complex value) {
    Observable o;
    o.kind_ = Kind::Constant;
    o.layout_ = system.layout();
    o.constant_ = value;
    o.bound_ = std::abs(value);
    return o;
}

Observable Observable::character(const MPSystem& system, std::vector<std::int64_t> freq) {
    Observable o;
    o.kind_ = Kind::Character;
    o.layout_ = system.layout();
    std::vector<std::pair<int, std::int64_t>> slots;
    Slots at;
    angle_slots_impl(system, at, slots);
    if (freq.size() != slots.size()) {
        throw TypeError("character needs " + std::to_string(slots.size()) +
                        " frequencies for a " + system.name() + " system");
    }
    for (const auto& [slot, m] : slots) {
        o.angle_slots_.push_back(slot);
        o.angle_moduli_.push_back(m);
    }
    o.freq_ = std::move(freq);
    o.bound_ = 1.0;
    return o;
}

Observable Observable::coordinate_indicator(const MPSystem& system,
                                            std::vector<std::pair<double, double>> cell) {
    Observable o;
    o.kind_ = Kind::CoordinateIndicator;
    o.layout_ = system.layout();
    std::vector<std::pair<int, std::int64_t>> slots;
    Slots at;
    angle_slots_impl(system, at, slots);
    if (cell.size() != slots.size()) {
        throw TypeError("indicator cell needs " + std::to_string(slots.size()) + " intervals");
    }
    for (const auto& [slot, m] : slots) {
        o.angle_slots_.push_back(slot);
        o.angle_moduli_.push_back(m);
    }
    o.cell_ = std::move(cell);
    o.bound_ = 1.0;
    return o;
}

Observable Observable::bernoulli_mean_zero(const MPSystem& system, int shift_index) {
    std::vector<int> alphabets;
    collect_alphabets(system, alphabets);
    if (shift_index < 0 || shift_index >= static_cast<int>(alphabets.size())) {
        throw TypeError("bernoulli_mean_zero needs a bernoulli_shift system");
    }
    Observable o;
    o.kind_ = Kind::BernoulliMeanZero;
    o.layout_ = system.layout();
    o.shift_index_ = shift_index;
    o.alphabet_ = alphabets[shift_index];
    o.bound_ = 0.5 * (o.alphabet_ - 1);
    return o;
}

Observable Observable::finite_table(const MPSystem& system, std::vector<Complex> values) {
    std::vector<std::int64_t> moduli;
    collect_moduli(system, moduli);
    if (moduli.empty()) throw TypeError("finite_table needs a finite_cycle system");
    std::int64_t size = 1;
    for (auto m : moduli) size *= m;
    if (static_cast<std::int64_t>(values.size()) != size) {
        throw TypeError("finite_table needs " + std::to_string(size) + " values");
    }
    Observable o;
    o.kind_ = Kind::FiniteTable;
    o.layout_ = system.layout();
    o.table_moduli_ = std::move(moduli);
    o.bound_ = 0.0;
    for (const auto& v : values) o.bound_ = std::max(o.bound_, std::abs(v));
    o.table_ = std::move(values);
    return o;
}

Observable Observable::conj() const {
    Observable o = *this;
    o.conjugated_ = !conjugated_;
    return o;
}

Complex Observable::evaluate(const SystemPoint& x) const {
    Complex v;
    switch (kind_) {
        case Kind::Constant: v = constant_; break;
        case Kind::Character: {
            HighReal phase(0.0);
            for (std::size_t i = 0; i < freq_.size(); ++i) {
                const std::int64_t m = angle_moduli_[i];
                if (m == 0) {
                    phase += frac(HighReal::from_int(freq_[i]) * x.reals[angle_slots_[i]]);
                } else {
                    const __int128 num = static_cast<__int128>(freq_[i]) * x.residues[angle_slots_[i]];
                    std::int64_t r = static_cast<std::int64_t>(num % m);
                    if (r < 0) r += m;
                    phase += HighReal::from_int(r) / HighReal::from_int(m);
                }
            }
            v = unit_phase(frac(phase).to_double());
            break;
        }
        case Kind::CoordinateIndicator: {
            bool inside = true;
            for (std::size_t i = 0; i < cell_.size() && inside; ++i) {
                const std::int64_t m = angle_moduli_[i];
                const double a = m == 0 ? x.reals[angle_slots_[i]].to_double()
                                        : static_cast<double>(x.residues[angle_slots_[i]]) /
                                              static_cast<double>(m);
                inside = a >= cell_[i].first && a < cell_[i].second;
            }
            v = inside ? 1.0 : 0.0;
            break;
        }
        case Kind::BernoulliMeanZero: {
            const int sym = bernoulli_symbol(x.seeds[shift_index_], x.offsets[shift_index_], alphabet_);
            v = static_cast<double>(sym) - 0.5 * (alphabet_ - 1);
            break;
        }
        case Kind::FiniteTable: {
            std::int64_t idx = 0;
            for (std::size_t i = 0; i < table_moduli_.size(); ++i) {
                idx = idx * table_moduli_[i] + x.residues[i];
            }
            v = table_[static_cast<std::size_t>(idx)];
            break;
        }
    }
    return conjugated_ ? std::conj(v) : v;
}

Complex observe(const Observable& obs, const SystemPoint& x) {
    if (!(obs.layout() == PointLayout{x.n_reals, x.n_residues, x.n_shifts})) {
        throw TypeError("observable and point belong to different systems");
    }
    return obs.evaluate(x);
}

}  // namespace ergolab
