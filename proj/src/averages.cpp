#include "ergolab/averages.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>

namespace ergolab {

// ---------------------------------------------------------------------------
// Threads.

namespace {

int initial_thread_count() {
    if (const char* env = std::getenv("ERGOLAB_THREADS")) {
        const int n = std::atoi(env);
        if (n >= 1) return n;
    }
    return 1;
}

std::atomic<int>& thread_setting() {
    static std::atomic<int> value{initial_thread_count()};
    return value;
}

}  // namespace

int thread_count() { return thread_setting().load(); }

void set_thread_count(int n) {
    if (n < 1) throw DomainError("thread count must be >= 1");
    thread_setting().store(n);
}

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body) {
    const auto workers = std::min<std::size_t>(static_cast<std::size_t>(thread_count()), count);
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto run = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= count) return;
            try {
                body(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
                next.store(count);
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w + 1 < workers; ++w) pool.emplace_back(run);
    run();
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

// ---------------------------------------------------------------------------
// Schedules.

std::vector<std::int64_t> lacunary_schedule(int root, std::int64_t n_max, std::int64_t n_min) {
    if (root < 1) throw DomainError("lambda root must be >= 1");
    if (n_max < 1 || n_min < 1 || n_min > n_max) throw DomainError("schedule needs 1 <= n_min <= n_max");
    std::vector<std::int64_t> out;
    for (std::int64_t m = 0;; ++m) {
        // lambda^m = 2^(m div root) * 2^((m mod root)/root)
        const HighReal frac_pow =
            pow(HighReal(2.0), HighReal::from_int(m % root) / HighReal::from_int(root));
        const HighReal v = ldexp(frac_pow, static_cast<int>(m / root));
        const std::int64_t N = to_int64(floor(v));
        if (N >= n_max) break;
        if (N >= n_min && (out.empty() || out.back() != N)) out.push_back(N);
    }
    out.push_back(n_max);
    return out;
}

// ---------------------------------------------------------------------------
// Orbit plans.

namespace {

struct OrbitPlan {
    int dim = 1;
    bool multi = false;        // component maps of the commuting tuple
    bool use_heights = false;  // flow times: carry = floor(frac + height)
    bool has_g = true;
    std::int64_t terms = 0;
    std::vector<std::int64_t> f_floor, g_floor;
    std::vector<HighReal> f_frac, g_frac;
    std::vector<double> weight;        // empty means 1
    std::vector<std::int64_t> stops;   // term counts at which to record
    std::vector<double> denominators;
    std::vector<std::uint8_t> term_flags;  // boundary flags raised by term i
    std::int64_t flags = 0;                // flags not tied to a term
};

void check_schedule(const std::vector<std::int64_t>& s) {
    if (s.empty()) throw DomainError("empty schedule");
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] < 1 || (i > 0 && s[i] <= s[i - 1])) {
            throw DomainError("schedule must be strictly increasing positive integers");
        }
    }
}

void check_index(std::int64_t k) {
    if (k > kMaxPower || k < -kMaxPower) throw DomainError("orbit index exceeds 2^62");
}

void allocate(OrbitPlan& plan) {
    const auto size = static_cast<std::size_t>(plan.terms * plan.dim);
    plan.f_floor.assign(size, 0);
    if (plan.has_g) plan.g_floor.assign(size, 0);
    if (plan.use_heights) {
        plan.f_frac.assign(size, HighReal(0.0));
        if (plan.has_g) plan.g_frac.assign(size, HighReal(0.0));
    }
}

/// Fills plan entries for terms [0, terms) in parallel chunks; `fill(i, flags)`
/// writes entry i. Entries are independent, so the result is order-free.
void fill_parallel(OrbitPlan& plan, const std::function<void(std::int64_t, std::int64_t&)>& fill) {
    constexpr std::int64_t kChunk = 1 << 14;
    const std::int64_t chunks = (plan.terms + kChunk - 1) / kChunk;
    plan.term_flags.assign(static_cast<std::size_t>(plan.terms), 0);
    parallel_for(static_cast<std::size_t>(chunks), [&](std::size_t c) {
        const std::int64_t lo = static_cast<std::int64_t>(c) * kChunk;
        const std::int64_t hi = std::min(plan.terms, lo + kChunk);
        for (std::int64_t i = lo; i < hi; ++i) {
            std::int64_t f = 0;
            fill(i, f);
            plan.term_flags[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(std::min<std::int64_t>(f, 255));
        }
    });
}

inline void apply_side(const MPSystem& system, const OrbitPlan& plan, const std::int64_t* floors,
                       const HighReal* fracs, const FlowPoint& p, SystemPoint& y) {
    for (int j = 0; j < plan.dim; ++j) {
        std::int64_t k = floors[j];
        if (plan.use_heights && fracs[j] + p.heights[j] >= HighReal(1.0)) k += 1;
        if (plan.multi) {
            component_apply_inplace(system, j, k, y);
        } else {
            power_apply_inplace(system, k, y);
        }
    }
}

std::vector<Complex> eval_point(const MPSystem& system, const Observable& f, const Observable* g,
                                const OrbitPlan& plan, const FlowPoint& p) {
    std::vector<Complex> out(plan.stops.size());
    KahanSum acc;
    std::size_t ci = 0;
    const bool weighted = !plan.weight.empty();
    for (std::int64_t i = 0; i < plan.terms; ++i) {
        const double w = weighted ? plan.weight[static_cast<std::size_t>(i)] : 1.0;
        if (w != 0.0) {
            const std::size_t at = static_cast<std::size_t>(i * plan.dim);
            SystemPoint y = p.base;
            apply_side(system, plan, &plan.f_floor[at], plan.use_heights ? &plan.f_frac[at] : nullptr, p, y);
            Complex v = f.evaluate(y);
            if (g) {
                SystemPoint z = p.base;
                apply_side(system, plan, &plan.g_floor[at], plan.use_heights ? &plan.g_frac[at] : nullptr, p, z);
                v *= g->evaluate(z);
            }
            if (weighted) v *= w;
            acc.add(v);
        }
        while (ci < plan.stops.size() && plan.stops[ci] == i + 1) {
            const Complex s = acc.value();
            const double d = plan.denominators[ci];
            out[ci] = Complex(s.real() / d, s.imag() / d);
            ++ci;
        }
    }
    return out;
}

AverageSeries run_plan(const AverageSpec& spec, const OrbitPlan& plan, const std::string& variant,
                       bool with_heights) {
    const auto points = resolve_points(spec, with_heights);
    const Observable* g = plan.has_g && spec.g ? &*spec.g : nullptr;
    for (const auto& p : points) check_point(spec.system, p.base);
    if (!(spec.f.layout() == spec.system.layout()) || (g && !(g->layout() == spec.system.layout()))) {
        throw TypeError("observables do not belong to the averaged system");
    }

    AverageSeries s;
    s.variant = variant;
    std::int64_t running = plan.flags;
    std::size_t stop = 0;
    for (std::int64_t i = 0; i < plan.terms && stop < plan.stops.size(); ++i) {
        if (!plan.term_flags.empty()) running += plan.term_flags[static_cast<std::size_t>(i)];
        while (stop < plan.stops.size() && plan.stops[stop] == i + 1) {
            s.flags_at.push_back(running);
            ++stop;
        }
    }
    s.boundary_flags = s.flags_at.empty() ? plan.flags : s.flags_at.back();
    s.bound = spec.f.bound() * (g ? g->bound() : 1.0);
    s.per_point.resize(points.size());
    parallel_for(points.size(), [&](std::size_t j) {
        s.per_point[j] = eval_point(spec.system, spec.f, g, plan, points[j]);
    });
    const std::size_t K = plan.stops.size();
    s.mean.assign(K, Complex{});
    s.dispersion.assign(K, 0.0);
    for (std::size_t k = 0; k < K; ++k) {
        KahanSum acc;
        for (const auto& row : s.per_point) acc.add(row[k]);
        const double n = static_cast<double>(points.size());
        const Complex total = acc.value();
        s.mean[k] = Complex(total.real() / n, total.imag() / n);
        for (const auto& row : s.per_point) s.dispersion[k] = std::max(s.dispersion[k], std::abs(row[k] - s.mean[k]));
    }
    return s;
}

void set_uniform_stops(OrbitPlan& plan, const std::vector<std::int64_t>& schedule) {
    plan.stops = schedule;
    plan.denominators.clear();
    for (auto N : schedule) plan.denominators.push_back(static_cast<double>(N));
}

bool is_zero(const Coefficient& a) {
    return a.exact ? a.exact->num == 0 : a.value.hi() == 0.0;
}

FloorResult floor_power_term(const Coefficient& a, const HighReal& c, std::int64_t n,
                             const HighReal& n_pow_c) {
    if (is_zero(a)) return FloorResult{0, HighReal(0.0), false};
    return floor_scaled(a, c, n, n_pow_c);
}

void check_c(const HighReal& c, bool override_scope, std::vector<std::string>& warnings) {
    if (!(c > HighReal(0.0)) || !(c < HighReal(2.0))) throw DomainError("c must lie in (0, 2)");
    const bool in_range = c > HighReal(1.0) && c < HighReal(23.0) / HighReal(22.0);
    if (!in_range) {
        if (!override_scope) throw ScopeError("c outside (1, 23/22); set the override flag to run anyway");
        warnings.push_back("c outside (1, 23/22): run is exploratory");
    }
}

// Multi-map plan: side floors floor(coeff_j * n^c) for j < dim.
struct MpSide {
    const std::vector<MpReal>* f = nullptr;
    const std::vector<MpReal>* g = nullptr;
    const MpReal* c = nullptr;
};

OrbitPlan power_plan(const std::vector<Coefficient>& fb, const std::vector<Coefficient>* gb,
                     const HighReal& c, std::int64_t terms, bool multi, MpSide mp = {}) {
    OrbitPlan plan;
    plan.dim = static_cast<int>(fb.size());
    plan.multi = multi;
    plan.has_g = gb != nullptr;
    plan.terms = terms;
    allocate(plan);
    fill_parallel(plan, [&](std::int64_t i, std::int64_t& flags) {
        const std::int64_t n = i + 1;
        const HighReal npc = mp.c ? HighReal(0.0) : pow_int(n, c);
        auto term = [&](const std::vector<Coefficient>& coeff, const std::vector<MpReal>* coeff_mp, int j) {
            if (is_zero(coeff[j])) return FloorResult{0, HighReal(0.0), false};
            if (mp.c) return floor_pow_mp((*coeff_mp)[j], *mp.c, n);
            return floor_power_term(coeff[j], c, n, npc);
        };
        for (int j = 0; j < plan.dim; ++j) {
            const FloorResult a = term(fb, mp.f, j);
            check_index(a.floor_value);
            flags += a.boundary_flag;
            plan.f_floor[static_cast<std::size_t>(i * plan.dim + j)] = a.floor_value;
            if (gb) {
                const FloorResult b = term(*gb, mp.g, j);
                check_index(b.floor_value);
                flags += b.boundary_flag;
                plan.g_floor[static_cast<std::size_t>(i * plan.dim + j)] = b.floor_value;
            }
        }
    });
    return plan;
}

HighReal coeff_abs(const Coefficient& a) { return abs(a.value); }

}  // namespace

std::vector<FlowPoint> resolve_points(const AverageSpec& spec, bool with_heights) {
    if (!spec.at_points.empty()) return spec.at_points;
    if (spec.points < 1) throw DomainError("sample count must be >= 1");
    if (with_heights) {
        return sample_flow_points(SuspensionFlow(spec.system), spec.points, spec.seed);
    }
    const auto base = sample_points(spec.system, spec.points, spec.seed);
    std::vector<FlowPoint> out(base.size());
    for (std::size_t i = 0; i < base.size(); ++i) out[i].base = base[i];
    return out;
}

FloorResult floor_affine(const Coefficient& b, const Coefficient& d, std::int64_t n) {
    if (b.exact && d.exact) {
        const __int128 num = static_cast<__int128>(b.exact->num) * n * d.exact->den +
                             static_cast<__int128>(d.exact->num) * b.exact->den;
        const __int128 den = static_cast<__int128>(b.exact->den) * d.exact->den;
        const std::int64_t fl = floor_div(num, den);
        const __int128 rem = num - static_cast<__int128>(fl) * den;
        const HighReal fr = HighReal::from_int(static_cast<std::int64_t>(rem)) /
                            HighReal::from_int(static_cast<std::int64_t>(den));
        return FloorResult{fl, fr, false};
    }
    return split_floor(b.value * HighReal::from_int(n) + d.value);
}

AverageSeries avg_nc_double(const AverageSpec& spec, const TBParams& params) {
    check_schedule(spec.schedule);
    if (!spec.g) throw DomainError("the double average needs two observables");
    if (is_zero(params.alpha) || is_zero(params.beta)) throw DomainError("alpha and beta must be non-zero");
    std::vector<std::string> warnings;
    check_c(params.c, spec.override_scope, warnings);
    if (coeff_abs(params.alpha) == coeff_abs(params.beta)) {
        if (!spec.override_scope) throw ScopeError("|alpha| = |beta| is outside the convergence hypotheses; set the override flag");
        warnings.push_back("|alpha| = |beta|: run is exploratory");
    }
    const std::vector<Coefficient> fb{params.alpha}, gb{params.beta};
    std::vector<MpReal> fmp, gmp;
    MpSide mp;
    if (params.alpha_mp && params.beta_mp && params.c_mp) {
        fmp.push_back(*params.alpha_mp);
        gmp.push_back(*params.beta_mp);
        mp = MpSide{&fmp, &gmp, &*params.c_mp};
    }
    OrbitPlan plan = power_plan(fb, &gb, params.c, spec.schedule.back(), false, mp);
    set_uniform_stops(plan, spec.schedule);
    AverageSeries s = run_plan(spec, plan, "tb_direct", false);
    s.warnings = std::move(warnings);
    return s;
}

AverageSeries avg_linear_double(const AverageSpec& spec, const LinearParams& params) {
    check_schedule(spec.schedule);
    OrbitPlan plan;
    plan.has_g = spec.g.has_value();
    plan.terms = spec.schedule.back();
    allocate(plan);
    const Coefficient zero = Coefficient::integer(0);
    fill_parallel(plan, [&](std::int64_t i, std::int64_t& flags) {
        const std::int64_t n = params.n_begin + i;
        const FloorResult a = floor_affine(params.a, zero, n);
        check_index(a.floor_value);
        flags += a.boundary_flag;
        plan.f_floor[static_cast<std::size_t>(i)] = a.floor_value;
        if (plan.has_g) {
            const FloorResult b = floor_affine(params.b, params.d, n);
            check_index(b.floor_value);
            flags += b.boundary_flag;
            plan.g_floor[static_cast<std::size_t>(i)] = b.floor_value;
        }
    });
    set_uniform_stops(plan, spec.schedule);
    return run_plan(spec, plan, "linear", false);
}

AverageSeries avg_BAE_family(const AverageSpec& spec, const BAEParams& params) {
    check_schedule(spec.schedule);
    if (!spec.g) throw DomainError("the B/A/E averages need two observables");
    if (is_zero(params.beta)) throw DomainError("beta must be non-zero");
    if (!(params.L > HighReal(0.0))) throw DomainError("L must be positive");
    if (params.rational_case && (params.q < 1 || params.p == 0)) {
        throw DomainError("rational case needs p != 0 and q >= 1");
    }
    const std::int64_t Nmax = spec.schedule.back();

    OrbitPlan plan;
    plan.use_heights = true;
    plan.terms = Nmax;
    allocate(plan);

    // Flow step per unit of the integer argument.
    const HighReal step = params.rational_case
                              ? params.beta.value / (HighReal::from_int(params.q) * params.L)
                              : params.beta.value / params.L;
    Coefficient gamma;
    if (!params.rational_case) {
        if (params.alpha.exact && params.beta.exact) {
            gamma = Coefficient(Rational(params.alpha.exact->num * params.beta.exact->den,
                                         params.alpha.exact->den * params.beta.exact->num));
        } else {
            gamma = Coefficient(params.alpha.value / params.beta.value);
        }
    }
    const Coefficient zero = Coefficient::integer(0);
    fill_parallel(plan, [&](std::int64_t i, std::int64_t& flags) {
        const std::int64_t n = i + 1;
        std::int64_t mf, mg;
        if (params.rational_case) {
            mf = params.p * n;
            mg = params.q * n;
        } else {
            const FloorResult gn = floor_affine(gamma, zero, n);
            flags += gn.boundary_flag;
            mf = gn.floor_value;
            mg = n;
        }
        const FloorResult tf = split_floor(HighReal::from_int(mf) * step);
        const FloorResult tg = split_floor(HighReal::from_int(mg) * step);
        check_index(tf.floor_value);
        check_index(tg.floor_value);
        const auto at = static_cast<std::size_t>(i);
        plan.f_floor[at] = tf.floor_value;
        plan.f_frac[at] = tf.frac_value;
        plan.g_floor[at] = tg.floor_value;
        plan.g_frac[at] = tg.frac_value;
    });

    plan.stops = spec.schedule;
    std::string tag;
    if (params.variant == BAEVariant::A) {
        tag = "A";
        for (auto N : spec.schedule) plan.denominators.push_back(static_cast<double>(N));
    } else {
        const LambdaSet lam = lambda_count(params.L, params.c, Nmax);
        plan.flags += lam.flagged;
        std::vector<std::int64_t> prefix(static_cast<std::size_t>(Nmax) + 1, 0);
        for (std::int64_t n = 1; n <= Nmax; ++n) prefix[n] = prefix[n - 1] + lam.member[n];
        for (auto N : spec.schedule) {
            if (prefix[N] == 0) throw DomainError("Lambda ∩ [N] is empty at N = " + std::to_string(N));
            plan.denominators.push_back(static_cast<double>(prefix[N]));
        }
        plan.weight.assign(static_cast<std::size_t>(Nmax), 0.0);
        if (params.variant == BAEVariant::B) {
            tag = "B";
            for (std::int64_t n = 1; n <= Nmax; ++n) plan.weight[n - 1] = lam.member[n] ? 1.0 : 0.0;
        } else {
            tag = "E";
            const HighReal inv_c = HighReal(1.0) / params.c;
            constexpr std::int64_t kChunk = 1 << 14;
            const std::int64_t chunks = (Nmax + kChunk - 1) / kChunk;
            parallel_for(static_cast<std::size_t>(chunks), [&](std::size_t ch) {
                const std::int64_t lo = static_cast<std::int64_t>(ch) * kChunk + 1;
                const std::int64_t hi = std::min(Nmax, lo + kChunk - 1);
                auto phi_neg_psi = [&](std::int64_t n) {
                    return phi(-pow(HighReal::from_int(n) / params.L, inv_c));
                };
                HighReal prev = phi_neg_psi(lo);
                for (std::int64_t n = lo; n <= hi; ++n) {
                    const HighReal next = phi_neg_psi(n + 1);
                    plan.weight[n - 1] = (next - prev).to_double();
                    prev = next;
                }
            });
        }
    }
    tag += params.rational_case ? "_ra" : "_ir";
    return run_plan(spec, plan, tag, true);
}

WResult avg_W(const AverageSpec& spec, const WParams& params) {
    check_schedule(spec.schedule);
    if (!spec.g) throw DomainError("W needs two observables");
    if (is_zero(params.alpha) || is_zero(params.beta)) throw DomainError("alpha and beta must be non-zero");
    if (spec.schedule.front() < 2) throw DomainError("W needs N >= 2");
    std::vector<std::string> warnings;
    check_c(params.c, spec.override_scope, warnings);
    KernelParams kp;
    if (warnings.empty()) {
        kp = kernel_params(params.c);
    } else {
        kp.c = params.c;
        kp.eps0 = (HighReal(23.0) - HighReal(22.0) * params.c) / (HighReal(40.0) * params.c);
        kp.sigma0 = HighReal(1.0) + kp.eps0 - HighReal(1.0) / params.c;
        if (!(kp.sigma0 > HighReal(0.0))) throw DomainError("kernel exponent sigma0 must be positive");
    }
    const HighReal gamma = params.alpha.value / params.beta.value;

    WResult out;
    out.Ns = spec.schedule;
    out.warnings = warnings;
    const auto points = resolve_points(spec, true);
    out.per_point.assign(points.size(), std::vector<Complex>(spec.schedule.size()));
    for (std::size_t k = 0; k < spec.schedule.size(); ++k) {
        const std::int64_t N = spec.schedule[k];
        const Convergent PQ = best_approx(gamma, N);
        const LambdaSet lam = lambda_count(params.L, params.c, N);
        if (lam.count == 0) throw DomainError("Lambda ∩ [N] is empty at N = " + std::to_string(N));
        const WeightSeq K = fourier_kernel(kp, params.L, N, lam.count);
        out.approximants.push_back(PQ);
        out.lambda_counts.push_back(lam.count);
        out.kernel_M.push_back(kp.M(N));
        out.boundary_flags += lam.flagged;

        OrbitPlan plan;
        plan.use_heights = true;
        plan.terms = N;
        allocate(plan);
        const HighReal base_step = params.beta.value / params.L;
        const HighReal f_step = base_step * HighReal::from_int(PQ.p) / HighReal::from_int(PQ.q);
        fill_parallel(plan, [&](std::int64_t i, std::int64_t&) {
            const HighReal n = HighReal::from_int(i + 1);
            const FloorResult tf = split_floor(n * f_step);
            const FloorResult tg = split_floor(n * base_step);
            check_index(tf.floor_value);
            check_index(tg.floor_value);
            const auto at = static_cast<std::size_t>(i);
            plan.f_floor[at] = tf.floor_value;
            plan.f_frac[at] = tf.frac_value;
            plan.g_floor[at] = tg.floor_value;
            plan.g_frac[at] = tg.frac_value;
        });
        plan.weight = K.values;
        plan.stops = {N};
        plan.denominators = {1.0};
        AverageSpec fixed = spec;
        fixed.at_points = points;
        const AverageSeries s = run_plan(fixed, plan, "W", true);
        for (std::size_t j = 0; j < points.size(); ++j) out.per_point[j][k] = s.per_point[j][0];
        KahanSum l1;
        for (std::size_t j = 0; j < points.size(); ++j) l1.add(std::abs(s.per_point[j][0]));
        out.l1.push_back(l1.value().real() / static_cast<double>(points.size()));
    }
    if (out.Ns.size() >= 2) {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        std::size_t used = 0;
        for (std::size_t k = 0; k < out.Ns.size(); ++k) {
            if (!(out.l1[k] > 0.0)) continue;
            const double x = std::log(static_cast<double>(out.Ns[k]));
            const double y = std::log(out.l1[k]);
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
            ++used;
        }
        const double n = static_cast<double>(used);
        const double den = n * sxx - sx * sx;
        out.slope = used >= 2 && den != 0.0 ? (n * sxy - sx * sy) / den : 0.0;
    }
    return out;
}

namespace {

void check_tc(const AverageSpec& spec, const TCParams& params, std::vector<std::string>& warnings) {
    const std::size_t m = params.b.size();
    if (m == 0 || params.d.size() != m) throw DomainError("b and d must have the same positive length");
    if (static_cast<int>(m) != spec.system.tuple_size()) {
        throw DomainError("b and d need one entry per map of the commuting tuple (" +
                          std::to_string(spec.system.tuple_size()) + ")");
    }
    bool b_zero = true, d_zero = true, same = true, dependent = true;
    for (std::size_t i = 0; i < m; ++i) {
        b_zero = b_zero && is_zero(params.b[i]);
        d_zero = d_zero && is_zero(params.d[i]);
        same = same && params.b[i].value == params.d[i].value;
        for (std::size_t j = 0; j < m; ++j) {
            const HighReal lhs = params.b[i].value * params.d[j].value;
            const HighReal rhs = params.b[j].value * params.d[i].value;
            const HighReal scale = abs(lhs) + abs(rhs);
            if (abs(lhs - rhs) > scale * HighReal(0x1p-90)) dependent = false;
        }
    }
    if (b_zero || d_zero) throw DomainError("b and d must be non-zero vectors");
    if (same || !dependent) {
        if (!spec.override_scope) {
            throw ScopeError("b and d must be distinct and linearly dependent; set the override flag to explore");
        }
        warnings.push_back("b, d outside the convergence hypotheses: run is exploratory");
    }
}

}  // namespace

AverageSeries avg_multi_TC(const AverageSpec& spec, const TCParams& params) {
    check_schedule(spec.schedule);
    if (!spec.g) throw DomainError("the multiple average needs two observables");
    std::vector<std::string> warnings;
    check_c(params.c, spec.override_scope, warnings);
    check_tc(spec, params, warnings);
    const bool multi = spec.system.tuple_size() > 1;
    MpSide mp;
    if (params.c_mp) {
        if (params.b_mp.size() != params.b.size() || params.d_mp.size() != params.d.size()) {
            throw DomainError("MPFR coefficients must match b and d");
        }
        mp = MpSide{&params.b_mp, &params.d_mp, &*params.c_mp};
    }
    OrbitPlan plan = power_plan(params.b, &params.d, params.c, spec.schedule.back(), multi, mp);
    set_uniform_stops(plan, spec.schedule);
    AverageSeries s = run_plan(spec, plan, "tc_multi", false);
    s.warnings = std::move(warnings);
    return s;
}

SupProbe sup_average_probe(const AverageSpec& spec, const std::vector<Coefficient>& alphas,
                           const HighReal& c) {
    check_schedule(spec.schedule);
    if (alphas.empty() || static_cast<int>(alphas.size()) != spec.system.tuple_size()) {
        throw DomainError("need one coefficient per map of the commuting tuple");
    }
    for (const auto& a : alphas) {
        if (is_zero(a)) throw DomainError("coefficients must be non-zero");
    }
    if (!(c > HighReal(0.0))) throw DomainError("c must be positive");
    const bool multi = spec.system.tuple_size() > 1;
    OrbitPlan plan = power_plan(alphas, nullptr, c, spec.schedule.back(), multi);
    set_uniform_stops(plan, spec.schedule);
    SupProbe out;
    out.series = run_plan(spec, plan, "sup_probe", false);
    KahanSum sq;
    for (const auto& row : out.series.per_point) {
        double m = 0.0;
        for (const auto& v : row) m = std::max(m, std::abs(v));
        out.per_point_sup.push_back(m);
        sq.add(m * m);
    }
    out.lp_mean = std::sqrt(sq.value().real() / static_cast<double>(out.per_point_sup.size()));
    return out;
}

double oscillation(const std::vector<Complex>& values) {
    const std::size_t K = values.size();
    if (K < 3) throw DomainError("oscillation needs at least 3 checkpoints");
    const std::size_t start = (2 * K) / 3;
    double out = 0.0;
    for (std::size_t i = start; i < K; ++i) {
        for (std::size_t j = i + 1; j < K; ++j) out = std::max(out, std::abs(values[i] - values[j]));
    }
    return out;
}

double oscillation(const AverageSeries& series) { return oscillation(series.mean); }

BAEDiagnostic bae_diagnostic(const AverageSpec& spec, BAEParams params) {
    if (spec.schedule.size() < 3) throw DomainError("diagnostic needs at least 3 checkpoints");
    BAEDiagnostic d;
    params.variant = BAEVariant::B;
    d.B = avg_BAE_family(spec, params);
    params.variant = BAEVariant::A;
    d.A = avg_BAE_family(spec, params);
    params.variant = BAEVariant::E;
    d.E = avg_BAE_family(spec, params);
    const std::size_t K = spec.schedule.size();
    for (std::size_t j = 0; j < d.B.per_point.size(); ++j) {
        double bm = 0.0, em = 0.0;
        for (std::size_t k = K - 3; k < K; ++k) {
            bm = std::max(bm, std::abs(d.B.per_point[j][k] - d.A.per_point[j][k]));
            em = std::max(em, std::abs(d.E.per_point[j][k]));
        }
        d.b_minus_a.push_back(bm);
        d.e_max.push_back(em);
    }
    return d;
}

}  // namespace ergolab
