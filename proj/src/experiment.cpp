#include "ergolab/experiment.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "ergolab/averages.hpp"
#include "ergolab/equidistribution.hpp"
#include "ergolab/expr.hpp"
#include "ergolab/kernels.hpp"
#include "ergolab/limits.hpp"

namespace ergolab {

namespace {

const Json& require(const Json& c, const std::string& key) {
    if (!c.is_object() || !c.contains(key)) throw ConfigError("missing required key '" + key + "'");
    return c.at(key);
}

Coefficient scalar(const Json& v, const std::string& key) {
    try {
        if (v.is_number_integer()) return Coefficient::integer(v.get<std::int64_t>());
        if (v.is_number()) return Coefficient(v.get<double>());
        if (v.is_string()) return parse_scalar(v.get<std::string>());
    } catch (const ParseError& e) {
        throw ConfigError("key '" + key + "': " + e.what());
    }
    throw ConfigError("key '" + key + "' must be a number or an expression string");
}

Coefficient scalar_at(const Json& c, const std::string& key) { return scalar(require(c, key), key); }

MpReal scalar_mp(const Json& v, const std::string& key, int bits) {
    if (v.is_number_integer()) {
        MpReal r(bits);
        mpfr_set_si(r.get(), static_cast<long>(v.get<std::int64_t>()), MPFR_RNDN);
        return r;
    }
    if (v.is_number()) return MpReal(bits, v.get<double>());
    if (v.is_string()) {
        try {
            return parse_scalar_mp(v.get<std::string>(), bits);
        } catch (const ParseError& e) {
            throw ConfigError("key '" + key + "': " + e.what());
        }
    }
    throw ConfigError("key '" + key + "' must be a number or an expression string");
}

std::int64_t int_at(const Json& c, const std::string& key) {
    const Json& v = require(c, key);
    if (v.is_number_integer()) return v.get<std::int64_t>();
    if (v.is_number_float()) {
        const double d = v.get<double>();
        if (d == std::floor(d) && std::abs(d) < 0x1p62) return static_cast<std::int64_t>(d);
    }
    throw ConfigError("key '" + key + "' must be an integer");
}

std::vector<Coefficient> scalar_list(const Json& c, const std::string& key) {
    const Json& v = require(c, key);
    if (!v.is_array() || v.empty()) throw ConfigError("key '" + key + "' must be a non-empty array");
    std::vector<Coefficient> out;
    for (std::size_t i = 0; i < v.size(); ++i) out.push_back(scalar(v[i], key + "[" + std::to_string(i) + "]"));
    return out;
}

Complex complex_value(const Json& v, const std::string& key) {
    if (v.is_number()) return {v.get<double>(), 0.0};
    if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number()) {
        return {v[0].get<double>(), v[1].get<double>()};
    }
    if (v.is_string()) return {scalar(v, key).value.to_double(), 0.0};
    throw ConfigError("key '" + key + "' must be a number or a [re, im] pair");
}

Json complex_json(Complex v) { return Json::array({v.real(), v.imag()}); }

void set_default(Json& c, const std::string& key, const Json& value) {
    if (!c.contains(key)) c[key] = value;
}

const std::vector<std::string>& experiment_kinds() {
    static const std::vector<std::string> kinds{
        "tb_direct",   "tc_multi",         "linear_baseline", "bae_family", "w_decay",
        "limit_compare", "equidistribution", "vdc_suite",     "sup_probe"};
    return kinds;
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::vector<std::int64_t> schedule_from(const Json& c, std::int64_t n_min = 1) {
    if (c.contains("schedule")) {
        std::vector<std::int64_t> s;
        for (const auto& v : c.at("schedule")) {
            if (!v.is_number_integer()) throw ConfigError("key 'schedule' must hold integers");
            s.push_back(v.get<std::int64_t>());
        }
        if (s.empty()) throw ConfigError("key 'schedule' must be non-empty");
        return s;
    }
    const std::int64_t n_max = int_at(c, "n_max");
    const auto root = static_cast<int>(int_at(c, "lambda_root"));
    if (n_max < 1) throw ConfigError("key 'n_max' must be >= 1");
    if (root < 1) throw ConfigError("key 'lambda_root' must be >= 1");
    return lacunary_schedule(root, n_max, std::min(n_min, n_max));
}

AverageSpec spec_from(const Json& c, bool with_g) {
    const MPSystem system = parse_system(require(c, "system"));
    Observable f = parse_observable(require(c, "f"), system);
    std::optional<Observable> g;
    if (with_g) g = parse_observable(require(c, "g"), system);
    AverageSpec spec{system, f, g, {}, 0, 0, false, {}};
    spec.points = static_cast<std::size_t>(int_at(c, "points"));
    if (spec.points < 1) throw ConfigError("key 'points' must be >= 1");
    spec.seed = static_cast<std::uint64_t>(int_at(c, "seed"));
    spec.override_scope = c.value("override", false);
    return spec;
}

void add_series_rows(ExperimentResult& r, const AverageSeries& s) {
    for (std::size_t k = 0; k < s.checkpoints.size(); ++k) {
        ResultRow row;
        row.N = s.checkpoints[k];
        row.value_re = s.mean[k].real();
        row.value_im = s.mean[k].imag();
        row.dispersion = s.dispersion[k];
        row.flags = k < s.flags_at.size() ? s.flags_at[k] : s.boundary_flags;
        r.rows.push_back(row);
    }
    r.bound = s.bound;
    for (const auto& w : s.warnings) r.warnings.push_back(w);
    Json finals = Json::array();
    for (const auto& row : s.per_point) finals.push_back(complex_json(row.back()));
    r.sidecar["per_point_final"] = finals;
    Json osc = Json::array();
    for (const auto& row : s.per_point) osc.push_back(row.size() >= 3 ? Json(oscillation(row)) : Json());
    r.sidecar["per_point_oscillation"] = osc;
    r.sidecar["boundary_flags"] = s.boundary_flags;
}

AverageSeries with_checkpoints(AverageSeries s, const std::vector<std::int64_t>& schedule) {
    s.checkpoints = schedule;
    return s;
}

// gamma = alpha / beta in lowest terms, when both carry exact forms.
std::optional<Rational> exact_ratio(const Coefficient& a, const Coefficient& b) {
    if (!a.exact || !b.exact || b.exact->num == 0) return std::nullopt;
    const __int128 num = static_cast<__int128>(a.exact->num) * b.exact->den;
    const __int128 den = static_cast<__int128>(a.exact->den) * b.exact->num;
    constexpr __int128 kLimit = static_cast<__int128>(1) << 62;
    if (num >= kLimit || -num >= kLimit || den >= kLimit || -den >= kLimit) return std::nullopt;
    return Rational(static_cast<std::int64_t>(num), static_cast<std::int64_t>(den));
}

HighReal default_L(const Json& c, const HighReal& gamma, const Coefficient& beta) {
    if (c.contains("L")) {
        const HighReal L = scalar_at(c, "L").value;
        if (!(L > HighReal(0.0))) throw ConfigError("key 'L' must be positive");
        return L;
    }
    const std::int64_t k = int_at(c, "k");
    if (k < 1) throw ConfigError("key 'k' must be >= 1");
    return HighReal::from_int(k) * (abs(gamma) + HighReal(3.0)) * abs(beta.value);
}

std::int64_t first_lambda_member(const HighReal& L, const HighReal& c) {
    for (std::int64_t n = 1;; ++n) {
        const FloorResult f = floor_pow(Coefficient(L), c, n);
        if (f.floor_value >= 1) return f.floor_value;
    }
}

TBParams tb_params(const Json& c) {
    TBParams p{scalar_at(c, "alpha"), scalar_at(c, "beta"), scalar_at(c, "c").value, {}, {}, {}};
    const auto bits = static_cast<int>(int_at(c, "precision_bits"));
    if (bits > HighReal::precision_bits()) {
        p.alpha_mp = scalar_mp(c.at("alpha"), "alpha", bits);
        p.beta_mp = scalar_mp(c.at("beta"), "beta", bits);
        p.c_mp = scalar_mp(c.at("c"), "c", bits);
    }
    return p;
}

// ---------------------------------------------------------------------------

void run_tb(const Json& c, ExperimentResult& r) {
    AverageSpec spec = spec_from(c, true);
    spec.schedule = schedule_from(c);
    const AverageSeries s = avg_nc_double(spec, tb_params(c));
    add_series_rows(r, with_checkpoints(s, spec.schedule));
}

void run_limit_compare(const Json& c, ExperimentResult& r) {
    AverageSpec spec = spec_from(c, true);
    spec.schedule = schedule_from(c);
    const TBParams tb = tb_params(c);
    const AverageSeries s = with_checkpoints(avg_nc_double(spec, tb), spec.schedule);
    add_series_rows(r, s);

    const std::string formula = c.at("formula").get<std::string>();
    const std::int64_t inner_N = int_at(c, "inner_N");
    const std::int64_t grid_G = int_at(c, "grid_G");
    std::optional<Rational> pq;
    if (c.contains("p") || c.contains("q")) {
        pq = Rational(int_at(c, "p"), int_at(c, "q"));
    } else {
        pq = exact_ratio(tb.alpha, tb.beta);
    }
    bool rational = formula == "rational";
    if (formula == "auto") rational = pq.has_value();
    if (rational && !pq) throw ConfigError("rational formula needs 'p' and 'q' or exact alpha, beta");
    if (formula != "auto" && formula != "rational" && formula != "irrational") {
        throw ConfigError("key 'formula' must be auto, rational or irrational");
    }
    Coefficient gamma;
    if (auto ex = exact_ratio(tb.alpha, tb.beta)) {
        gamma = Coefficient(*ex);
    } else {
        gamma = Coefficient(tb.alpha.value / tb.beta.value);
    }

    const auto points = resolve_points(spec, false);
    Json per_point = Json::array();
    double max_diff = 0.0;
    KahanSum rhs_sum;
    std::vector<LimitEval> evals(points.size());
    parallel_for(points.size(), [&](std::size_t j) {
        evals[j] = rational
                       ? limit_rational_eval(spec.system, spec.f, *spec.g, pq->num, pq->den, points[j].base, inner_N, grid_G)
                       : limit_irrational_eval(spec.system, spec.f, *spec.g, gamma, points[j].base, inner_N, grid_G);
    });
    for (std::size_t j = 0; j < points.size(); ++j) {
        const LimitReport rep = compare_limits(s.per_point[j].back(), evals[j].value);
        max_diff = std::max(max_diff, rep.abs_diff);
        rhs_sum.add(evals[j].value);
        per_point.push_back(Json{{"lhs_value", complex_json(rep.lhs_value)},
                                 {"rhs_value", complex_json(rep.rhs_value)},
                                 {"abs_diff", rep.abs_diff},
                                 {"inner_oscillation", evals[j].inner_oscillation},
                                 {"inner_flagged", evals[j].inner_flagged}});
    }
    if (!evals.empty()) {
        for (const auto& w : evals[0].warnings) r.warnings.push_back(w);
    }
    const double n = static_cast<double>(points.size());
    const Complex rhs_mean{rhs_sum.value().real() / n, rhs_sum.value().imag() / n};
    LimitReport mean = compare_limits(s, rhs_mean);
    mean.inner_N = evals.empty() ? inner_N : evals[0].inner_N;
    mean.quadrature_points = evals.empty() ? grid_G : evals[0].quadrature_points;
    Json rep{{"name", r.name},
             {"formula", rational ? "rational" : "irrational"},
             {"lhs_value", complex_json(mean.lhs_value)},
             {"rhs_value", complex_json(mean.rhs_value)},
             {"abs_diff", mean.abs_diff},
             {"max_abs_diff", max_diff},
             {"quadrature_points", mean.quadrature_points},
             {"inner_N", mean.inner_N},
             {"inner_exact", !evals.empty() && evals[0].inner_exact},
             {"N", s.checkpoints.back()}};
    if (rational) {
        rep["p"] = pq->num;
        rep["q"] = pq->den;
    } else {
        rep["gamma"] = to_string(gamma.value);
    }
    rep["per_point"] = per_point;
    r.limit_report = rep;
    r.sidecar["max_abs_diff"] = max_diff;
}

void run_tc(const Json& c, ExperimentResult& r) {
    AverageSpec spec = spec_from(c, true);
    spec.schedule = schedule_from(c);
    TCParams p{scalar_list(c, "b"), scalar_list(c, "d"), scalar_at(c, "c").value, {}, {}, {}};
    const auto bits = static_cast<int>(int_at(c, "precision_bits"));
    if (bits > HighReal::precision_bits()) {
        for (std::size_t i = 0; i < c.at("b").size(); ++i) p.b_mp.push_back(scalar_mp(c.at("b")[i], "b", bits));
        for (std::size_t i = 0; i < c.at("d").size(); ++i) p.d_mp.push_back(scalar_mp(c.at("d")[i], "d", bits));
        p.c_mp = scalar_mp(c.at("c"), "c", bits);
    }
    add_series_rows(r, with_checkpoints(avg_multi_TC(spec, p), spec.schedule));
}

void run_linear(const Json& c, ExperimentResult& r) {
    AverageSpec spec = spec_from(c, true);
    spec.schedule = schedule_from(c);
    LinearParams p{scalar_at(c, "a"), scalar_at(c, "b"), scalar_at(c, "d"), int_at(c, "n_begin")};
    add_series_rows(r, with_checkpoints(avg_linear_double(spec, p), spec.schedule));
}

void run_bae(const Json& c, ExperimentResult& r) {
    AverageSpec spec = spec_from(c, true);
    BAEParams p;
    p.alpha = scalar_at(c, "alpha");
    p.beta = scalar_at(c, "beta");
    p.c = scalar_at(c, "c").value;
    const std::string cs = c.at("case").get<std::string>();
    if (cs != "ir" && cs != "ra") throw ConfigError("key 'case' must be ir or ra");
    p.rational_case = cs == "ra";
    HighReal gamma = p.alpha.value / p.beta.value;
    if (p.rational_case) {
        std::optional<Rational> pq;
        if (c.contains("p") || c.contains("q")) {
            pq = Rational(int_at(c, "p"), int_at(c, "q"));
        } else {
            pq = exact_ratio(p.alpha, p.beta);
        }
        if (!pq) throw ConfigError("the ra case needs 'p' and 'q' or exact alpha, beta");
        p.p = pq->num;
        p.q = pq->den;
        gamma = pq->value();
    }
    p.L = default_L(c, gamma, p.beta);
    const std::string v = c.at("variant").get<std::string>();
    if (v == "B") p.variant = BAEVariant::B;
    else if (v == "A") p.variant = BAEVariant::A;
    else if (v == "E") p.variant = BAEVariant::E;
    else throw ConfigError("key 'variant' must be B, A or E");
    spec.schedule = schedule_from(c, first_lambda_member(p.L, p.c));
    r.sidecar["L"] = to_string(p.L);

    if (c.value("diagnostic", false)) {
        const BAEDiagnostic d = bae_diagnostic(spec, p);
        const AverageSeries& chosen = p.variant == BAEVariant::B ? d.B : p.variant == BAEVariant::A ? d.A : d.E;
        add_series_rows(r, with_checkpoints(chosen, spec.schedule));
        Json diag = Json::array();
        for (std::size_t j = 0; j < d.b_minus_a.size(); ++j) {
            diag.push_back(Json{{"b_minus_a", d.b_minus_a[j]},
                                {"e_max", d.e_max[j]},
                                {"within_slack", d.b_minus_a[j] <= d.e_max[j] + 0.05}});
        }
        r.sidecar["bae_diagnostic"] = diag;
        return;
    }
    add_series_rows(r, with_checkpoints(avg_BAE_family(spec, p), spec.schedule));
}

void run_w(const Json& c, ExperimentResult& r) {
    AverageSpec spec = spec_from(c, true);
    WParams p{scalar_at(c, "alpha"), scalar_at(c, "beta"), scalar_at(c, "c").value, HighReal(0.0)};
    p.L = default_L(c, p.alpha.value / p.beta.value, p.beta);
    if (c.contains("Ns")) {
        for (const auto& v : c.at("Ns")) spec.schedule.push_back(v.get<std::int64_t>());
    } else {
        const std::int64_t lo = int_at(c, "log2_min"), hi = int_at(c, "log2_max");
        if (lo < 1 || hi < lo || hi > 40) throw ConfigError("keys 'log2_min', 'log2_max' must satisfy 1 <= min <= max <= 40");
        for (std::int64_t j = lo; j <= hi; ++j) spec.schedule.push_back(std::int64_t{1} << j);
    }
    const WResult w = avg_W(spec, p);
    for (std::size_t k = 0; k < w.Ns.size(); ++k) {
        ResultRow row;
        row.N = w.Ns[k];
        row.value_re = w.l1[k];
        for (const auto& pp : w.per_point) row.dispersion = std::max(row.dispersion, std::abs(std::abs(pp[k]) - w.l1[k]));
        row.flags = w.boundary_flags;
        r.rows.push_back(row);
    }
    r.bound = spec.f.bound() * spec.g->bound();
    Json approx = Json::array();
    for (std::size_t k = 0; k < w.Ns.size(); ++k) {
        approx.push_back(Json{{"N", w.Ns[k]},
                              {"P", w.approximants[k].p},
                              {"Q", w.approximants[k].q},
                              {"lambda_count", w.lambda_counts[k]},
                              {"M", w.kernel_M[k]}});
    }
    r.sidecar["L"] = to_string(p.L);
    r.sidecar["approximants"] = approx;
    r.sidecar["slope"] = w.slope;
    for (const auto& msg : w.warnings) r.warnings.push_back(msg);
    r.sidecar["boundary_flags"] = w.boundary_flags;
}

void run_equidistribution(const Json& c, ExperimentResult& r) {
    const Coefficient alpha = scalar_at(c, "alpha");
    const HighReal cc = scalar_at(c, "c").value;
    if (!(cc > HighReal(0.0)) || !(cc < HighReal(2.0))) throw ConfigError("key 'c' must lie in (0, 2)");
    const auto bins = static_cast<int>(int_at(c, "bins"));
    const std::int64_t k = int_at(c, "k");
    const double s = scalar_at(c, "s").value.to_double();
    std::vector<std::int64_t> Ns;
    if (c.contains("Ns")) {
        for (const auto& v : c.at("Ns")) Ns.push_back(v.get<std::int64_t>());
    } else {
        Ns.push_back(int_at(c, "n_max"));
    }
    Json reports = Json::array();
    bool decreasing = true;
    double prev = 2.0;
    for (const auto N : Ns) {
        const EquidistributionReport e = equidistribution_report(alpha, cc, N, bins, k, s);
        ResultRow row;
        row.N = N;
        row.value_re = e.star_discrepancy;
        row.value_im = e.ik_hit_rate;
        row.flags = e.boundary_flags;
        r.rows.push_back(row);
        decreasing = decreasing && e.star_discrepancy < prev;
        prev = e.star_discrepancy;
        reports.push_back(Json{{"N", N},
                               {"star_discrepancy", e.star_discrepancy},
                               {"non_equidistributed", e.non_equidistributed},
                               {"ik_hit_rate", e.ik_hit_rate},
                               {"ik_measure", e.ik_measure},
                               {"histogram", e.histogram}});
    }
    r.sidecar["reports"] = reports;
    r.sidecar["discrepancy_decreasing"] = decreasing;
}

void run_vdc(const Json& c, ExperimentResult& r) {
    const std::int64_t count = int_at(c, "instances");
    const std::int64_t max_s = int_at(c, "max_support");
    const std::int64_t max_h = int_at(c, "max_H");
    if (count < 0 || max_s < 1 || max_h < 1) throw ConfigError("vdc_suite sizes must be positive");
    std::mt19937_64 rng(static_cast<std::uint64_t>(int_at(c, "seed")));
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    auto pick = [&](std::int64_t lo, std::int64_t hi) {
        return lo + static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(hi - lo + 1));
    };
    bool all_pass = true;
    auto record = [&](std::int64_t index, const VdcResult& v) {
        const bool ok = v.lhs <= v.rhs * (1.0 + kBoundaryGuard) + kBoundaryGuard;
        all_pass = all_pass && ok;
        ResultRow row;
        row.N = index;
        row.value_re = v.lhs;
        row.value_im = v.rhs;
        row.flags = ok ? 0 : 1;
        r.rows.push_back(row);
    };
    for (std::int64_t i = 1; i <= count; ++i) {
        FiniteSeq g;
        g.begin = pick(-16, 16);
        g.values.resize(static_cast<std::size_t>(pick(1, max_s)));
        for (auto& v : g.values) v = Complex(unit(rng), unit(rng));
        std::vector<std::int64_t> H(static_cast<std::size_t>(pick(1, max_h)));
        for (auto& h : H) h = pick(-10, 10);
        record(i, vdc_check(g, H));
    }
    FiniteSeq ones;
    ones.begin = 1;
    ones.values.assign(10, Complex(1.0, 0.0));
    const VdcResult worked = vdc_check(ones, {1, 2, 3, 4, 5});
    record(count + 1, worked);
    r.sidecar["all_pass"] = all_pass;
    r.sidecar["worked_example"] = Json{{"lhs", worked.lhs},
                                       {"rhs", worked.rhs},
                                       {"difference_set_size", worked.difference_set_size},
                                       {"correlation", worked.correlation}};
}

void run_sup(const Json& c, ExperimentResult& r) {
    AverageSpec spec = spec_from(c, false);
    spec.schedule = schedule_from(c);
    const SupProbe p = sup_average_probe(spec, scalar_list(c, "alphas"), scalar_at(c, "c").value);
    add_series_rows(r, with_checkpoints(p.series, spec.schedule));
    r.sidecar["per_point_sup"] = p.per_point_sup;
    r.sidecar["l2_mean_of_sup"] = p.lp_mean;
}

}  // namespace

// ---------------------------------------------------------------------------

MPSystem parse_system(const Json& s) {
    const std::string kind = require(s, "kind").get<std::string>();
    if (kind == "circle_rotation") return MPSystem::circle_rotation(scalar_at(s, "theta").value);
    if (kind == "skew_product") return MPSystem::skew_product(scalar_at(s, "theta").value);
    if (kind == "torus_translation") {
        std::vector<HighReal> theta;
        for (const auto& v : scalar_list(s, "theta")) theta.push_back(v.value);
        return MPSystem::torus_translation(std::move(theta));
    }
    if (kind == "bernoulli_shift") {
        return MPSystem::bernoulli_shift(static_cast<int>(int_at(s, "alphabet")),
                                         static_cast<std::uint64_t>(s.value("prf_seed", std::int64_t{0})));
    }
    if (kind == "finite_cycle") return MPSystem::finite_cycle(int_at(s, "modulus"));
    if (kind == "product") {
        std::vector<MPSystem> factors;
        for (const auto& f : require(s, "factors")) factors.push_back(parse_system(f));
        return MPSystem::product(std::move(factors));
    }
    throw ConfigError("unknown system kind '" + kind + "'");
}

Observable parse_observable(const Json& s, const MPSystem& system) {
    const std::string kind = require(s, "kind").get<std::string>();
    std::optional<Observable> o;
    if (kind == "constant") {
        o = Observable::constant(system, complex_value(require(s, "value"), "value"));
    } else if (kind == "character") {
        std::vector<std::int64_t> freq;
        const Json& f = require(s, "freq");
        if (f.is_number_integer()) {
            freq.push_back(f.get<std::int64_t>());
        } else {
            for (const auto& v : f) freq.push_back(v.get<std::int64_t>());
        }
        o = Observable::character(system, std::move(freq));
    } else if (kind == "coordinate_indicator") {
        std::vector<std::pair<double, double>> cell;
        for (const auto& v : require(s, "cell")) cell.emplace_back(v.at(0).get<double>(), v.at(1).get<double>());
        o = Observable::coordinate_indicator(system, std::move(cell));
    } else if (kind == "bernoulli_mean_zero") {
        o = Observable::bernoulli_mean_zero(system, static_cast<int>(s.value("shift_index", 0)));
    } else if (kind == "finite_table") {
        std::vector<Complex> values;
        for (const auto& v : require(s, "values")) values.push_back(complex_value(v, "values"));
        o = Observable::finite_table(system, std::move(values));
    } else {
        throw ConfigError("unknown observable kind '" + kind + "'");
    }
    if (s.value("conj", false)) return o->conj();
    return *o;
}

Json resolve_config(const Json& raw) {
    if (!raw.is_object()) throw ConfigError("config must be a JSON object");
    Json c = raw;
    const std::string kind = require(c, "experiment").get<std::string>();
    bool known = false;
    for (const auto& k : experiment_kinds()) known = known || k == kind;
    if (!known) throw ConfigError("unknown experiment kind '" + kind + "'");
    set_default(c, "name", kind);
    set_default(c, "points", 8);
    set_default(c, "seed", 1);
    set_default(c, "precision_bits", HighReal::precision_bits());
    set_default(c, "lambda_root", 8);
    set_default(c, "override", false);

    auto need = [&](std::initializer_list<const char*> keys) {
        for (const char* k : keys) require(c, k);
    };
    if (kind == "tb_direct" || kind == "limit_compare") {
        need({"system", "f", "g", "alpha", "beta", "c"});
        if (!c.contains("schedule")) need({"n_max"});
        if (kind == "limit_compare") {
            set_default(c, "formula", "auto");
            set_default(c, "inner_N", 100000);
            set_default(c, "grid_G", 512);
        }
    } else if (kind == "tc_multi") {
        need({"system", "f", "g", "b", "d", "c"});
        if (!c.contains("schedule")) need({"n_max"});
    } else if (kind == "linear_baseline") {
        need({"system", "f", "g", "a", "b"});
        if (!c.contains("schedule")) need({"n_max"});
        set_default(c, "d", 0);
        set_default(c, "n_begin", 1);
    } else if (kind == "bae_family") {
        need({"system", "f", "g", "alpha", "beta", "c"});
        if (!c.contains("schedule")) need({"n_max"});
        set_default(c, "variant", "B");
        set_default(c, "case", "ir");
        set_default(c, "diagnostic", false);
        if (!c.contains("L")) set_default(c, "k", 1);
    } else if (kind == "w_decay") {
        need({"system", "f", "g", "alpha", "beta", "c"});
        if (!c.contains("Ns")) {
            set_default(c, "log2_min", 10);
            set_default(c, "log2_max", 20);
        }
        if (!c.contains("L")) set_default(c, "k", 1);
    } else if (kind == "equidistribution") {
        need({"alpha", "c"});
        if (!c.contains("Ns")) need({"n_max"});
        set_default(c, "bins", 100);
        set_default(c, "k", 0);
        set_default(c, "s", 0);
    } else if (kind == "vdc_suite") {
        set_default(c, "instances", 200);
        set_default(c, "max_support", 32);
        set_default(c, "max_H", 8);
    } else if (kind == "sup_probe") {
        need({"system", "f", "alphas", "c"});
        if (!c.contains("schedule")) need({"n_max"});
    }
    if (int_at(c, "precision_bits") < HighReal::precision_bits()) {
        throw ConfigError("key 'precision_bits' must be >= 106");
    }
    return c;
}

ExperimentResult run_experiment(const Json& config) {
    const Json c = resolve_config(config);
    ExperimentResult r;
    r.name = c.at("name").get<std::string>();
    const auto start = std::chrono::steady_clock::now();
    const std::string kind = c.at("experiment").get<std::string>();
    if (kind == "tb_direct") run_tb(c, r);
    else if (kind == "limit_compare") run_limit_compare(c, r);
    else if (kind == "tc_multi") run_tc(c, r);
    else if (kind == "linear_baseline") run_linear(c, r);
    else if (kind == "bae_family") run_bae(c, r);
    else if (kind == "w_decay") run_w(c, r);
    else if (kind == "equidistribution") run_equidistribution(c, r);
    else if (kind == "vdc_suite") run_vdc(c, r);
    else if (kind == "sup_probe") run_sup(c, r);
    const double ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    for (auto& row : r.rows) row.wall_ms = ms;

    Json side;
    side["config"] = c;
    Json sched = Json::array();
    for (const auto& row : r.rows) sched.push_back(row.N);
    side["schedule"] = sched;
    const auto bits = int_at(c, "precision_bits");
    side["versions"] = Json{{"ergolab", kVersion},
                            {"arithmetic", bits > HighReal::precision_bits()
                                               ? "mpfr-" + std::to_string(bits)
                                               : std::string("double-double")},
                            {"mpfr", mpfr_get_version()}};
    side["wall_ms"] = ms;
    side["warnings"] = r.warnings;
    for (auto& [k, v] : r.sidecar.items()) side[k] = v;
    r.sidecar = side;
    return r;
}

std::string to_csv(const std::vector<ResultRow>& rows, bool timing) {
    std::ostringstream out;
    out << "N,value_re,value_im,dispersion,flags,ms\n";
    for (const auto& r : rows) {
        out << r.N << ',' << format_double(r.value_re) << ',' << format_double(r.value_im) << ','
            << format_double(r.dispersion) << ',' << r.flags << ','
            << (timing ? format_double(r.wall_ms) : std::string("0")) << '\n';
    }
    return out.str();
}

void apply_override(Json& config, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("override '" + assignment + "' must be key=value");
    const std::string path = assignment.substr(0, eq);
    const std::string text = assignment.substr(eq + 1);
    Json value = Json::parse(text, nullptr, false);
    if (value.is_discarded()) value = text;
    Json* node = &config;
    std::size_t pos = 0;
    for (;;) {
        const auto dot = path.find('.', pos);
        const std::string key = path.substr(pos, dot == std::string::npos ? std::string::npos : dot - pos);
        if (key.empty()) throw ConfigError("override '" + assignment + "' has an empty key");
        if (dot == std::string::npos) {
            (*node)[key] = value;
            return;
        }
        if (!node->contains(key) || !(*node)[key].is_object()) (*node)[key] = Json::object();
        node = &(*node)[key];
        pos = dot + 1;
    }
}

Json load_config(const std::string& path_or_preset) {
    const auto& presets = preset_catalog();
    std::string text;
    if (const auto it = presets.find(path_or_preset); it != presets.end() &&
                                                      !std::filesystem::exists(path_or_preset)) {
        text = it->second;
    } else {
        std::ifstream in(path_or_preset);
        if (!in) throw ConfigError("cannot read config '" + path_or_preset + "'");
        std::ostringstream ss;
        ss << in.rdbuf();
        text = ss.str();
    }
    Json j;
    try {
        j = Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw ConfigError("config '" + path_or_preset + "' is not valid JSON: " + e.what());
    }
    if (j.is_object() && !j.contains("experiment") && j.contains("config")) return j.at("config");
    return j;
}

AssertOutcome check_expectations(const ExperimentResult& result, const Json& expectations) {
    AssertOutcome out;
    if (!expectations.contains(result.name)) {
        throw ConfigError("no expectation pinned for '" + result.name + "'");
    }
    const Json& e = expectations.at(result.name);
    auto fail = [&](const std::string& msg) {
        out.ok = false;
        out.messages.push_back(result.name + ": " + msg);
    };
    if (e.contains("value_re") || e.contains("value_im")) {
        if (result.rows.empty()) {
            fail("no rows");
        } else {
            const auto& last = result.rows.back();
            const double tol = e.value("tol", 0.0);
            const double dre = std::abs(last.value_re - e.value("value_re", 0.0));
            const double dim = std::abs(last.value_im - e.value("value_im", 0.0));
            if (!(dre <= tol && dim <= tol)) {
                fail("final value (" + format_double(last.value_re) + ", " + format_double(last.value_im) +
                     ") outside tolerance " + format_double(tol));
            }
        }
    }
    if (e.contains("max_abs_diff")) {
        const double lim = e.at("max_abs_diff").get<double>();
        if (!result.limit_report) {
            fail("no limit report");
        } else if (!(result.limit_report->at("max_abs_diff").get<double>() < lim)) {
            fail("limit comparison differs by " + format_double(result.limit_report->at("max_abs_diff").get<double>()));
        }
    }
    if (e.contains("slope_max")) {
        const double s = result.sidecar.value("slope", 0.0);
        if (!(s < e.at("slope_max").get<double>())) fail("fitted slope " + format_double(s));
    }
    if (e.contains("all_pass") && result.sidecar.value("all_pass", false) != e.at("all_pass").get<bool>()) {
        fail("instance suite did not pass");
    }
    if (e.contains("discrepancy_max") && !result.rows.empty() &&
        !(result.rows.back().value_re < e.at("discrepancy_max").get<double>())) {
        fail("discrepancy " + format_double(result.rows.back().value_re));
    }
    if (out.ok) out.messages.push_back(result.name + ": ok");
    return out;
}

std::string write_outputs(const ExperimentResult& result, const std::string& dir, bool timing) {
    std::filesystem::create_directories(dir);
    const std::filesystem::path base = std::filesystem::path(dir) / result.name;
    const std::string csv = base.string() + ".csv";
    {
        std::ofstream out(csv, std::ios::binary);
        out << to_csv(result.rows, timing);
    }
    {
        std::ofstream out(base.string() + ".json", std::ios::binary);
        out << result.sidecar.dump(2) << '\n';
    }
    if (result.limit_report) {
        std::ofstream out(base.string() + ".limit.json", std::ios::binary);
        out << result.limit_report->dump(2) << '\n';
    }
    return csv;
}

// ---------------------------------------------------------------------------

const std::map<std::string, std::string>& preset_catalog() {
    static const std::map<std::string, std::string> presets{
        {"trivial_ones", R"J({
  "name": "trivial_ones", "experiment": "tb_direct",
  "system": {"kind": "circle_rotation", "theta": "sqrt(2)-1"},
  "f": {"kind": "constant", "value": 1}, "g": {"kind": "constant", "value": 1},
  "alpha": 2, "beta": 1, "c": "1.02", "n_max": 10000, "points": 4, "seed": 1
})J"},
        {"tb_rotation_char", R"J({
  "name": "tb_rotation_char", "experiment": "tb_direct",
  "system": {"kind": "circle_rotation", "theta": "sqrt(2)-1"},
  "f": {"kind": "character", "freq": [1]}, "g": {"kind": "character", "freq": [-1]},
  "alpha": 2, "beta": 1, "c": "1.02", "n_max": 1000000, "points": 8, "seed": 1
})J"},
        {"tb_rotation_ratio42", R"J({
  "name": "tb_rotation_ratio42", "experiment": "tb_direct",
  "system": {"kind": "circle_rotation", "theta": "sqrt(2)-1"},
  "f": {"kind": "character", "freq": [1]}, "g": {"kind": "character", "freq": [-1]},
  "alpha": 4, "beta": 2, "c": "1.02", "n_max": 1000000, "points": 8, "seed": 1
})J"},
        {"tb_skew_char", R"J({
  "name": "tb_skew_char", "experiment": "tb_direct",
  "system": {"kind": "skew_product", "theta": "sqrt(2)-1"},
  "f": {"kind": "character", "freq": [0, 1]}, "g": {"kind": "character", "freq": [0, -1]},
  "alpha": "sqrt(2)", "beta": 1, "c": "1.02", "n_max": 200000, "points": 8, "seed": 1
})J"},
        {"tb_finite_rational", R"J({
  "name": "tb_finite_rational", "experiment": "tb_direct",
  "system": {"kind": "finite_cycle", "modulus": 12},
  "f": {"kind": "finite_table", "values": [0.9, -0.3, 0.5, 0.1, -0.7, 0.6, -0.2, 0.8, -0.5, 0.3, 0.4, -0.6]},
  "g": {"kind": "finite_table", "values": [0.2, 0.7, -0.4, 0.9, -0.8, 0.1, 0.6, -0.3, 0.5, -0.9, 0.3, 0.0]},
  "alpha": "1.5", "beta": 1, "c": "1.02", "n_max": 1000000, "points": 8, "seed": 1
})J"},
        {"tb_bernoulli_zero", R"J({
  "name": "tb_bernoulli_zero", "experiment": "tb_direct",
  "system": {"kind": "bernoulli_shift", "alphabet": 2, "prf_seed": 7},
  "f": {"kind": "bernoulli_mean_zero"}, "g": {"kind": "bernoulli_mean_zero"},
  "alpha": 2, "beta": 1, "c": "1.02", "n_max": 1000000, "points": 8, "seed": 1
})J"},
        {"tb_opposite_coeffs", R"J({
  "name": "tb_opposite_coeffs", "experiment": "tb_direct",
  "system": {"kind": "circle_rotation", "theta": "sqrt(2)-1"},
  "f": {"kind": "character", "freq": [1]}, "g": {"kind": "character", "freq": [-1]},
  "alpha": 1, "beta": -1, "c": "1.02", "n_max": 1000000, "points": 8, "seed": 1,
  "override": true
})J"},
        {"linear_opposite_coeffs", R"J({
  "name": "linear_opposite_coeffs", "experiment": "linear_baseline",
  "system": {"kind": "circle_rotation", "theta": "sqrt(2)-1"},
  "f": {"kind": "character", "freq": [1]}, "g": {"kind": "character", "freq": [-1]},
  "a": 1, "b": -1, "n_max": 1000000, "points": 8, "seed": 1
})J"},
        {"linear_cycle", R"J({
  "name": "linear_cycle", "experiment": "linear_baseline",
  "system": {"kind": "finite_cycle", "modulus": 7},
  "f": {"kind": "finite_table", "values": [1, 0, 2, -1, 0, 1, 3]},
  "g": {"kind": "finite_table", "values": [0, 1, 1, -2, 1, 0, 1]},
  "a": 2, "b": 3, "n_max": 7000, "points": 4, "seed": 1
})J"},
        {"limit_irrational_rotation", R"J({
  "name": "limit_irrational_rotation", "experiment": "limit_compare",
  "system": {"kind": "circle_rotation", "theta": "sqrt(2)-1"},
  "f": {"kind": "character", "freq": [1]}, "g": {"kind": "character", "freq": [-1]},
  "alpha": 2, "beta": 1, "c": "1.02", "n_max": 1000000, "points": 8, "seed": 1,
  "formula": "irrational", "inner_N": 100000, "grid_G": 512
})J"},
        {"limit_rational_cycle", R"J({
  "name": "limit_rational_cycle", "experiment": "limit_compare",
  "system": {"kind": "finite_cycle", "modulus": 12},
  "f": {"kind": "finite_table", "values": [0.9, -0.3, 0.5, 0.1, -0.7, 0.6, -0.2, 0.8, -0.5, 0.3, 0.4, -0.6]},
  "g": {"kind": "finite_table", "values": [0.2, 0.7, -0.4, 0.9, -0.8, 0.1, 0.6, -0.3, 0.5, -0.9, 0.3, 0.0]},
  "alpha": "1.5", "beta": 1, "c": "1.02", "n_max": 1000000, "points": 8, "seed": 1,
  "formula": "rational", "p": 3, "q": 2, "inner_N": 100000, "grid_G": 512
})J"},
        {"limit_skew_irrational", R"J({
  "name": "limit_skew_irrational", "experiment": "limit_compare",
  "system": {"kind": "skew_product", "theta": "sqrt(2)-1"},
  "f": {"kind": "character", "freq": [1, 0]}, "g": {"kind": "character", "freq": [-1, 0]},
  "alpha": "sqrt(3)", "beta": 1, "c": "1.02", "n_max": 300000, "points": 4, "seed": 1,
  "formula": "irrational", "inner_N": 100000, "grid_G": 512
})J"},
        {"tc_torus", R"J({
  "name": "tc_torus", "experiment": "tc_multi",
  "system": {"kind": "torus_translation", "theta": ["sqrt(2)-1", "sqrt(3)-1"]},
  "f": {"kind": "character", "freq": [1, 1]}, "g": {"kind": "character", "freq": [-1, 0]},
  "b": [1, 2], "d": [2, 4], "c": "1.02", "n_max": 200000, "points": 8, "seed": 1
})J"},
        {"bae_rotation", R"J({
  "name": "bae_rotation", "experiment": "bae_family",
  "system": {"kind": "circle_rotation", "theta": "sqrt(2)-1"},
  "f": {"kind": "character", "freq": [1]}, "g": {"kind": "character", "freq": [-1]},
  "alpha": "sqrt(2)", "beta": 1, "c": "1.02", "k": 1, "variant": "B", "case": "ir",
  "diagnostic": true, "n_max": 200000, "points": 8, "seed": 1
})J"},
        {"w_decay_rotation", R"J({
  "name": "w_decay_rotation", "experiment": "w_decay",
  "system": {"kind": "circle_rotation", "theta": "sqrt(2)-1"},
  "f": {"kind": "character", "freq": [1]}, "g": {"kind": "character", "freq": [-1]},
  "alpha": "sqrt(2)", "beta": 1, "c": "1.02", "k": 1, "log2_min": 10, "log2_max": 20,
  "points": 8, "seed": 1
})J"},
        {"equidist_power", R"J({
  "name": "equidist_power", "experiment": "equidistribution",
  "alpha": 1, "c": "1.02", "Ns": [10000, 100000, 1000000], "bins": 100, "k": 10, "s": "0.3"
})J"},
        {"equidist_sqrt2", R"J({
  "name": "equidist_sqrt2", "experiment": "equidistribution",
  "alpha": "sqrt(2)", "c": 1, "Ns": [1000000], "bins": 100, "k": 10, "s": "0.3"
})J"},
        {"vdc_suite", R"J({
  "name": "vdc_suite", "experiment": "vdc_suite",
  "instances": 200, "max_support": 32, "max_H": 8, "seed": 1
})J"},
        {"sup_probe_rotation", R"J({
  "name": "sup_probe_rotation", "experiment": "sup_probe",
  "system": {"kind": "circle_rotation", "theta": "sqrt(2)-1"},
  "f": {"kind": "character", "freq": [1]}, "alphas": ["sqrt(2)"], "c": "1.02",
  "n_max": 100000, "points": 8, "seed": 1
})J"},
    };
    return presets;
}

}  // namespace ergolab
