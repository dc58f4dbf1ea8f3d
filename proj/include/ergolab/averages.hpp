#pragma once

// Ergodic-average engines. Every engine samples points, precomputes the orbit
// indices once per n (shared by all points), then evaluates each point
// independently with compensated summation in a fixed order. Parallelism is
// over points only, so output does not depend on the worker count.

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ergolab/diophantine.hpp"
#include "ergolab/dynsys.hpp"
#include "ergolab/kernels.hpp"
#include "ergolab/suspension.hpp"

namespace ergolab {

// ---------------------------------------------------------------------------
// Threads and summation.

/// Worker count used by the engines; defaults to ERGOLAB_THREADS or 1.
int thread_count();
void set_thread_count(int n);

/// Runs body(i) for i in [0, count) on thread_count() workers.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

/// Neumaier-compensated complex sum.
class KahanSum {
public:
    void add(Complex v) {
        add_part(v.real(), re_, re_c_);
        add_part(v.imag(), im_, im_c_);
    }
    Complex value() const { return {re_ + re_c_, im_ + im_c_}; }

private:
    static void add_part(double v, double& sum, double& comp) {
        const double t = sum + v;
        if (std::abs(sum) >= std::abs(v)) {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    double re_ = 0.0, re_c_ = 0.0, im_ = 0.0, im_c_ = 0.0;
};

// ---------------------------------------------------------------------------
// Schedules.

/// floor(lambda^m) for lambda = 2^(1/root), m = 0, 1, ..., deduplicated, kept
/// in [n_min, n_max], with n_max appended.
std::vector<std::int64_t> lacunary_schedule(int root, std::int64_t n_max, std::int64_t n_min = 1);

// ---------------------------------------------------------------------------
// Specs and series.

/// Input outside the convergence hypotheses without the override flag.
struct ScopeError : DomainError {
    using DomainError::DomainError;
};

struct AverageSpec {
    MPSystem system;
    Observable f;
    std::optional<Observable> g;  // absent for single averages
    std::vector<std::int64_t> schedule;
    std::size_t points = 8;
    std::uint64_t seed = 1;
    /// Run outside the convergence hypotheses (recorded as a warning).
    bool override_scope = false;
    /// Evaluate at these points instead of sampling. Heights are used only by
    /// the flow-based families.
    std::vector<FlowPoint> at_points;
};

struct AverageSeries {
    std::string variant;
    std::vector<std::int64_t> checkpoints;
    std::vector<std::vector<Complex>> per_point;  // [point][checkpoint]
    std::vector<Complex> mean;                    // sample mean per checkpoint
    std::vector<double> dispersion;               // max |per_point - mean|
    std::vector<std::int64_t> flags_at;           // boundary flags among n <= N
    std::int64_t boundary_flags = 0;
    double bound = 1.0;
    std::vector<std::string> warnings;
};

struct TBParams {
    Coefficient alpha;
    Coefficient beta;
    HighReal c;
    /// When all three are set, floors are taken in MPFR at their precision.
    std::optional<MpReal> alpha_mp, beta_mp, c_mp;
};

struct LinearParams {
    Coefficient a;
    Coefficient b;
    Coefficient d = Coefficient::integer(0);
    std::int64_t n_begin = 1;  // sum over n_begin .. n_begin + N - 1
};

enum class BAEVariant { B, A, E };

struct BAEParams {
    Coefficient alpha;
    Coefficient beta;
    HighReal c;
    HighReal L;               // L_k in the irrational case, H_k in the rational one
    BAEVariant variant = BAEVariant::B;
    bool rational_case = false;
    std::int64_t p = 1;       // gamma = p / q in the rational case
    std::int64_t q = 1;
};

struct TCParams {
    std::vector<Coefficient> b;
    std::vector<Coefficient> d;
    HighReal c;
    /// MPFR floors when c_mp is set (b_mp, d_mp then match b, d).
    std::vector<MpReal> b_mp, d_mp;
    std::optional<MpReal> c_mp;
};

/// (1/N) sum_{n<=N} f(T^floor(alpha n^c) x) g(T^floor(beta n^c) x).
AverageSeries avg_nc_double(const AverageSpec& spec, const TBParams& params);

/// (1/N) sum f(T^floor(a n) x) g(T^floor(b n + d) x).
AverageSeries avg_linear_double(const AverageSpec& spec, const LinearParams& params);

/// B, A or E average along Lambda on the suspension flow S_k = S^(beta/L)
/// (irrational case, arguments floor(gamma n) and n) or R_k = S^(beta/(qL))
/// (rational case, arguments pn and qn).
AverageSeries avg_BAE_family(const AverageSpec& spec, const BAEParams& params);

/// The Fourier-weighted average W_{k,N} evaluated at each N of spec.schedule.
struct WParams {
    Coefficient alpha;
    Coefficient beta;
    HighReal c;
    HighReal L;
};
struct WResult {
    std::vector<std::int64_t> Ns;
    std::vector<Convergent> approximants;      // (P_N, Q_N)
    std::vector<std::int64_t> lambda_counts;
    std::vector<std::int64_t> kernel_M;
    std::vector<std::vector<Complex>> per_point;  // [point][N index]
    std::vector<double> l1;                       // mean of |W| over the sample
    double slope = 0.0;                           // least-squares slope of log l1 vs log N
    std::int64_t boundary_flags = 0;
    std::vector<std::string> warnings;
};
WResult avg_W(const AverageSpec& spec, const WParams& params);

/// (1/N) sum f(T_1^floor(b_1 n^c) ... x) g(T_1^floor(d_1 n^c) ... x).
AverageSeries avg_multi_TC(const AverageSpec& spec, const TCParams& params);

struct SupProbe {
    std::vector<double> per_point_sup;
    double lp_mean = 0.0;  // (mean sup^2)^(1/2)
    AverageSeries series;
};
/// Running maximum over checkpoints of |(1/N) sum f(T_1^floor(a_1 n^c) ... x)|.
SupProbe sup_average_probe(const AverageSpec& spec, const std::vector<Coefficient>& alphas,
                           const HighReal& c);

/// Largest |v_i - v_j| over checkpoints in the final third of the schedule.
double oscillation(const std::vector<Complex>& values);
double oscillation(const AverageSeries& series);

/// Same-run comparison of B, A and E: per point, the largest |B - A| and the
/// largest |E| over the last three checkpoints.
struct BAEDiagnostic {
    AverageSeries B, A, E;
    std::vector<double> b_minus_a;
    std::vector<double> e_max;
};
BAEDiagnostic bae_diagnostic(const AverageSpec& spec, BAEParams params);

/// floor(b n + d), exact when b and d carry rational forms.
FloorResult floor_affine(const Coefficient& b, const Coefficient& d, std::int64_t n);

/// Sample points as flow points with zero heights, or spec.at_points.
std::vector<FlowPoint> resolve_points(const AverageSpec& spec, bool with_heights);

}  // namespace ergolab
