#pragma once

// Weights and kernels along Lambda = {floor(L n^c) : n >= 1}: the inverse
// psi(y) = (y/L)^(1/c), E-weights, the truncated Fourier kernel K_N with its
// dyadic split, and the finite combinatorics behind the van der Corput bound
// (mu_N, r_H, multiplicative differences).

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "ergolab/precision.hpp"

namespace ergolab {

using Complex = std::complex<double>;

/// (y / L)^(1/c).
HighReal psi_inverse(const HighReal& L, const HighReal& c, const HighReal& y);

struct LambdaSet {
    std::int64_t N = 0;
    std::int64_t count = 0;         // |Lambda ∩ [N]|
    std::vector<char> member;       // member[n] for n in 0..N
    std::int64_t first = 0;         // smallest member, 0 if none
    std::int64_t flagged = 0;       // floors decided with the boundary flag
};

LambdaSet lambda_count(const HighReal& L, const HighReal& c, std::int64_t N);

/// Phi(-psi(n+1)) - Phi(-psi(n)).
HighReal e_weight(const HighReal& L, const HighReal& c, std::int64_t n);

struct KernelParams {
    HighReal c;
    HighReal eps0;    // (23 - 22c) / (40c)
    HighReal sigma0;  // 1 + eps0 - 1/c
    /// floor(N^sigma0).
    std::int64_t M(std::int64_t N) const;
};

/// Parameters for c in (1, 23/22); throws DomainError outside that range.
KernelParams kernel_params(const HighReal& c);

/// Real weights w(n) on the index window [begin, begin + size).
struct WeightSeq {
    std::int64_t begin = 1;
    std::vector<double> values;
    std::string tag;
    double sup = 0.0;
    /// Largest |Im| seen before the m <-> -m pairs were combined.
    double imag_residual = 0.0;

    double at(std::int64_t n) const {
        const std::int64_t i = n - begin;
        return i >= 0 && i < static_cast<std::int64_t>(values.size()) ? values[i] : 0.0;
    }
    std::int64_t end() const { return begin + static_cast<std::int64_t>(values.size()); }
};

/// K_N(n) for n in [N]: the sum over 0 < |m| <= M of
/// (e(m psi(n+1)) - e(m psi(n))) / (2 pi i m), divided by |Lambda ∩ [N]|.
WeightSeq fourier_kernel(const KernelParams& params, const HighReal& L, std::int64_t N);
/// Same with the normalizing count supplied (it is also needed by callers).
WeightSeq fourier_kernel(const KernelParams& params, const HighReal& L, std::int64_t N,
                         std::int64_t lambda_count);

/// Pieces w * 1_[2^j, min(2^{j+1}, N+1)) for j = 0..floor(log2 N).
std::vector<WeightSeq> dyadic_split(const WeightSeq& w, std::int64_t N);

/// max(N - |n|, 0) / N^2.
Rational mu_N(std::int64_t N, std::int64_t n);

/// Number of pairs (h1, h2) in H x H with h1 - h2 = h. Duplicates in H are ignored.
std::int64_t r_H(const std::vector<std::int64_t>& H, std::int64_t h);

/// Finitely supported sequence: values on [begin, begin + size), zero elsewhere.
struct FiniteSeq {
    std::int64_t begin = 0;
    std::vector<Complex> values;

    Complex at(std::int64_t n) const {
        const std::int64_t i = n - begin;
        return i >= 0 && i < static_cast<std::int64_t>(values.size()) ? values[i] : Complex{};
    }
    std::int64_t end() const { return begin + static_cast<std::int64_t>(values.size()); }
};

/// Delta_{h_1, ..., h_s} f, where Delta_h f(x) = f(x) conj(f(x + h)). The
/// result lives on the intersection of the shifted windows.
FiniteSeq delta_diff(const FiniteSeq& f, const std::vector<std::int64_t>& shifts);

struct VdcResult {
    double lhs = 0.0;
    double rhs = 0.0;
    std::int64_t difference_set_size = 0;  // |S - H|
    double correlation = 0.0;              // sum_h r_H(h) sum_y g(y+h) conj(g(y))
};

/// |sum g|^2 against (|S-H| / |H|^2) sum_h r_H(h) sum_y g(y+h) conj(g(y)),
/// where S is the set of y with g(y) != 0.
VdcResult vdc_check(const FiniteSeq& g, const std::vector<std::int64_t>& H);

struct TwoSided {
    double lhs = 0.0;
    Complex rhs;
    double ratio = 0.0;  // lhs / |rhs|, +inf when rhs vanishes and lhs does not
};

/// Both sides of the four-function correlation bound
///   |sum_x sum_n f0(x) f1(x+pn) f2(x+qn) f3(n)|
///   versus N^13 sum_h3 mu_N(h3) sum_{|h1|,|h2|<=N} sum_n Delta_{h1,h2,h3} f3(n),
/// for tiny N (<= 16). No constant is implied.
TwoSided correlation_both_sides(const FiniteSeq& f0, const FiniteSeq& f1, const FiniteSeq& f2,
                                const FiniteSeq& f3, std::int64_t p, std::int64_t q,
                                std::int64_t N);

}  // namespace ergolab
