// binom.hpp -- binomial confidence limits, tail bounds, and sample sizing.
//
// Three interval constructions for a binomial parameter p given k successes
// in n trials at confidence 1-delta:
//
//   * clopper_pearson_limits: the exact interval, limits found as roots of
//     the binomial tail equations by bisection (the cdf is monotone in p).
//   * explicit_limits: closed-form limits with theta = 9/(8 ln(2/delta));
//     guaranteed coverage > 1-delta and they always contain the
//     Clopper-Pearson interval, at O(1) cost per evaluation.
//   * normal_approx_limits: the classic Wald interval. Asymptotic only;
//     results are flagged non-rigorous.
//
// massart_tail_bound gives the sub-Gaussian upper bound on binomial tail
// probabilities that underpins both explicit_limits and the sample-size
// formula required_sample_size.
#pragma once

#include <cstdint>

namespace robustmc::binom {

struct TrialCounts {
    std::int64_t n = 1; // trials, >= 1
    std::int64_t k = 0; // successes, 0 <= k <= n
};

enum class BoundMethod { ClopperPearson, Explicit, NormalApprox };

struct ConfidenceBounds {
    double lower = 0.0;
    double upper = 1.0;
    double delta = 0.0;
    BoundMethod method = BoundMethod::Explicit;

    // Normal-approximation bounds carry no finite-sample guarantee.
    bool rigorous() const { return method != BoundMethod::NormalApprox; }
};

struct SampleSizeParams {
    double epsilon; // risk, in (0,1)
    double delta;   // confidence parameter, in (0,1)
    double alpha;   // accuracy fraction, in (0,1)
};

enum class TailSide { Upper, Lower };

// P(K <= k) for K ~ Binomial(n, p). Absolute error stays below 1e-12 up to
// n = 1e6; see binom.cpp for the evaluation scheme.
double binomial_cdf(std::int64_t n, std::int64_t k, double p);

// P(K == k); exposed because the cdf tests and the coverage checks want it.
double binomial_pmf(std::int64_t n, std::int64_t k, double p);

ConfidenceBounds clopper_pearson_limits(TrialCounts counts, double delta);

ConfidenceBounds explicit_limits(TrialCounts counts, double delta);

ConfidenceBounds normal_approx_limits(TrialCounts counts, double delta);

// Bound on P(K/n >= p + eps) (Upper) or P(K/n <= p - eps) (Lower).
// Returns 1 when the bound's denominator factors are not strictly positive;
// that is still a valid bound.
double massart_tail_bound(std::int64_t n, double p, double eps, TailSide side);

// Least integer N with N > 2(1-eps+alpha*eps/3)(1-alpha/3)ln(2/delta)/(alpha^2*eps).
// Such an N gives P(|p - K/N| < alpha*eps) > 1-delta at p = 1-eps.
std::int64_t required_sample_size(const SampleSizeParams& params);

// Inverse standard normal cdf, |error| <= 1e-9 on (0,1). Used by the Wald
// interval; exposed for tests.
double inverse_normal_cdf(double u);

} // namespace robustmc::binom
