// binom.cpp -- binomial confidence limits, tail bounds, and sample sizing.

#include "robustmc/binom.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "robustmc/errors.hpp"

namespace robustmc::binom {

namespace {

constexpr double kPi = 3.14159265358979323846;

// log(n!) - (n+1/2)log(n) + n - log(2*pi)/2, the Stirling remainder.
// Exact-ish table for small n (filled once in long double), truncated
// asymptotic series above; series cutoffs follow Loader's scheme so the
// absolute error stays near 1e-16 everywhere.
double stirling_remainder(std::int64_t n) {
    static const auto table = [] {
        std::array<double, 16> t{};
        const long double half_log_2pi = 0.5L * std::log(2.0L * 3.141592653589793238462643383279502884L);
        t[0] = 0.0; // unused
        for (int m = 1; m <= 15; ++m) {
            t[m] = static_cast<double>(std::lgamma(static_cast<long double>(m) + 1.0L) -
                                       (m + 0.5L) * std::log(static_cast<long double>(m)) +
                                       m - half_log_2pi);
        }
        return t;
    }();
    if (n <= 15) return table[n];

    constexpr double s0 = 1.0 / 12.0;
    constexpr double s1 = 1.0 / 360.0;
    constexpr double s2 = 1.0 / 1260.0;
    constexpr double s3 = 1.0 / 1680.0;
    constexpr double s4 = 1.0 / 1188.0;
    const double nd = static_cast<double>(n);
    const double nn = nd * nd;
    if (n > 500) return (s0 - s1 / nn) / nd;
    if (n > 80) return (s0 - (s1 - s2 / nn) / nn) / nd;
    if (n > 35) return (s0 - (s1 - (s2 - s3 / nn) / nn) / nn) / nd;
    return (s0 - (s1 - (s2 - (s3 - s4 / nn) / nn) / nn) / nn) / nd;
}

// Deviance term x*log(x/m) + m - x, evaluated by series when x ~ m so the
// cancellation between the log and the linear part never surfaces.
double deviance_part(double x, double m) {
    if (std::fabs(x - m) < 0.1 * (x + m)) {
        const double v = (x - m) / (x + m);
        double s = (x - m) * v;
        double ej = 2.0 * x * v;
        const double v2 = v * v;
        for (int j = 1;; ++j) {
            ej *= v2;
            const double s1 = s + ej / (2 * j + 1);
            if (s1 == s) return s1;
            s = s1;
        }
    }
    return x * std::log(x / m) + m - x;
}

void check_cdf_args(std::int64_t n, std::int64_t k, double p) {
    if (n < 1) throw ConfigError("binomial_cdf: n must be >= 1, got " + std::to_string(n));
    if (k < 0 || k > n)
        throw ConfigError("binomial_cdf: k out of range [0," + std::to_string(n) + "], got " +
                          std::to_string(k));
    if (!(p >= 0.0 && p <= 1.0))
        throw ConfigError("binomial_cdf: p outside [0,1], got " + std::to_string(p));
}

} // namespace

double binomial_pmf(std::int64_t n, std::int64_t k, double p) {
    check_cdf_args(n, k, p);
    if (p == 0.0) return k == 0 ? 1.0 : 0.0;
    if (p == 1.0) return k == n ? 1.0 : 0.0;
    if (k == 0) return std::exp(static_cast<double>(n) * std::log1p(-p));
    if (k == n) return std::exp(static_cast<double>(n) * std::log(p));

    const double nd = static_cast<double>(n);
    const double kd = static_cast<double>(k);
    const double lc = stirling_remainder(n) - stirling_remainder(k) - stirling_remainder(n - k) -
                      deviance_part(kd, nd * p) - deviance_part(nd - kd, nd * (1.0 - p));
    return std::exp(lc) * std::sqrt(nd / (2.0 * kPi * kd * (nd - kd)));
}

double binomial_cdf(std::int64_t n, std::int64_t k, double p) {
    check_cdf_args(n, k, p);
    if (k == n) return 1.0;
    if (p == 0.0) return 1.0;
    if (p == 1.0) return 0.0; // k < n here

    // Sum the smaller tail with the term ratio recurrence, reseeding from the
    // direct pmf every so often so ratio round-off cannot accumulate. Below
    // the mean the lower-tail terms decay going down; above it the upper-tail
    // terms decay going up, and 1 - upper keeps the result's absolute error
    // at the eps level either way.
    constexpr int resync_every = 256;
    const double q = 1.0 - p;
    const double mean = static_cast<double>(n) * p;

    if (static_cast<double>(k) <= mean) {
        double sum = 0.0, c = 0.0; // Kahan accumulator
        double term = binomial_pmf(n, k, p);
        for (std::int64_t j = k;; --j) {
            const double y = term - c;
            const double t = sum + y;
            c = (t - sum) - y;
            sum = t;
            if (j == 0 || term < sum * 1e-18) break;
            if ((k - j + 1) % resync_every == 0) {
                term = binomial_pmf(n, j - 1, p);
            } else {
                term *= static_cast<double>(j) / static_cast<double>(n - j + 1) * (q / p);
            }
        }
        return std::min(sum, 1.0);
    }

    double sum = 0.0, c = 0.0;
    double term = binomial_pmf(n, k + 1, p);
    for (std::int64_t j = k + 1;; ++j) {
        const double y = term - c;
        const double t = sum + y;
        c = (t - sum) - y;
        sum = t;
        if (j == n || term < sum * 1e-18) break;
        if ((j - k) % resync_every == 0) {
            term = binomial_pmf(n, j + 1, p);
        } else {
            term *= static_cast<double>(n - j) / static_cast<double>(j + 1) * (p / q);
        }
    }
    return std::max(0.0, 1.0 - sum);
}

namespace {

void check_counts(const TrialCounts& counts, double delta, const char* where) {
    if (counts.n < 1)
        throw ConfigError(std::string(where) + ": n must be >= 1, got " + std::to_string(counts.n));
    if (counts.k < 0 || counts.k > counts.n)
        throw ConfigError(std::string(where) + ": k out of range, got " + std::to_string(counts.k));
    if (!(delta > 0.0 && delta < 1.0))
        throw ConfigError(std::string(where) + ": delta outside (0,1), got " + std::to_string(delta));
}

// Unique root in (0,1) of binomial_cdf(n, k, p) = target; the cdf decreases
// monotonically in p, so plain bisection cannot miss.
double solve_cdf_equals(std::int64_t n, std::int64_t k, double target) {
    constexpr double tol = 1e-12;
    constexpr int max_steps = 200;
    double lo = 0.0, hi = 1.0;
    for (int step = 0; step < max_steps; ++step) {
        const double mid = 0.5 * (lo + hi);
        if (binomial_cdf(n, k, mid) > target)
            lo = mid;
        else
            hi = mid;
        if (hi - lo <= tol) return 0.5 * (lo + hi);
    }
    throw NumericalError("clopper_pearson_limits: bisection did not converge");
}

} // namespace

ConfidenceBounds clopper_pearson_limits(TrialCounts counts, double delta) {
    check_counts(counts, delta, "clopper_pearson_limits");
    ConfidenceBounds b;
    b.delta = delta;
    b.method = BoundMethod::ClopperPearson;
    b.lower = counts.k == 0 ? 0.0 : solve_cdf_equals(counts.n, counts.k - 1, 1.0 - delta / 2.0);
    b.upper = counts.k == counts.n ? 1.0 : solve_cdf_equals(counts.n, counts.k, delta / 2.0);
    return b;
}

ConfidenceBounds explicit_limits(TrialCounts counts, double delta) {
    check_counts(counts, delta, "explicit_limits");
    const double n = static_cast<double>(counts.n);
    const double k = static_cast<double>(counts.k);
    const double theta = 9.0 / (8.0 * std::log(2.0 / delta));
    const double root = std::sqrt(1.0 + 4.0 * theta * k * (1.0 - k / n));
    const double scale = 0.75 / (1.0 + theta * n);
    ConfidenceBounds b;
    b.delta = delta;
    b.method = BoundMethod::Explicit;
    b.lower = std::clamp(k / n + scale * (1.0 - 2.0 * k / n - root), 0.0, 1.0);
    b.upper = std::clamp(k / n + scale * (1.0 - 2.0 * k / n + root), 0.0, 1.0);
    return b;
}

ConfidenceBounds normal_approx_limits(TrialCounts counts, double delta) {
    check_counts(counts, delta, "normal_approx_limits");
    const double n = static_cast<double>(counts.n);
    const double phat = static_cast<double>(counts.k) / n;
    const double z = inverse_normal_cdf(1.0 - delta / 2.0);
    const double half_width = z * std::sqrt(phat * (1.0 - phat) / n);
    ConfidenceBounds b;
    b.delta = delta;
    b.method = BoundMethod::NormalApprox;
    b.lower = std::clamp(phat - half_width, 0.0, 1.0);
    b.upper = std::clamp(phat + half_width, 0.0, 1.0);
    return b;
}

double massart_tail_bound(std::int64_t n, double p, double eps, TailSide side) {
    if (n < 1) throw ConfigError("massart_tail_bound: n must be >= 1");
    if (!(p > 0.0 && p < 1.0))
        throw ConfigError("massart_tail_bound: p outside (0,1), got " + std::to_string(p));
    if (!(eps > 0.0)) throw ConfigError("massart_tail_bound: eps must be > 0");

    const double a = side == TailSide::Upper ? p + eps / 3.0 : p - eps / 3.0;
    const double b = side == TailSide::Upper ? 1.0 - p - eps / 3.0 : 1.0 - p + eps / 3.0;
    if (a <= 0.0 || b <= 0.0) return 1.0; // trivial but valid bound
    return std::exp(-static_cast<double>(n) * eps * eps / (2.0 * a * b));
}

std::int64_t required_sample_size(const SampleSizeParams& params) {
    const auto in_unit = [](double x) { return x > 0.0 && x < 1.0; };
    if (!in_unit(params.epsilon) || !in_unit(params.delta) || !in_unit(params.alpha))
        throw ConfigError("required_sample_size: epsilon, delta, alpha must lie in (0,1)");
    const double bound = 2.0 * (1.0 - params.epsilon + params.alpha * params.epsilon / 3.0) *
                         (1.0 - params.alpha / 3.0) * std::log(2.0 / params.delta) /
                         (params.alpha * params.alpha * params.epsilon);
    return static_cast<std::int64_t>(std::floor(bound)) + 1;
}

double inverse_normal_cdf(double u) {
    if (!(u > 0.0 && u < 1.0))
        throw ConfigError("inverse_normal_cdf: argument outside (0,1), got " + std::to_string(u));

    // Acklam's rational approximation, then two Halley corrections against
    // erfc to push the error well under the 1e-9 contract.
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    constexpr double u_low = 0.02425;

    double x;
    if (u < u_low) {
        const double q = std::sqrt(-2.0 * std::log(u));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (u <= 1.0 - u_low) {
        const double q = u - 0.5;
        const double r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        const double q = std::sqrt(-2.0 * std::log(1.0 - u));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    for (int i = 0; i < 2; ++i) {
        const double e = 0.5 * std::erfc(-x / std::sqrt(2.0)) - u;
        const double w = e * std::sqrt(2.0 * kPi) * std::exp(0.5 * x * x);
        x -= w / (1.0 + 0.5 * x * w);
    }
    return x;
}

} // namespace robustmc::binom
