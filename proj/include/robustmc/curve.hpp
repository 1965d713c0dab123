// curve.hpp -- robustness degradation curve by sample reuse.
//
// The grid radii run from b down to a. Each row i draws fresh uniform
// samples from the radius-r_i set until its trial count reaches N; every
// fresh sample q also counts toward each still-active smaller radius r_s
// with r_s >= ell(q), because a uniform sample conditioned on landing inside
// a smaller homogeneous set is uniform there. A row's counts freeze when its
// own loop finishes, so reuse flows strictly backward and each estimate is
// built only from trials that are uniform at its own radius.
//
// The global strategy repeats this over halving intervals [R/2, R], [R/4,
// R/2], ... until every observed trial at an interval's lower endpoint
// satisfies the requirement.
#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "robustmc/binom.hpp"
#include "robustmc/margin.hpp"
#include "robustmc/rng.hpp"
#include "robustmc/systems.hpp"
#include "robustmc/uncertainty.hpp"

namespace robustmc::curve {

struct RadiusGrid {
    double a = 0.0;
    double b = 0.0;
    int l = 2;

    RadiusGrid(double a_, double b_, int l_);

    // r_i = b - (b-a)(i-1)/(l-1), i = 1..l; strictly decreasing, r_1 = b, r_l = a.
    std::vector<double> radii() const;
};

struct CurvePoint {
    double r = 0.0;
    std::int64_t m1 = 0; // trials counted at this radius
    std::int64_t m2 = 0; // successes among them
    double estimate = 0.0;
    binom::ConfidenceBounds bounds;
};

struct DegradationCurve {
    std::vector<CurvePoint> points; // descending radius
    std::int64_t generated_samples = 0;
    std::uint64_t seed = 0;
};

// Per-sample hook for diagnostics and tests: drawing row, the point, its
// size, predicate outcome.
using SampleObserver =
    std::function<void(int row, const uncertainty::SamplePoint& q, double ell, bool ok)>;

// Snapshot hook: called as row i (0-based) starts fresh sampling, with the
// live trial counts of all rows.
using RowStartObserver = std::function<void(int row, const std::vector<std::int64_t>& m1)>;

struct CurveOptions {
    SampleObserver on_sample;
    RowStartObserver on_row_start;
};

DegradationCurve sample_reuse_curve(const systems::RobustnessProblem& problem, std::int64_t N,
                                    double delta, const RadiusGrid& grid, const RngStream& rng,
                                    const CurveOptions& opts = {},
                                    systems::PredicateStats* stats = nullptr);

// Test seam: same algorithm against an arbitrary predicate over sample points.
using PointPredicate = std::function<bool(const uncertainty::SamplePoint&)>;
DegradationCurve sample_reuse_curve(const uncertainty::UncertaintySet& set,
                                    const PointPredicate& predicate, std::int64_t N, double delta,
                                    const RadiusGrid& grid, const RngStream& rng,
                                    const CurveOptions& opts = {});

struct GlobalStrategyResult {
    std::vector<DegradationCurve> curves;
    std::vector<std::pair<double, double>> intervals; // [a,b] per curve
    bool exhausted = false; // max_halvings hit before an all-success endpoint
};

using IntervalObserver = std::function<void(int index, double a, double b, bool all_success)>;

GlobalStrategyResult global_strategy(const systems::RobustnessProblem& problem, std::int64_t N,
                                     double delta, double R_hat, int l, const RngStream& rng,
                                     int max_halvings = 20, const CurveOptions& opts = {},
                                     const IntervalObserver& on_interval = {},
                                     systems::PredicateStats* stats = nullptr);

GlobalStrategyResult global_strategy(const uncertainty::UncertaintySet& set,
                                     const PointPredicate& predicate, std::int64_t N, double delta,
                                     double R_hat, int l, const RngStream& rng,
                                     int max_halvings = 20, const CurveOptions& opts = {},
                                     const IntervalObserver& on_interval = {});

// Massart-driven sample size; recorded in run metadata.
std::int64_t choose_sample_size(double epsilon, double delta, double alpha);

} // namespace robustmc::curve
