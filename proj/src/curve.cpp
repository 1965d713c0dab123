// curve.cpp -- sample reuse construction and the global halving strategy.

#include "robustmc/curve.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "robustmc/errors.hpp"

namespace robustmc::curve {

RadiusGrid::RadiusGrid(double a_, double b_, int l_) : a(a_), b(b_), l(l_) {
    if (!(a > 0.0 && a < b)) throw ConfigError("RadiusGrid: need 0 < a < b");
    if (l < 2) throw ConfigError("RadiusGrid: need at least 2 radii");
}

std::vector<double> RadiusGrid::radii() const {
    std::vector<double> r(static_cast<std::size_t>(l));
    for (int i = 0; i < l; ++i)
        r[static_cast<std::size_t>(i)] =
            b - (b - a) * static_cast<double>(i) / static_cast<double>(l - 1);
    r.front() = b;
    r.back() = a;
    return r;
}

DegradationCurve sample_reuse_curve(const uncertainty::UncertaintySet& set,
                                    const PointPredicate& predicate, std::int64_t N, double delta,
                                    const RadiusGrid& grid, const RngStream& rng,
                                    const CurveOptions& opts) {
    if (N < 1) throw ConfigError("sample_reuse_curve: N must be >= 1");
    if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("sample_reuse_curve: delta outside (0,1)");

    const auto radii = grid.radii();
    const int l = grid.l;
    std::vector<std::int64_t> m1(static_cast<std::size_t>(l), 0);
    std::vector<std::int64_t> m2(static_cast<std::size_t>(l), 0);

    DegradationCurve out;
    out.points.resize(static_cast<std::size_t>(l));

    for (int i = 0; i < l; ++i) {
        if (opts.on_row_start) opts.on_row_start(i, m1);
        const double r = radii[static_cast<std::size_t>(i)];
        std::int64_t trial = 0;
        while (m1[static_cast<std::size_t>(i)] < N) {
            // Trial substream keyed by (row, trial); outcomes do not depend
            // on evaluation order.
            RngStream trial_rng = rng.substream(static_cast<std::uint64_t>(i),
                                                static_cast<std::uint64_t>(trial++));
            const auto q = set.sample_uniform(r, trial_rng);
            const double ell = set.size_of(q);
            bool ok;
            try {
                ok = predicate(q);
            } catch (const NumericalError& e) {
                throw NumericalError("sample_reuse_curve: predicate failed at radius index " +
                                     std::to_string(i + 1) + ": " + e.what());
            }
            ++out.generated_samples;
            if (opts.on_sample) opts.on_sample(i, q, ell, ok);
            // Count toward this row unconditionally (it was drawn here) and
            // toward every still-active smaller radius that contains q. Rows
            // above i are frozen already.
            ++m1[static_cast<std::size_t>(i)];
            if (ok) ++m2[static_cast<std::size_t>(i)];
            for (int s = i + 1; s < l && radii[static_cast<std::size_t>(s)] >= ell; ++s) {
                ++m1[static_cast<std::size_t>(s)];
                if (ok) ++m2[static_cast<std::size_t>(s)];
            }
        }
        auto& pt = out.points[static_cast<std::size_t>(i)];
        pt.r = r;
        pt.m1 = m1[static_cast<std::size_t>(i)];
        pt.m2 = m2[static_cast<std::size_t>(i)];
        pt.estimate = static_cast<double>(pt.m2) / static_cast<double>(pt.m1);
        pt.bounds = binom::explicit_limits({pt.m1, pt.m2}, delta);
    }
    return out;
}

DegradationCurve sample_reuse_curve(const systems::RobustnessProblem& problem, std::int64_t N,
                                    double delta, const RadiusGrid& grid, const RngStream& rng,
                                    const CurveOptions& opts, systems::PredicateStats* stats) {
    const auto pred = [&problem, stats](const uncertainty::SamplePoint& q) {
        return systems::evaluate_predicate(problem, q, stats);
    };
    return sample_reuse_curve(problem.set, pred, N, delta, grid, rng, opts);
}

GlobalStrategyResult global_strategy(const uncertainty::UncertaintySet& set,
                                     const PointPredicate& predicate, std::int64_t N, double delta,
                                     double R_hat, int l, const RngStream& rng, int max_halvings,
                                     const CurveOptions& opts, const IntervalObserver& on_interval) {
    if (!(R_hat > 0.0)) throw ConfigError("global_strategy: R_hat must be > 0");
    if (max_halvings < 1) throw ConfigError("global_strategy: max_halvings must be >= 1");

    GlobalStrategyResult result;
    double b = R_hat;
    double a = 0.5 * R_hat;
    for (int iter = 0; iter < max_halvings; ++iter) {
        const RadiusGrid grid(a, b, l);
        // Each interval gets its own substream; intervals do not share samples.
        RngStream interval_rng = rng.substream(static_cast<std::uint64_t>(iter));
        DegradationCurve curve = sample_reuse_curve(set, predicate, N, delta, grid, interval_rng, opts);
        const auto& endpoint = curve.points.back();
        const bool all_success = endpoint.m2 == endpoint.m1;
        result.curves.push_back(std::move(curve));
        result.intervals.emplace_back(a, b);
        if (on_interval) on_interval(iter, a, b, all_success);
        if (all_success) return result;
        b = a;
        a = 0.5 * b;
    }
    result.exhausted = true;
    return result;
}

GlobalStrategyResult global_strategy(const systems::RobustnessProblem& problem, std::int64_t N,
                                     double delta, double R_hat, int l, const RngStream& rng,
                                     int max_halvings, const CurveOptions& opts,
                                     const IntervalObserver& on_interval,
                                     systems::PredicateStats* stats) {
    const auto pred = [&problem, stats](const uncertainty::SamplePoint& q) {
        return systems::evaluate_predicate(problem, q, stats);
    };
    return global_strategy(problem.set, pred, N, delta, R_hat, l, rng, max_halvings, opts,
                           on_interval);
}

std::int64_t choose_sample_size(double epsilon, double delta, double alpha) {
    return binom::required_sample_size({epsilon, delta, alpha});
}

} // namespace robustmc::curve
