// margin.cpp -- sequential stopping, bracket search, probabilistic bisection.

#include "robustmc/margin.hpp"

#include <cmath>
#include <string>

#include "robustmc/errors.hpp"

namespace robustmc::margin {

std::int64_t MarginParams::effective_cap() const {
    if (cap) return *cap;
    return 4 * binom::required_sample_size({epsilon, delta, 0.5});
}

TrialOracle problem_oracle(const systems::RobustnessProblem& problem,
                           systems::PredicateStats* stats) {
    return [&problem, stats](double radius, RngStream& rng) {
        const auto q = problem.set.sample_uniform(radius, rng);
        return systems::evaluate_predicate(problem, q, stats);
    };
}

ComparisonOutcome probabilistic_comparison(const std::function<bool()>& source, double epsilon,
                                           double delta, std::optional<std::int64_t> cap,
                                           std::int64_t batch) {
    if (!(epsilon > 0.0 && epsilon < 1.0))
        throw ConfigError("probabilistic_comparison: epsilon outside (0,1)");
    if (!(delta > 0.0 && delta < 1.0))
        throw ConfigError("probabilistic_comparison: delta outside (0,1)");
    if (batch < 1) throw ConfigError("probabilistic_comparison: batch must be >= 1");
    if (cap && *cap < 1) throw ConfigError("probabilistic_comparison: cap must be >= 1");

    const double threshold = 1.0 - epsilon;
    ComparisonOutcome out;
    while (true) {
        if (source()) ++out.successes;
        ++out.trials;
        const bool at_cap = cap && out.trials >= *cap;
        if (out.trials % batch == 0 || at_cap) {
            out.final_bounds = binom::explicit_limits({out.trials, out.successes}, delta);
            if (out.final_bounds.lower > threshold) {
                out.verdict = Verdict::Above;
                return out;
            }
            if (out.final_bounds.upper < threshold) {
                out.verdict = Verdict::Below;
                return out;
            }
        }
        if (at_cap) {
            out.verdict = Verdict::Inconclusive;
            return out;
        }
    }
}

namespace {

ComparisonOutcome compare_at(const TrialOracle& oracle, double radius, const MarginParams& params,
                             RngStream& rng, std::uint64_t comparison_index) {
    RngStream sub = rng.substream(comparison_index);
    const auto source = [&oracle, radius, &sub] { return oracle(radius, sub); };
    return probabilistic_comparison(source, params.epsilon, params.delta, params.effective_cap(),
                                    params.batch);
}

void record(IntervalEstimate& est, const char* stage, double radius, const ComparisonOutcome& out,
            const StepObserver& observer) {
    est.total_trials += out.trials;
    est.history.push_back({stage, est.a, est.b, radius, out});
    if (observer) observer(stage, radius, out);
}

} // namespace

IntervalEstimate initial_interval(const TrialOracle& oracle, const MarginParams& params,
                                  RngStream& rng, const StepObserver& observer) {
    if (!(params.start_radius > 0.0)) throw ConfigError("initial_interval: start radius must be > 0");

    IntervalEstimate est;
    double r = params.start_radius;
    RngStream search_rng = rng.substream(0x696e); // 'in'
    std::uint64_t comparison = 0;

    ComparisonOutcome first = compare_at(oracle, r, params, search_rng, comparison++);
    record(est, "initial", r, first, observer);
    if (first.verdict == Verdict::Inconclusive) {
        est.status = SearchStatus::Inconclusive;
        est.a = r;
        est.b = r;
        est.soft_upper = r;
        return est;
    }

    const Verdict direction = first.verdict;
    for (int step = 0; step < params.max_doublings; ++step) {
        r = direction == Verdict::Above ? 2.0 * r : 0.5 * r;
        ComparisonOutcome out = compare_at(oracle, r, params, search_rng, comparison++);
        record(est, "initial", r, out, observer);
        if (out.verdict == Verdict::Inconclusive) {
            est.status = SearchStatus::Inconclusive;
            est.a = direction == Verdict::Above ? 0.5 * r : r;
            est.b = direction == Verdict::Above ? r : 2.0 * r;
            est.soft_upper = est.b;
            return est;
        }
        if (out.verdict != direction) {
            est.a = direction == Verdict::Above ? 0.5 * r : r;
            est.b = direction == Verdict::Above ? r : 2.0 * r;
            est.soft_upper = est.b;
            return est;
        }
    }
    throw std::range_error("initial_interval: direction did not flip within " +
                           std::to_string(params.max_doublings) + " doubling steps");
}

IntervalEstimate probabilistic_bisection(const TrialOracle& oracle, IntervalEstimate est,
                                         const MarginParams& params, RngStream& rng,
                                         const StepObserver& observer) {
    if (!(est.a > 0.0 && est.a < est.b))
        throw ConfigError("probabilistic_bisection: need 0 < a < b");
    if (!(params.gamma > 0.0)) throw ConfigError("probabilistic_bisection: gamma must be > 0");

    // Bisection comparisons get their own substream branch so transcripts do
    // not depend on how many initial steps ran.
    RngStream bisect_rng = rng.substream(0x6273); // 'bs'
    std::uint64_t comparison = 0;
    while (est.b - est.a > params.gamma * est.a) {
        const double mid = 0.5 * (est.a + est.b);
        ComparisonOutcome out = compare_at(oracle, mid, params, bisect_rng, comparison++);
        record(est, "bisection", mid, out, observer);
        if (out.verdict == Verdict::Above) {
            est.a = mid;
        } else {
            // Below, or inconclusive at the cap: shrinking from the right
            // keeps the returned soft upper bound conservative.
            est.b = mid;
            if (out.verdict == Verdict::Inconclusive) ++est.inconclusive_steps;
        }
    }
    est.soft_upper = est.b;
    return est;
}

IntervalEstimate initial_interval(const systems::RobustnessProblem& problem,
                                  const MarginParams& params, RngStream& rng,
                                  const StepObserver& observer) {
    return initial_interval(problem_oracle(problem), params, rng, observer);
}

IntervalEstimate probabilistic_bisection(const systems::RobustnessProblem& problem,
                                         IntervalEstimate interval, const MarginParams& params,
                                         RngStream& rng, const StepObserver& observer) {
    return probabilistic_bisection(problem_oracle(problem), std::move(interval), params, rng,
                                   observer);
}

std::vector<std::pair<int, int>> flag_nonmonotone_segments(
    const std::vector<CurvePointBounds>& pts) {
    std::vector<std::pair<int, int>> flags;
    double best_lower = -1.0;
    int best_idx = -1;
    for (int j = 0; j < static_cast<int>(pts.size()); ++j) {
        if (best_idx >= 0 && best_lower > pts[static_cast<std::size_t>(j)].bounds.upper)
            flags.emplace_back(best_idx, j);
        if (pts[static_cast<std::size_t>(j)].bounds.lower > best_lower) {
            best_lower = pts[static_cast<std::size_t>(j)].bounds.lower;
            best_idx = j;
        }
    }
    return flags;
}

} // namespace robustmc::margin
