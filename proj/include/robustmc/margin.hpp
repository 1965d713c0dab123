// margin.hpp -- sequential comparison and bisection for the probabilistic
// robustness margin.
//
// probabilistic_comparison decides whether an unknown Bernoulli parameter
// exceeds 1-epsilon by drawing one trial at a time and stopping as soon as
// the running explicit confidence limits separate from 1-epsilon. On top of
// it, initial_interval brackets the margin by doubling/halving the radius
// from 1, and probabilistic_bisection shrinks the bracket until
// b - a <= gamma * a. The returned b is a soft upper bound: correct with
// high confidence, not certainty.
#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "robustmc/binom.hpp"
#include "robustmc/rng.hpp"
#include "robustmc/systems.hpp"

namespace robustmc::margin {

enum class Verdict { Above, Below, Inconclusive };

struct ComparisonOutcome {
    Verdict verdict = Verdict::Inconclusive;
    std::int64_t trials = 0;
    std::int64_t successes = 0;
    binom::ConfidenceBounds final_bounds;
};

struct MarginParams {
    double epsilon = 0.01;
    double delta = 0.01;
    double gamma = 0.05;
    std::optional<std::int64_t> cap; // per-comparison trial cap M; unset = 4x Massart size
    int max_doublings = 30;
    double start_radius = 1.0;
    std::int64_t batch = 1; // bounds recomputed every `batch` trials

    std::int64_t effective_cap() const;
};

enum class SearchStatus { Converged, Inconclusive };

struct IntervalStep {
    const char* stage = "initial"; // "initial" or "bisection"
    double a = 0.0;
    double b = 0.0;
    double radius = 0.0; // radius compared at this step
    ComparisonOutcome outcome;
};

struct IntervalEstimate {
    double a = 0.0;
    double b = 0.0;
    double soft_upper = 0.0; // always == b
    std::int64_t total_trials = 0;
    std::vector<IntervalStep> history;
    SearchStatus status = SearchStatus::Converged;
    int inconclusive_steps = 0; // bisection midpoints decided by the cap rule
};

// One Bernoulli draw at the given radius.
using TrialOracle = std::function<bool(double radius, RngStream& rng)>;

// Wraps a robustness problem: sample the set at `radius`, evaluate the
// predicate once.
TrialOracle problem_oracle(const systems::RobustnessProblem& problem,
                           systems::PredicateStats* stats = nullptr);

// Core sequential test on an explicit trial source; `source` must never be
// exhausted. Stops Above when lower > 1-epsilon, Below when upper <
// 1-epsilon, Inconclusive when `cap` trials were spent undecided.
ComparisonOutcome probabilistic_comparison(const std::function<bool()>& source, double epsilon,
                                           double delta, std::optional<std::int64_t> cap,
                                           std::int64_t batch = 1);

// Transcript callback: stage name, radius, outcome.
using StepObserver = std::function<void(const char* stage, double radius, const ComparisonOutcome&)>;

IntervalEstimate initial_interval(const TrialOracle& oracle, const MarginParams& params,
                                  RngStream& rng, const StepObserver& observer = {});
IntervalEstimate initial_interval(const systems::RobustnessProblem& problem,
                                  const MarginParams& params, RngStream& rng,
                                  const StepObserver& observer = {});

IntervalEstimate probabilistic_bisection(const TrialOracle& oracle, IntervalEstimate interval,
                                         const MarginParams& params, RngStream& rng,
                                         const StepObserver& observer = {});
IntervalEstimate probabilistic_bisection(const systems::RobustnessProblem& problem,
                                         IntervalEstimate interval, const MarginParams& params,
                                         RngStream& rng, const StepObserver& observer = {});

// Confidence-certified violations of "proportion does not increase with
// radius": pairs (i, j), i < j, where lower(i) > upper(j) on a curve ordered
// by descending radius. A post-hoc plausibility check, not a guarantee.
struct CurvePointBounds {
    double radius = 0.0;
    binom::ConfidenceBounds bounds;
};
std::vector<std::pair<int, int>> flag_nonmonotone_segments(const std::vector<CurvePointBounds>& pts);

} // namespace robustmc::margin
