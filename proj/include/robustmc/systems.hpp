// systems.hpp -- uncertain LTI closed loops and the robustness predicate.
//
// The plant is given either in factored form (an affine gain times monic
// linear factors, each factor touching at most one uncertainty coordinate)
// or as an explicit table of multiaffine coefficient maps. The closed-loop
// characteristic polynomial is den_C*den_P(delta) + num_C*num_P(delta).
//
// Predicates over the closed loop: plain stability, D-stability against a
// half-plane/disk region, or time-domain step-response specifications
// (simulated with fixed-step RK4 on the controllable canonical realization).
#pragma once

#include <atomic>
#include <complex>
#include <optional>
#include <variant>
#include <vector>

#include "robustmc/poly.hpp"
#include "robustmc/uncertainty.hpp"

namespace robustmc::systems {

using poly::Polynomial;

// Monic linear factor (s + a + b*delta_j); delta_index < 0 means no
// uncertainty dependence.
struct LinearFactor {
    double a = 0.0;
    double b = 0.0;
    int delta_index = -1; // 0-based coordinate of the uncertainty vector
};

// One multiaffine monomial c * prod_j delta_{vars[j]}; vars must be distinct.
struct MultiaffineTerm {
    double coeff = 0.0;
    std::vector<int> vars;
};

// coefficient map for s^(degree-i) at position i, highest degree first
struct CoeffTable {
    std::vector<std::vector<MultiaffineTerm>> coeffs;
};

struct UncertainPlant {
    // gain = gain0 + sum_i gain_lin[i] * delta_i
    double gain0 = 1.0;
    std::vector<double> gain_lin;

    std::vector<LinearFactor> numerator_factors;
    std::vector<LinearFactor> denominator_factors;

    // Alternative representation; when set, the factored fields are ignored.
    std::optional<CoeffTable> num_table;
    std::optional<CoeffTable> den_table;

    int uncertainty_dim = 0;

    Polynomial numerator_at(const uncertainty::SamplePoint& delta) const;
    Polynomial denominator_at(const uncertainty::SamplePoint& delta) const;
};

struct Compensator {
    Polynomial num;
    Polynomial den;
};

struct Disk {
    std::complex<double> center;
    double radius = 0.0;
};

// Acceptance is the union of the clauses: Re(z) < half_plane_bound, or z
// inside one of the disks. At least one clause must be present.
struct PoleRegion {
    std::optional<double> half_plane_bound;
    std::vector<Disk> disks;
};

enum class RiseDefinition { Pct10to90, Pct0to100 };

struct TimeSpec {
    double rise_time_max = 0.0;
    double settling_time_max = 0.0;
    double peak_max = 0.0;
    RiseDefinition rise_def = RiseDefinition::Pct10to90;
    double settle_band = 0.02;
};

struct SimParams {
    double dt = 1e-3;       // integration step, seconds
    double horizon = 10.0;  // hard stop, seconds
    double settle_band = 0.02;
    RiseDefinition rise_def = RiseDefinition::Pct10to90;
    double settle_hold = 1.0; // stop early once the band has held this long
};

struct StepStats {
    double peak = 0.0;
    double rise_time = 0.0;
    double settling_time = 0.0;
    double final_value = 0.0; // response at the last simulated instant
    bool settled = false;
};

struct StabilityPredicate {};
struct DStabilityPredicate {
    PoleRegion region;
};
struct TimeDomainPredicate {
    TimeSpec spec;
};

using Predicate = std::variant<StabilityPredicate, DStabilityPredicate, TimeDomainPredicate>;

// Counters for numeric failures treated as predicate violations.
struct PredicateStats {
    std::atomic<std::uint64_t> numeric_failures{0};
};

struct RobustnessProblem {
    UncertainPlant plant;
    Compensator compensator;
    Predicate predicate;
    uncertainty::UncertaintySet set;
    SimParams sim;

    RobustnessProblem(UncertainPlant pl, Compensator comp, Predicate pred,
                      uncertainty::UncertaintySet us, SimParams sp = {});
};

Polynomial closed_loop_char_poly(const RobustnessProblem& problem,
                                 const uncertainty::SamplePoint& delta);

// Closed-loop numerator num_C * num_P(delta); the transfer function is that
// over closed_loop_char_poly.
Polynomial closed_loop_numerator(const RobustnessProblem& problem,
                                 const uncertainty::SamplePoint& delta);

bool check_pole_region(const std::vector<std::complex<double>>& roots, const PoleRegion& region);

// Unit step response of num/den. den must be stable (enforced via a root
// check); throws NumericalError otherwise.
StepStats step_response_specs(const Polynomial& num, const Polynomial& den, const SimParams& sim);

// True iff the closed loop at delta meets the problem's requirement. Any
// numeric failure inside counts as a violation and bumps stats (if given).
bool evaluate_predicate(const RobustnessProblem& problem, const uncertainty::SamplePoint& delta,
                        PredicateStats* stats = nullptr);

} // namespace robustmc::systems
