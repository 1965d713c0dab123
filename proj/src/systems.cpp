// systems.cpp -- closed-loop assembly, D-stability, step response, predicate.

#include "robustmc/systems.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "robustmc/errors.hpp"

namespace robustmc::systems {

namespace {

Polynomial eval_table(const CoeffTable& table, const uncertainty::SamplePoint& delta) {
    std::vector<double> coeffs;
    coeffs.reserve(table.coeffs.size());
    for (const auto& terms : table.coeffs) {
        double c = 0.0;
        for (const auto& term : terms) {
            double v = term.coeff;
            for (int var : term.vars) v *= delta[static_cast<std::size_t>(var)];
            c += v;
        }
        coeffs.push_back(c);
    }
    return Polynomial(std::move(coeffs));
}

Polynomial product_of_factors(const std::vector<LinearFactor>& factors,
                              const uncertainty::SamplePoint& delta) {
    Polynomial acc({1.0});
    for (const auto& f : factors) {
        const double shift =
            f.a + (f.delta_index >= 0 ? f.b * delta[static_cast<std::size_t>(f.delta_index)] : 0.0);
        acc = acc * Polynomial({1.0, shift});
    }
    return acc;
}

} // namespace

Polynomial UncertainPlant::numerator_at(const uncertainty::SamplePoint& delta) const {
    if (num_table) return eval_table(*num_table, delta);
    double g = gain0;
    for (std::size_t i = 0; i < gain_lin.size(); ++i) g += gain_lin[i] * delta[i];
    return product_of_factors(numerator_factors, delta).scaled(g);
}

Polynomial UncertainPlant::denominator_at(const uncertainty::SamplePoint& delta) const {
    if (den_table) return eval_table(*den_table, delta);
    return product_of_factors(denominator_factors, delta);
}

RobustnessProblem::RobustnessProblem(UncertainPlant pl, Compensator comp, Predicate pred,
                                     uncertainty::UncertaintySet us, SimParams sp)
    : plant(std::move(pl)),
      compensator(std::move(comp)),
      predicate(std::move(pred)),
      set(std::move(us)),
      sim(sp) {
    if (plant.uncertainty_dim != set.dim())
        throw ConfigError("RobustnessProblem: plant uncertainty dimension " +
                          std::to_string(plant.uncertainty_dim) + " does not match set dimension " +
                          std::to_string(set.dim()));
    if (const auto* d = std::get_if<DStabilityPredicate>(&predicate)) {
        if (!d->region.half_plane_bound && d->region.disks.empty())
            throw ConfigError("PoleRegion: needs a half plane or at least one disk");
    }
}

namespace {

void check_delta_dim(const RobustnessProblem& problem, const uncertainty::SamplePoint& delta) {
    if (static_cast<int>(delta.size()) != problem.plant.uncertainty_dim)
        throw ConfigError("delta dimension " + std::to_string(delta.size()) +
                          " does not match plant dimension " +
                          std::to_string(problem.plant.uncertainty_dim));
}

} // namespace

Polynomial closed_loop_char_poly(const RobustnessProblem& problem,
                                 const uncertainty::SamplePoint& delta) {
    check_delta_dim(problem, delta);
    const Polynomial den = problem.compensator.den * problem.plant.denominator_at(delta);
    const Polynomial num = problem.compensator.num * problem.plant.numerator_at(delta);
    return den + num;
}

Polynomial closed_loop_numerator(const RobustnessProblem& problem,
                                 const uncertainty::SamplePoint& delta) {
    check_delta_dim(problem, delta);
    return problem.compensator.num * problem.plant.numerator_at(delta);
}

bool check_pole_region(const std::vector<std::complex<double>>& roots, const PoleRegion& region) {
    for (const auto& z : roots) {
        bool ok = region.half_plane_bound && z.real() < *region.half_plane_bound;
        for (auto it = region.disks.begin(); !ok && it != region.disks.end(); ++it)
            ok = std::abs(z - it->center) <= it->radius;
        if (!ok) return false;
    }
    return true;
}

StepStats step_response_specs(const Polynomial& num, const Polynomial& den, const SimParams& sim) {
    if (!(sim.dt > 0.0)) throw ConfigError("step_response_specs: dt must be > 0");
    if (num.degree() > den.degree())
        throw ConfigError("step_response_specs: improper transfer function");
    if (den.coeffs().front() == 0.0)
        throw ConfigError("step_response_specs: denominator leading coefficient is zero");

    // Stability gate; marginal or unstable denominators have no settling time.
    const auto den_roots = poly::poly_roots(den);
    for (const auto& z : den_roots)
        if (z.real() >= 0.0)
            throw NumericalError("step_response_specs: denominator is not strictly stable");

    const int n = den.degree();
    const double a0 = den.coeffs().front();
    std::vector<double> a(n); // monic denominator tail: s^n + a[0] s^(n-1) + ... + a[n-1]
    for (int i = 0; i < n; ++i) a[i] = den.coeffs()[static_cast<std::size_t>(i) + 1] / a0;

    // Split off the direct feedthrough so the state-space part is strictly proper.
    double feedthrough = 0.0;
    std::vector<double> b(n, 0.0); // numerator of the strictly proper part, degree n-1, highest first
    {
        std::vector<double> nc = num.coeffs();
        if (num.degree() == n) {
            feedthrough = nc[0] / a0;
            // remainder = num - feedthrough * den; degree drops below n
            std::vector<double> rem(n, 0.0);
            for (int i = 0; i < n; ++i)
                rem[i] = nc[static_cast<std::size_t>(i) + 1] - feedthrough * den.coeffs()[static_cast<std::size_t>(i) + 1];
            nc = std::move(rem);
        }
        const int off = n - static_cast<int>(nc.size());
        for (std::size_t i = 0; i < nc.size(); ++i) b[static_cast<std::size_t>(off) + i] = nc[i] / a0;
    }

    // Controllable canonical form; y = C x + feedthrough * u.
    // x'_i = x_{i+1}, x'_n = -sum a_j x_... with x stored x[0..n-1].
    std::vector<double> x(n, 0.0);
    auto deriv = [&](const std::vector<double>& s, std::vector<double>& ds) {
        for (int i = 0; i + 1 < n; ++i) ds[i] = s[i + 1];
        double acc = 1.0; // unit step input
        for (int i = 0; i < n; ++i) acc -= a[static_cast<std::size_t>(n - 1 - i)] * s[i];
        ds[n - 1] = acc;
    };
    auto output = [&](const std::vector<double>& s) {
        double y = feedthrough; // u = 1
        for (int i = 0; i < n; ++i) y += b[static_cast<std::size_t>(n - 1 - i)] * s[i];
        return y;
    };

    const double dc = num.eval(0.0) / den.eval(0.0);
    const double band = sim.settle_band * std::fabs(dc);
    const double lo_level = 0.1 * dc;
    const double hi_level = sim.rise_def == RiseDefinition::Pct10to90 ? 0.9 * dc : dc;

    StepStats stats;
    double y_prev = output(x);
    stats.peak = y_prev;
    double t = 0.0;
    double t_lo = -1.0, t_hi = -1.0;
    double last_outside = std::fabs(y_prev - dc) > band ? 0.0 : -1.0;
    bool inside = last_outside < 0.0;
    double inside_since = inside ? 0.0 : -1.0;

    std::vector<double> k1(n), k2(n), k3(n), k4(n), tmp(n);
    const double dt = sim.dt;
    const std::int64_t max_steps = static_cast<std::int64_t>(std::ceil(sim.horizon / dt));

    for (std::int64_t step = 0; step < max_steps; ++step) {
        deriv(x, k1);
        for (int i = 0; i < n; ++i) tmp[i] = x[i] + 0.5 * dt * k1[i];
        deriv(tmp, k2);
        for (int i = 0; i < n; ++i) tmp[i] = x[i] + 0.5 * dt * k2[i];
        deriv(tmp, k3);
        for (int i = 0; i < n; ++i) tmp[i] = x[i] + dt * k3[i];
        deriv(tmp, k4);
        for (int i = 0; i < n; ++i)
            x[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        t += dt;

        const double y = output(x);
        if (!std::isfinite(y)) throw NumericalError("step_response_specs: response diverged");
        stats.peak = std::max(stats.peak, y);

        // linear interpolation for the crossing instants
        auto crossing = [&](double level) {
            const double f = (level - y_prev) / (y - y_prev);
            return t - dt + f * dt;
        };
        if (t_lo < 0.0 && ((y_prev < lo_level && y >= lo_level) || (y_prev > lo_level && y <= lo_level)))
            t_lo = crossing(lo_level);
        if (t_hi < 0.0 && ((y_prev < hi_level && y >= hi_level) || (y_prev > hi_level && y <= hi_level)))
            t_hi = crossing(hi_level);

        const bool now_inside = std::fabs(y - dc) <= band;
        if (!now_inside) {
            last_outside = t;
            inside = false;
        } else if (!inside) {
            inside = true;
            // interpolate the band entry instant
            const double edge = y_prev > dc + band ? dc + band : dc - band;
            inside_since = std::fabs(y - y_prev) > 0.0 ? crossing(edge) : t;
        }
        y_prev = y;

        if (inside && t - inside_since >= sim.settle_hold) break; // settled long enough
    }

    stats.final_value = y_prev;
    stats.settled = inside && (t - inside_since >= sim.settle_hold ||
                               t >= sim.horizon - 0.5 * dt);
    stats.settling_time = last_outside < 0.0 ? 0.0 : (inside ? inside_since : sim.horizon);
    if (sim.rise_def == RiseDefinition::Pct10to90)
        stats.rise_time = (t_lo >= 0.0 && t_hi >= 0.0) ? t_hi - t_lo : sim.horizon;
    else
        stats.rise_time = t_hi >= 0.0 ? t_hi : sim.horizon;
    return stats;
}

bool evaluate_predicate(const RobustnessProblem& problem, const uncertainty::SamplePoint& delta,
                        PredicateStats* stats) {
    check_delta_dim(problem, delta);
    try {
        const Polynomial charpoly = closed_loop_char_poly(problem, delta);
        if (std::holds_alternative<StabilityPredicate>(problem.predicate)) {
            for (const auto& z : poly::poly_roots(charpoly))
                if (z.real() >= 0.0) return false;
            return true;
        }
        if (const auto* d = std::get_if<DStabilityPredicate>(&problem.predicate)) {
            return check_pole_region(poly::poly_roots(charpoly), d->region);
        }
        const auto& td = std::get<TimeDomainPredicate>(problem.predicate);
        for (const auto& z : poly::poly_roots(charpoly))
            if (z.real() >= 0.0) return false;
        SimParams sim = problem.sim;
        sim.settle_band = td.spec.settle_band;
        sim.rise_def = td.spec.rise_def;
        const StepStats st = step_response_specs(closed_loop_numerator(problem, delta), charpoly, sim);
        return st.settled && st.rise_time < td.spec.rise_time_max &&
               st.settling_time < td.spec.settling_time_max && st.peak < td.spec.peak_max;
    } catch (const NumericalError&) {
        // conservative: a sample we cannot evaluate counts as a violation
        if (stats) stats->numeric_failures.fetch_add(1, std::memory_order_relaxed);
        return false;
    }
}

} // namespace robustmc::systems
