// experiment.cpp -- experiment orchestration for all CLI modes.

#include "robustmc/experiment.hpp"

#include <cstdio>
#include <filesystem>
#include <iostream>

#include "robustmc/errors.hpp"
#include "robustmc/output.hpp"

namespace robustmc::cli {

namespace {

std::string join(const std::string& dir, const std::string& name) {
    return (std::filesystem::path(dir) / name).string();
}

margin::MarginParams margin_params(const ExperimentConfig& cfg) {
    margin::MarginParams mp;
    mp.epsilon = cfg.params.epsilon;
    mp.delta = cfg.params.delta;
    mp.gamma = cfg.params.gamma;
    mp.cap = cfg.params.cap;
    mp.max_doublings = cfg.params.max_doublings;
    mp.start_radius = cfg.params.start_radius;
    mp.batch = cfg.params.batch;
    return mp;
}

void run_ci_table(const ExperimentConfig& cfg, RunLog& log, ExperimentResult& result) {
    const std::int64_t n = cfg.ci.n;
    const double delta = cfg.ci.delta;
    std::vector<CiTableRow> rows;
    rows.reserve(static_cast<std::size_t>(n) + 1);
    double max_inflation = 0.0;
    for (std::int64_t k = 0; k <= n; ++k) {
        const auto ex = binom::explicit_limits({n, k}, delta);
        const auto cp = binom::clopper_pearson_limits({n, k}, delta);
        rows.push_back({k, ex.upper, cp.upper, cp.lower, ex.lower});
        max_inflation = std::max(max_inflation, (ex.upper - ex.lower) / (cp.upper - cp.lower));
    }
    const std::string path = join(cfg.out_dir, "citable.csv");
    write_ci_table_csv(rows, path);
    result.artifacts.push_back(path);
    result.max_width_inflation = max_inflation;
    log.metric("max_width_inflation", max_inflation);
    std::printf("ci-table: N=%lld delta=%g rows=%zu max width inflation=%.6g\n",
                static_cast<long long>(n), delta, rows.size(), max_inflation);
}

margin::IntervalEstimate run_margin_stage(const ExperimentConfig& cfg,
                                          const systems::RobustnessProblem& problem, RunLog& log,
                                          ExperimentResult& result) {
    const auto mp = margin_params(cfg);
    log.metric("comparison_cap", static_cast<double>(mp.effective_cap()));
    RngStream rng(cfg.seed, {0x6d61}); // margin branch
    const auto observer = [&log](const char* stage, double radius,
                                 const margin::ComparisonOutcome& out) {
        log.comparison(stage, radius, out);
    };

    systems::PredicateStats stats;
    const auto oracle = margin::problem_oracle(problem, &stats);
    auto est = margin::initial_interval(oracle, mp, rng, observer);
    if (est.status == margin::SearchStatus::Converged)
        est = margin::probabilistic_bisection(oracle, std::move(est), mp, rng, observer);

    log.metric("predicate_numeric_failures", static_cast<double>(stats.numeric_failures.load()));
    const std::string path = join(cfg.out_dir, "margin.csv");
    write_margin_csv(est.history, path);
    result.artifacts.push_back(path);
    std::printf("margin: interval [%.10g, %.10g] soft upper bound %.10g trials %lld%s\n", est.a,
                est.b, est.soft_upper, static_cast<long long>(est.total_trials),
                est.status == margin::SearchStatus::Inconclusive ? " (inconclusive)" : "");
    result.margin_estimate = est;
    return est;
}

void run_curve_stage(const ExperimentConfig& cfg, const systems::RobustnessProblem& problem,
                     double r_hat, RunLog& log, ExperimentResult& result) {
    const double curve_delta = cfg.params.curve_delta.value_or(cfg.params.delta);
    const std::int64_t n = cfg.params.n_override.value_or(
        curve::choose_sample_size(cfg.params.epsilon, curve_delta, cfg.params.alpha));
    log.curve_meta(n, curve_delta, cfg.params.l, 0);

    RngStream rng(cfg.seed, {0x6375}); // curve branch
    const auto on_interval = [&](int index, double a, double b, bool all_success) {
        log.interval(index, a, b, all_success, 0);
    };
    systems::PredicateStats stats;
    auto strategy = curve::global_strategy(problem, n, curve_delta, r_hat, cfg.params.l, rng,
                                           cfg.params.max_halvings, {}, on_interval, &stats);
    for (auto& c : strategy.curves) c.seed = cfg.seed;
    log.metric("predicate_numeric_failures", static_cast<double>(stats.numeric_failures.load()));
    if (strategy.exhausted) {
        log.note("warning", "global strategy exhausted max_halvings without an all-success endpoint");
        std::fprintf(stderr, "warning: global strategy stopped after %d halvings\n",
                     cfg.params.max_halvings);
    }

    std::vector<curve::CurvePoint> all_points;
    std::vector<margin::CurvePointBounds> bound_view;
    std::int64_t generated = 0;
    for (const auto& c : strategy.curves) {
        all_points.insert(all_points.end(), c.points.begin(), c.points.end());
        generated += c.generated_samples;
        for (const auto& pt : c.points) bound_view.push_back({pt.r, pt.bounds});
    }
    log.curve_meta(n, curve_delta, cfg.params.l, generated);

    const auto flags = margin::flag_nonmonotone_segments(bound_view);
    for (const auto& [i, j] : flags)
        log.note("nonmonotone-segment", "rows " + std::to_string(i) + " and " + std::to_string(j));

    const std::string csv = join(cfg.out_dir, "curve.csv");
    write_curve_csv(all_points, csv);
    result.artifacts.push_back(csv);
    const std::string svg = join(cfg.out_dir, "curve.svg");
    write_curve_svg(all_points, cfg.params.epsilon, svg);
    result.artifacts.push_back(svg);

    result.curves = std::move(strategy.curves);
    result.curve_intervals = strategy.intervals;
    result.strategy_exhausted = strategy.exhausted;
    std::printf("curve: N=%lld intervals=%zu generated samples=%lld (of %lld slots)%s\n",
                static_cast<long long>(n), result.curves.size(), static_cast<long long>(generated),
                static_cast<long long>(n * cfg.params.l *
                                       static_cast<std::int64_t>(result.curves.size())),
                strategy.exhausted ? " [exhausted]" : "");
}

void run_specs(const ExperimentConfig& cfg, const systems::RobustnessProblem& problem, RunLog& log) {
    uncertainty::SamplePoint delta = cfg.specs_delta_point;
    if (delta.empty()) delta.assign(static_cast<std::size_t>(problem.set.dim()), 0.0);

    const auto charpoly = systems::closed_loop_char_poly(problem, delta);
    std::printf("characteristic polynomial:");
    for (double c : charpoly.coeffs()) std::printf(" %.10g", c);
    std::printf("\n");

    const auto roots = poly::poly_roots(charpoly);
    for (const auto& z : roots) {
        std::printf("root: %.6f %+.6fi\n", z.real(), z.imag());
        log.metric("root_re", z.real());
    }

    bool stable = true;
    for (const auto& z : roots) stable = stable && z.real() < 0.0;
    if (!stable) {
        std::printf("closed loop unstable; skipping step response\n");
        log.note("specs", "unstable");
        return;
    }
    systems::SimParams sim = problem.sim;
    if (const auto* td = std::get_if<systems::TimeDomainPredicate>(&problem.predicate)) {
        sim.settle_band = td->spec.settle_band;
        sim.rise_def = td->spec.rise_def;
    }
    const auto stats =
        systems::step_response_specs(systems::closed_loop_numerator(problem, delta), charpoly, sim);
    std::printf("peak %.6g rise %.6g settling %.6g settled %s\n", stats.peak, stats.rise_time,
                stats.settling_time, stats.settled ? "yes" : "no");
    log.metric("peak", stats.peak);
    log.metric("rise_time", stats.rise_time);
    log.metric("settling_time", stats.settling_time);
}

} // namespace

ExperimentResult run_experiment(const ExperimentConfig& config, DemoStage stage) {
    std::error_code ec;
    std::filesystem::create_directories(config.out_dir, ec);
    if (ec) throw IoError("cannot create output directory '" + config.out_dir + "': " + ec.message());

    ExperimentResult result;
    const std::string log_path = join(config.out_dir, "run.log");
    RunLog log(log_path, config.render(), config.seed);
    result.artifacts.push_back(log_path);

    switch (config.mode) {
        case Mode::CiTable:
            run_ci_table(config, log, result);
            break;
        case Mode::Margin:
            run_margin_stage(config, build_problem(config), log, result);
            break;
        case Mode::Specs:
            run_specs(config, build_problem(config), log);
            break;
        case Mode::Curve:
        case Mode::Demo1:
        case Mode::Demo2: {
            const auto problem = build_problem(config);
            std::optional<double> r_hat = config.params.r_hat;
            if (!r_hat) {
                const auto est = run_margin_stage(config, problem, log, result);
                if (est.status == margin::SearchStatus::Inconclusive)
                    throw NumericalError(
                        "margin stage: comparison hit the trial cap before reaching a verdict");
                r_hat = est.soft_upper;
            } else {
                log.note("margin", "skipped; R_hat supplied");
            }
            if (stage != DemoStage::Margin) run_curve_stage(config, problem, *r_hat, log, result);
            break;
        }
    }
    log.end("ok");
    return result;
}

} // namespace robustmc::cli
