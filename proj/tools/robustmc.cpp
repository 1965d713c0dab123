// robustmc.cpp -- command line front end.
//
// robustmc <mode> [--config FILE] [--seed U64] [--out DIR] [...]
// Exit codes: 0 ok, 1 invalid configuration, 2 numerical failure, 3 I/O.

#include <cstdio>
#include <exception>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "robustmc/config.hpp"
#include "robustmc/errors.hpp"
#include "robustmc/experiment.hpp"

namespace {

using namespace robustmc;

struct CliOptions {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
    std::optional<double> alpha;
    std::optional<double> epsilon;
    std::optional<std::int64_t> n_override;
    std::optional<int> l;
    std::string stage = "all";
};

void apply_overrides(cli::ExperimentConfig& cfg, const CliOptions& opts) {
    const auto check_unit = [](double v, const char* name) {
        if (!(v > 0.0 && v < 1.0))
            throw ConfigError(std::string(name) + ": must lie strictly inside (0,1)");
    };
    if (opts.seed) cfg.seed = *opts.seed;
    if (opts.out_dir) cfg.out_dir = *opts.out_dir;
    if (opts.alpha) {
        check_unit(*opts.alpha, "--alpha");
        cfg.params.alpha = *opts.alpha;
    }
    if (opts.epsilon) {
        check_unit(*opts.epsilon, "--epsilon");
        cfg.params.epsilon = *opts.epsilon;
    }
    if (opts.n_override) {
        if (*opts.n_override < 1) throw ConfigError("--samples: must be >= 1");
        cfg.params.n_override = opts.n_override;
    }
    if (opts.l) {
        if (*opts.l < 2) throw ConfigError("--radii: must be >= 2");
        cfg.params.l = *opts.l;
    }
}

void run(cli::Mode mode, const CliOptions& opts) {
    cli::ExperimentConfig cfg;
    if (mode == cli::Mode::Demo1 || mode == cli::Mode::Demo2) {
        if (!opts.config_path.empty())
            throw ConfigError("demo modes are self-contained; use the option overrides, not --config");
        cfg = mode == cli::Mode::Demo1 ? cli::demo1_config() : cli::demo2_config();
    } else {
        if (opts.config_path.empty())
            throw ConfigError(std::string(cli::mode_name(mode)) + " mode requires --config FILE");
        cfg = cli::parse_config_file(opts.config_path);
        if (cfg.mode != mode)
            throw ConfigError("config file declares mode '" + std::string(cli::mode_name(cfg.mode)) +
                              "' but the command line says '" + cli::mode_name(mode) + "'");
    }
    apply_overrides(cfg, opts);

    cli::DemoStage stage = cli::DemoStage::All;
    if (opts.stage == "margin")
        stage = cli::DemoStage::Margin;
    else if (opts.stage == "curve")
        stage = cli::DemoStage::Curve;
    else if (opts.stage != "all")
        throw ConfigError("--stage: expected all|margin|curve, got '" + opts.stage + "'");

    cli::run_experiment(cfg, stage);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"robustmc -- probabilistic robustness margins and degradation curves"};
    app.require_subcommand(1);

    CliOptions opts;
    const auto add_common = [&](CLI::App* sub, bool demo) {
        if (!demo) sub->add_option("--config", opts.config_path, "experiment config file");
        sub->add_option("--seed", opts.seed, "override the RNG seed");
        sub->add_option("--out", opts.out_dir, "output directory");
        sub->add_option("--alpha", opts.alpha, "override the accuracy fraction alpha");
        sub->add_option("--epsilon", opts.epsilon, "override the risk parameter epsilon");
        sub->add_option("--samples", opts.n_override, "override the per-radius sample size N");
        sub->add_option("--radii", opts.l, "override the radius count l");
        if (demo) sub->add_option("--stage", opts.stage, "pipeline stage: all|margin|curve");
    };

    std::pair<const char*, cli::Mode> modes[] = {
        {"ci-table", cli::Mode::CiTable}, {"margin", cli::Mode::Margin},
        {"curve", cli::Mode::Curve},      {"specs", cli::Mode::Specs},
        {"demo1", cli::Mode::Demo1},      {"demo2", cli::Mode::Demo2},
    };
    for (const auto& [name, mode] : modes) {
        CLI::App* sub = app.add_subcommand(name);
        add_common(sub, mode == cli::Mode::Demo1 || mode == cli::Mode::Demo2);
        const cli::Mode m = mode;
        sub->callback([&, m] { run(m, opts); });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1; // bad usage is a validation failure
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "error: invalid config: %s\n", e.what());
        return 1;
    } catch (const IoError& e) {
        std::fprintf(stderr, "error: i/o: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: numerical: %s\n", e.what());
        return 2;
    }
    return 0;
}
