// config.hpp -- experiment configuration: file format, validation, demos.
//
// Config files are UTF-8 text with [section] headers and key = value pairs;
// '#' starts a comment, keys may carry dotted or indexed subkeys
// (den_factor.2, vertex.1). Parsing is total: malformed input and unknown or
// duplicate keys produce ConfigError with the offending line, never a crash.
// The full grammar is documented in the README.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "robustmc/systems.hpp"
#include "robustmc/uncertainty.hpp"

namespace robustmc::cli {

enum class Mode { CiTable, Margin, Curve, Specs, Demo1, Demo2 };

const char* mode_name(Mode m);

struct ParamsBlock {
    double epsilon = 0.01;
    double delta = 0.01;
    double gamma = 0.05;
    double alpha = 0.5;
    int l = 100;
    std::optional<std::int64_t> n_override; // curve sample size; else from the Massart formula
    std::optional<std::int64_t> cap;        // per-comparison trial cap
    int max_halvings = 20;
    int max_doublings = 30;
    double start_radius = 1.0;
    std::int64_t batch = 1;
    std::optional<double> curve_delta; // confidence for curve rows; defaults to delta
    std::optional<double> r_hat;       // skip the margin stage in curve mode
};

struct CiBlock {
    std::int64_t n = 1000;
    double delta = 0.01;
};

struct SystemBlock {
    systems::UncertainPlant plant;
    systems::Compensator compensator;
    systems::Predicate predicate;
    systems::SimParams sim;
};

struct ExperimentConfig {
    Mode mode = Mode::Specs;
    std::uint64_t seed = 0;
    std::string out_dir = "out";

    ParamsBlock params;
    CiBlock ci;
    std::optional<SystemBlock> system;
    std::optional<uncertainty::UncertaintySet> set;
    std::vector<double> specs_delta_point; // [specs] evaluation point; empty = nominal

    // Canonical config text; parsing it reproduces this config. Embedded in
    // run logs so any run can be replayed.
    std::string render() const;
};

ExperimentConfig parse_config_text(const std::string& text, const std::string& source_name = "<config>");
ExperimentConfig parse_config_file(const std::string& path);

// The two built-in demonstration setups (D-stability over a simplex set;
// step-response specs over a box set), runnable without a config file.
ExperimentConfig demo1_config();
ExperimentConfig demo2_config();

// Assembles the robustness problem; throws ConfigError when the needed
// blocks are absent.
systems::RobustnessProblem build_problem(const ExperimentConfig& config);

} // namespace robustmc::cli
