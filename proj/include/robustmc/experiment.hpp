// experiment.hpp -- mode dispatch: runs a configured experiment end to end
// and leaves its artifacts (CSV, SVG, run log) in the output directory.
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "robustmc/config.hpp"
#include "robustmc/curve.hpp"
#include "robustmc/margin.hpp"

namespace robustmc::cli {

// Demo modes can run a single pipeline stage.
enum class DemoStage { All, Margin, Curve };

struct ExperimentResult {
    std::vector<std::string> artifacts; // paths written, in order

    // Mode-dependent summaries, exposed for tests and callers.
    std::optional<margin::IntervalEstimate> margin_estimate;
    std::vector<curve::DegradationCurve> curves;
    std::vector<std::pair<double, double>> curve_intervals;
    bool strategy_exhausted = false;
    double max_width_inflation = 0.0; // ci-table: max (U-L)_explicit / (U-L)_exact
};

ExperimentResult run_experiment(const ExperimentConfig& config, DemoStage stage = DemoStage::All);

} // namespace robustmc::cli
