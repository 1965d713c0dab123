// output.hpp -- CSV tables, SVG charts, and the structured run log.
//
// The CSV files are the machine-readable contract (12 significant digits,
// fixed headers); the SVG chart is a diagnostic rendering. The run log is
// one JSON record per line. Its "t" field is a logical event ordinal, not
// wall-clock time, so a rerun with the same config and seed reproduces the
// transcript byte for byte.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "robustmc/curve.hpp"
#include "robustmc/margin.hpp"

namespace robustmc::cli {

struct CiTableRow {
    std::int64_t k = 0;
    double explicit_upper = 0.0; // curve A
    double cp_upper = 0.0;       // curve C
    double cp_lower = 0.0;       // curve D
    double explicit_lower = 0.0; // curve B
};

// header r,phat,lower,upper,m1,m2; radii descending across all rows
void write_curve_csv(const std::vector<curve::CurvePoint>& points, const std::string& path);
std::vector<curve::CurvePoint> read_curve_csv(const std::string& path);

// header stage,radius,N,K,verdict,lower,upper
void write_margin_csv(const std::vector<margin::IntervalStep>& history, const std::string& path);

// header k,explicit_upper,cp_upper,cp_lower,explicit_lower
void write_ci_table_csv(const std::vector<CiTableRow>& rows, const std::string& path);

// Line chart of the estimates with the confidence band and a dashed
// 1-epsilon rule line.
void write_curve_svg(const std::vector<curve::CurvePoint>& points, double epsilon,
                     const std::string& path);

class RunLog {
  public:
    // Opens the log and writes the begin record with config + seed.
    RunLog(const std::string& path, const std::string& config_text, std::uint64_t seed);
    ~RunLog();

    RunLog(const RunLog&) = delete;
    RunLog& operator=(const RunLog&) = delete;

    void comparison(const char* stage, double radius, const margin::ComparisonOutcome& out);
    void interval(int index, double a, double b, bool all_success, std::int64_t generated);
    void curve_meta(std::int64_t n, double delta, int l, std::int64_t generated_samples);
    void note(const std::string& key, const std::string& value);
    void metric(const std::string& key, double value);
    void end(const std::string& status);

  private:
    struct Impl;
    Impl* impl_;
};

const char* verdict_name(margin::Verdict v);

} // namespace robustmc::cli
