// output.cpp -- artifact writers: CSV, SVG, run log.

#include "robustmc/output.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "robustmc/errors.hpp"

namespace robustmc::cli {

namespace {

std::string sig12(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write '" + path + "'");
    return out;
}

} // namespace

const char* verdict_name(margin::Verdict v) {
    switch (v) {
        case margin::Verdict::Above: return "above";
        case margin::Verdict::Below: return "below";
        case margin::Verdict::Inconclusive: return "inconclusive";
    }
    return "?";
}

void write_curve_csv(const std::vector<curve::CurvePoint>& points, const std::string& path) {
    auto out = open_out(path);
    out << "r,phat,lower,upper,m1,m2\n";
    for (const auto& pt : points)
        out << sig12(pt.r) << ',' << sig12(pt.estimate) << ',' << sig12(pt.bounds.lower) << ','
            << sig12(pt.bounds.upper) << ',' << pt.m1 << ',' << pt.m2 << '\n';
    if (!out) throw IoError("write failed for '" + path + "'");
}

std::vector<curve::CurvePoint> read_curve_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read '" + path + "'");
    std::string line;
    if (!std::getline(in, line) || line != "r,phat,lower,upper,m1,m2")
        throw IoError("'" + path + "': not a curve CSV");
    std::vector<curve::CurvePoint> points;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string field;
        std::vector<std::string> fields;
        while (std::getline(row, field, ',')) fields.push_back(field);
        if (fields.size() != 6) throw IoError("'" + path + "': malformed row '" + line + "'");
        curve::CurvePoint pt;
        try {
            pt.r = std::stod(fields[0]);
            pt.estimate = std::stod(fields[1]);
            pt.bounds.lower = std::stod(fields[2]);
            pt.bounds.upper = std::stod(fields[3]);
            pt.m1 = std::stoll(fields[4]);
            pt.m2 = std::stoll(fields[5]);
        } catch (const std::exception&) {
            throw IoError("'" + path + "': malformed row '" + line + "'");
        }
        points.push_back(pt);
    }
    return points;
}

void write_margin_csv(const std::vector<margin::IntervalStep>& history, const std::string& path) {
    auto out = open_out(path);
    out << "stage,radius,N,K,verdict,lower,upper\n";
    for (const auto& step : history) {
        out << step.stage << ',' << sig12(step.radius) << ','
            << step.outcome.trials << ',' << step.outcome.successes << ','
            << verdict_name(step.outcome.verdict) << ',' << sig12(step.outcome.final_bounds.lower)
            << ',' << sig12(step.outcome.final_bounds.upper) << '\n';
    }
    if (!out) throw IoError("write failed for '" + path + "'");
}

void write_ci_table_csv(const std::vector<CiTableRow>& rows, const std::string& path) {
    auto out = open_out(path);
    out << "k,explicit_upper,cp_upper,cp_lower,explicit_lower\n";
    for (const auto& row : rows)
        out << row.k << ',' << sig12(row.explicit_upper) << ',' << sig12(row.cp_upper) << ','
            << sig12(row.cp_lower) << ',' << sig12(row.explicit_lower) << '\n';
    if (!out) throw IoError("write failed for '" + path + "'");
}

void write_curve_svg(const std::vector<curve::CurvePoint>& points, double epsilon,
                     const std::string& path) {
    if (points.empty()) throw ConfigError("write_curve_svg: empty curve");
    constexpr double width = 800, height = 520;
    constexpr double ml = 70, mr = 20, mt = 30, mb = 50;

    double rmin = points.front().r, rmax = points.front().r;
    double ymin = 1.0;
    for (const auto& pt : points) {
        rmin = std::min(rmin, pt.r);
        rmax = std::max(rmax, pt.r);
        ymin = std::min(ymin, pt.bounds.lower);
    }
    ymin = std::min(ymin, 1.0 - epsilon);
    ymin = std::max(0.0, ymin - 0.02);
    const double ymax = 1.005;
    if (rmax == rmin) rmax = rmin + 1.0; // single point: give the axis width

    const auto X = [&](double r) { return ml + (r - rmin) / (rmax - rmin) * (width - ml - mr); };
    const auto Y = [&](double y) {
        return height - mb - (y - ymin) / (ymax - ymin) * (height - mt - mb);
    };

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
        << height << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
    svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

    // confidence band
    svg << "<path d=\"";
    for (std::size_t i = 0; i < points.size(); ++i)
        svg << (i == 0 ? 'M' : 'L') << sig12(X(points[i].r)) << ' '
            << sig12(Y(std::max(ymin, points[i].bounds.lower)));
    for (std::size_t i = points.size(); i-- > 0;)
        svg << 'L' << sig12(X(points[i].r)) << ' ' << sig12(Y(std::min(ymax, points[i].bounds.upper)));
    svg << "Z\" fill=\"#9ecae1\" fill-opacity=\"0.45\" stroke=\"none\"/>\n";

    // estimate
    svg << "<polyline fill=\"none\" stroke=\"#08519c\" stroke-width=\"1.5\" points=\"";
    for (const auto& pt : points) svg << sig12(X(pt.r)) << ',' << sig12(Y(std::max(ymin, pt.estimate))) << ' ';
    svg << "\"/>\n";

    // 1 - epsilon rule
    svg << "<line x1=\"" << ml << "\" y1=\"" << sig12(Y(1.0 - epsilon)) << "\" x2=\"" << width - mr
        << "\" y2=\"" << sig12(Y(1.0 - epsilon))
        << "\" stroke=\"#a50f15\" stroke-dasharray=\"6,4\" stroke-width=\"1\"/>\n";

    // axes
    svg << "<line x1=\"" << ml << "\" y1=\"" << height - mb << "\" x2=\"" << width - mr
        << "\" y2=\"" << height - mb << "\" stroke=\"black\"/>\n";
    svg << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\""
        << height - mb << "\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 5; ++i) {
        const double r = rmin + (rmax - rmin) * i / 5.0;
        const double y = ymin + (ymax - ymin) * i / 5.0;
        svg << "<text x=\"" << sig12(X(r)) << "\" y=\"" << height - mb + 18
            << "\" font-size=\"11\" text-anchor=\"middle\">" << sig12(r) << "</text>\n";
        svg << "<text x=\"" << ml - 8 << "\" y=\"" << sig12(Y(y) + 4)
            << "\" font-size=\"11\" text-anchor=\"end\">" << sig12(y) << "</text>\n";
    }
    svg << "<text x=\"" << (ml + width - mr) / 2 << "\" y=\"" << height - 12
        << "\" font-size=\"13\" text-anchor=\"middle\">uncertainty radius r</text>\n";
    svg << "<text x=\"" << (ml + width - mr) / 2 << "\" y=\"" << mt - 10
        << "\" font-size=\"13\" text-anchor=\"middle\">proportion estimate with "
           "confidence band</text>\n";
    svg << "</svg>\n";

    auto out = open_out(path);
    out << svg.str();
    if (!out) throw IoError("write failed for '" + path + "'");
}

struct RunLog::Impl {
    std::ofstream out;
    std::string path;
    std::uint64_t t = 0;

    void emit(nlohmann::json obj) {
        obj["t"] = t++;
        out << obj.dump() << '\n';
        if (!out) throw IoError("write failed for '" + path + "'");
    }
};

RunLog::RunLog(const std::string& path, const std::string& config_text, std::uint64_t seed)
    : impl_(new Impl) {
    impl_->path = path;
    impl_->out.open(path, std::ios::binary);
    if (!impl_->out) {
        delete impl_;
        throw IoError("cannot write '" + path + "'");
    }
    impl_->emit({{"stage", "begin"},
                 {"seed", seed},
                 {"version", "robustmc 0.1.0"},
                 {"config", config_text}});
}

RunLog::~RunLog() { delete impl_; }

void RunLog::comparison(const char* stage, double radius, const margin::ComparisonOutcome& out) {
    impl_->emit({{"stage", stage},
                 {"radius", radius},
                 {"N", out.trials},
                 {"K", out.successes},
                 {"verdict", verdict_name(out.verdict)},
                 {"lower", out.final_bounds.lower},
                 {"upper", out.final_bounds.upper}});
}

void RunLog::interval(int index, double a, double b, bool all_success, std::int64_t generated) {
    impl_->emit({{"stage", "interval"},
                 {"index", index},
                 {"a", a},
                 {"b", b},
                 {"all_success", all_success},
                 {"generated", generated}});
}

void RunLog::curve_meta(std::int64_t n, double delta, int l, std::int64_t generated_samples) {
    impl_->emit({{"stage", "curve-meta"},
                 {"N", n},
                 {"delta", delta},
                 {"l", l},
                 {"generated_samples", generated_samples}});
}

void RunLog::note(const std::string& key, const std::string& value) {
    impl_->emit({{"stage", "note"}, {"key", key}, {"value", value}});
}

void RunLog::metric(const std::string& key, double value) {
    impl_->emit({{"stage", "metric"}, {"key", key}, {"value", value}});
}

void RunLog::end(const std::string& status) { impl_->emit({{"stage", "end"}, {"status", status}}); }

} // namespace robustmc::cli
