// test_cli.cpp -- config parsing, artifact emission, replay, CLI exit codes.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "robustmc/config.hpp"
#include "robustmc/errors.hpp"
#include "robustmc/experiment.hpp"
#include "robustmc/output.hpp"
#include "robustmc/rng.hpp"

using namespace robustmc;
namespace fs = std::filesystem;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::string tmpdir(const char* name) {
    const auto dir = fs::temp_directory_path() / "robustmc_tests" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir.string();
}

const char* minimal_margin_config = R"(
[run]
mode = margin
seed = 7

[params]
epsilon = 0.05
delta = 0.05
gamma = 0.2

[set]
type = box
dim = 3

[plant]
dim = 3
gain = 800
gain.d1 = 80
den_factor.1 = 0, 0, 0
den_factor.2 = 4, 0.2, 2
den_factor.3 = 6, 0.3, 3

[compensator]
num = 1, 2
den = 1, 10

[predicate]
type = dstability
half_plane = -1.5
disk.1 = -1.1256, 7.3234, 0.228
disk.2 = -1.1256, -7.3234, 0.228
)";

} // namespace

TEST_CASE("shipped example configs parse and reproduce the reference loop") {
    for (const char* path : {"configs/example1.conf", "configs/example2.conf"}) {
        const auto cfg = cli::parse_config_file(std::string(ROBUSTMC_SOURCE_DIR) + "/" + path);
        CHECK(cfg.mode == cli::Mode::Curve);
        const auto problem = cli::build_problem(cfg);
        const auto nominal = systems::closed_loop_char_poly(problem, {0.0, 0.0, 0.0});
        CHECK(nominal.coeffs() == std::vector<double>{1.0, 20.0, 124.0, 1040.0, 1600.0});
    }
}

TEST_CASE("config validation: out-of-range field is named with its line") {
    const char* bad = R"(
[run]
mode = margin

[params]
epsilon = 1.5
)";
    try {
        cli::parse_config_text(bad, "bad.conf");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("params.epsilon") != std::string::npos);
        CHECK(msg.find("bad.conf:6") != std::string::npos);
    }
}

TEST_CASE("config rejection: unknown keys, duplicates, malformed lines") {
    CHECK_THROWS_AS(cli::parse_config_text("[run]\nmode = specs\nbogus = 1\n"), ConfigError);
    CHECK_THROWS_AS(cli::parse_config_text("[run]\nmode = specs\nmode = curve\n"), ConfigError);
    CHECK_THROWS_AS(cli::parse_config_text("[run\nmode = specs\n"), ConfigError);
    CHECK_THROWS_AS(cli::parse_config_text("mode = specs\n"), ConfigError);
    CHECK_THROWS_AS(cli::parse_config_text("[run]\nmode = banana\n"), ConfigError);
    CHECK_THROWS_AS(cli::parse_config_text("[run]\n= 3\n"), ConfigError);
    CHECK_THROWS_AS(cli::parse_config_text("[run]\nmode = margin\n[sim]\ndt = 0.1\n"), ConfigError);
    // non-finite numbers are rejected everywhere
    CHECK_THROWS_AS(cli::parse_config_text("[run]\nmode = specs\n[set]\ntype = simplex\n"
                                           "vertex.1 = nan, 0\nvertex.2 = 1, 0\nvertex.3 = 0, 1\n"),
                    ConfigError);
    CHECK_THROWS_AS(cli::parse_config_text("[run]\nmode = margin\n[params]\ngamma = inf\n"),
                    ConfigError);
    // vertex indices must be dense
    CHECK_THROWS_AS(cli::parse_config_text("[run]\nmode = specs\n[set]\ntype = simplex\n"
                                           "vertex.1 = 0, 0\nvertex.3 = 1, 0\n"),
                    ConfigError);
}

TEST_CASE("multiaffine expression parsing matches the factored plant") {
    const char* table_config = R"(
[run]
mode = specs

[set]
type = box
dim = 3

[plant]
dim = 3
num_table.degree = 0
num_table.s0 = 800 + 80*d1
den_table.degree = 3
den_table.s3 = 1
den_table.s2 = 10 + 0.2*d2 + 0.3*d3
den_table.s1 = 24 + 1.2*d2 + 1.2*d3 + 0.06*d2*d3

[compensator]
num = 1, 2
den = 1, 10

[predicate]
type = stability
)";
    const auto cfg = cli::parse_config_text(table_config);
    const auto problem = cli::build_problem(cfg);
    RngStream rng(9);
    const auto factored = cli::build_problem(cli::parse_config_text(minimal_margin_config));
    for (int i = 0; i < 100; ++i) {
        const uncertainty::SamplePoint d{rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2)};
        const auto a = systems::closed_loop_char_poly(problem, d).coeffs();
        const auto b = systems::closed_loop_char_poly(factored, d).coeffs();
        REQUIRE(a.size() == b.size());
        for (std::size_t j = 0; j < a.size(); ++j)
            CHECK(a[j] == doctest::Approx(b[j]).epsilon(1e-12));
    }

    CHECK_THROWS_AS(cli::parse_config_text("[run]\nmode = specs\n[set]\ntype = box\ndim = 2\n"
                                           "[plant]\ndim = 2\nnum_table.degree = 0\n"
                                           "num_table.s0 = 1*d1*d1\n"
                                           "[compensator]\nnum = 1\nden = 1, 1\n"
                                           "[predicate]\ntype = stability\n"),
                    ConfigError);
}

TEST_CASE("spectral set block parsing with multiplicities") {
    const auto cfg = cli::parse_config_text(
        "[run]\nmode = specs\n[set]\ntype = spectral\nblock.1 = real, 3\nblock.2 = complex\n");
    REQUIRE(cfg.set.has_value());
    CHECK(cfg.set->dim() == 3); // one real scalar + (re, im)
    const auto& sp = std::get<uncertainty::ScalarBlockSpectral>(cfg.set->variant());
    REQUIRE(sp.blocks.size() == 2);
    CHECK(sp.blocks[0].multiplicity == 3);
    CHECK(sp.blocks[1].field == uncertainty::BlockField::Complex);
    // multiplicity is structural only; the canonical rendering keeps it
    CHECK(cfg.render().find("block.1 = real, 3") != std::string::npos);
}

TEST_CASE("render/parse round trip is canonical") {
    for (const auto& cfg : {cli::demo1_config(), cli::demo2_config()}) {
        const std::string text = cfg.render();
        const auto reparsed = cli::parse_config_text(text, "render");
        CHECK(reparsed.render() == text);
    }
    const auto cfg = cli::parse_config_text(minimal_margin_config);
    CHECK(cli::parse_config_text(cfg.render(), "render").render() == cfg.render());
}

TEST_CASE("fuzzed configs never crash") {
    RngStream rng(0xF0220);
    const std::string alphabet = "[]=.,#ab cd_\n0123456789-+e\t fgh";
    for (int trial = 0; trial < 3000; ++trial) {
        std::string text;
        const int len = static_cast<int>(rng.next_double() * 400);
        for (int i = 0; i < len; ++i)
            text.push_back(alphabet[static_cast<std::size_t>(rng.next_double() * alphabet.size())]);
        try {
            (void)cli::parse_config_text(text, "fuzz");
        } catch (const ConfigError&) {
            // expected for almost all inputs
        }
    }
    // mutated real config: flip bytes of a valid file
    const std::string base = minimal_margin_config;
    for (int trial = 0; trial < 3000; ++trial) {
        std::string text = base;
        const int edits = 1 + static_cast<int>(rng.next_double() * 6);
        for (int e = 0; e < edits; ++e) {
            const auto pos = static_cast<std::size_t>(rng.next_double() * text.size());
            text[pos] = alphabet[static_cast<std::size_t>(rng.next_double() * alphabet.size())];
        }
        try {
            (void)cli::parse_config_text(text, "fuzz");
        } catch (const ConfigError&) {
        }
    }
}

TEST_CASE("curve CSV round trip at 12 significant digits") {
    const auto dir = tmpdir("csv");
    std::vector<curve::CurvePoint> pts;
    RngStream rng(5);
    for (int i = 0; i < 40; ++i) {
        curve::CurvePoint pt;
        pt.r = 2.0 - 0.04 * i;
        pt.m1 = 1000 + i;
        pt.m2 = 1000 + i - (i % 7);
        pt.estimate = static_cast<double>(pt.m2) / static_cast<double>(pt.m1);
        pt.bounds = binom::explicit_limits({pt.m1, pt.m2}, 0.01);
        pts.push_back(pt);
    }
    const auto path = dir + "/curve.csv";
    cli::write_curve_csv(pts, path);
    const auto parsed = cli::read_curve_csv(path);
    REQUIRE(parsed.size() == pts.size());
    const auto sig12 = [](double v) {
        char buf[48];
        std::snprintf(buf, sizeof(buf), "%.12g", v);
        return std::string(buf);
    };
    for (std::size_t i = 0; i < pts.size(); ++i) {
        CHECK(sig12(parsed[i].r) == sig12(pts[i].r));
        CHECK(sig12(parsed[i].estimate) == sig12(pts[i].estimate));
        CHECK(sig12(parsed[i].bounds.lower) == sig12(pts[i].bounds.lower));
        CHECK(sig12(parsed[i].bounds.upper) == sig12(pts[i].bounds.upper));
        CHECK(parsed[i].m1 == pts[i].m1);
        CHECK(parsed[i].m2 == pts[i].m2);
    }
}

TEST_CASE("single-point curve still renders CSV and SVG") {
    const auto dir = tmpdir("svg");
    std::vector<curve::CurvePoint> pts(1);
    pts[0].r = 0.5;
    pts[0].m1 = 100;
    pts[0].m2 = 100;
    pts[0].estimate = 1.0;
    pts[0].bounds = binom::explicit_limits({100, 100}, 0.01);
    cli::write_curve_csv(pts, dir + "/one.csv");
    cli::write_curve_svg(pts, 0.01, dir + "/one.svg");

    const auto csv = slurp(dir + "/one.csv");
    CHECK(csv.substr(0, 28) == "r,phat,lower,upper,m1,m2\n0.5");
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 2);

    const auto svg = slurp(dir + "/one.svg");
    CHECK(svg.find("<svg") == 0);
    CHECK(svg.find("</svg>") != std::string::npos);
    CHECK(svg.find("stroke-dasharray") != std::string::npos); // the 1-eps rule
}

TEST_CASE("ci-table mode: row-wise containment ordering") {
    auto cfg = cli::parse_config_text("[run]\nmode = ci-table\nseed = 1\n[ci]\nN = 60\ndelta = 0.01\n");
    cfg.out_dir = tmpdir("citable");
    const auto result = cli::run_experiment(cfg);
    CHECK(result.max_width_inflation >= 1.0);
    CHECK(std::isfinite(result.max_width_inflation));

    const auto csv = slurp(cfg.out_dir + "/citable.csv");
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);
    CHECK(line == "k,explicit_upper,cp_upper,cp_lower,explicit_lower");
    int rows = 0;
    while (std::getline(in, line)) {
        double a, c, d, b;
        int k;
        REQUIRE(std::sscanf(line.c_str(), "%d,%lf,%lf,%lf,%lf", &k, &a, &c, &d, &b) == 5);
        CHECK(a >= c);
        CHECK(c >= d);
        CHECK(d >= b);
        ++rows;
    }
    CHECK(rows == 61);
}

TEST_CASE("margin experiment replays byte-for-byte from its own config") {
    auto cfg = cli::parse_config_text(minimal_margin_config);
    cfg.out_dir = tmpdir("replay");
    (void)cli::run_experiment(cfg);
    const auto margin_first = slurp(cfg.out_dir + "/margin.csv");
    const auto log_first = slurp(cfg.out_dir + "/run.log");

    // replay from the config embedded in the run log's begin record
    const auto embedded = cli::parse_config_text(cfg.render(), "embedded");
    (void)cli::run_experiment(embedded);
    CHECK(slurp(cfg.out_dir + "/margin.csv") == margin_first);
    CHECK(slurp(cfg.out_dir + "/run.log") == log_first);
}

TEST_CASE("curve mode produces descending radii across intervals") {
    auto cfg = cli::parse_config_text(minimal_margin_config);
    cfg.mode = cli::Mode::Curve;
    cfg.params.epsilon = 0.05;
    cfg.params.l = 10;
    cfg.params.n_override = 300;
    cfg.out_dir = tmpdir("curvemode");
    const auto result = cli::run_experiment(cfg);
    REQUIRE_FALSE(result.curves.empty());
    const auto pts = cli::read_curve_csv(cfg.out_dir + "/curve.csv");
    REQUIRE(pts.size() >= 10);
    for (std::size_t i = 1; i < pts.size(); ++i) CHECK(pts[i].r <= pts[i - 1].r + 1e-12);
    CHECK(fs::exists(cfg.out_dir + "/curve.svg"));
}

TEST_CASE("experiment rejects configs missing required blocks") {
    auto cfg = cli::parse_config_text("[run]\nmode = margin\n");
    cfg.out_dir = tmpdir("missing");
    CHECK_THROWS_AS(cli::run_experiment(cfg), ConfigError);
}

TEST_CASE("cli binary exit codes: 0 ok, 1 validation, 3 i/o") {
    const std::string bin = ROBUSTMC_BIN;
    const auto dir = tmpdir("exitcodes");
    const auto run = [&](const std::string& args) {
        const int status = std::system((bin + " " + args + " >/dev/null 2>&1").c_str());
        return WEXITSTATUS(status);
    };
    CHECK(run("definitely-not-a-mode") == 1);
    CHECK(run("margin") == 1);                              // missing --config
    CHECK(run("margin --config " + dir + "/nope.conf") == 3); // unreadable file
    CHECK(run("demo1 --config " + dir + "/nope.conf") == 1);  // demos take no config

    std::ofstream(dir + "/bad.conf") << "[run]\nmode = margin\n[params]\nepsilon = 1.5\n";
    CHECK(run("margin --config " + dir + "/bad.conf") == 1);

    std::ofstream(dir + "/mismatch.conf") << "[run]\nmode = curve\n";
    CHECK(run("margin --config " + dir + "/mismatch.conf") == 1);

    std::ofstream(dir + "/ci.conf") << "[run]\nmode = ci-table\nout = " << dir
                                    << "\n[ci]\nN = 20\ndelta = 0.05\n";
    CHECK(run("ci-table --config " + dir + "/ci.conf") == 0);
    CHECK(fs::exists(dir + "/citable.csv"));
}

TEST_CASE("demo1 binary run: exit 0, artifacts present, cross-process determinism") {
    const std::string bin = ROBUSTMC_BIN;
    const auto dir = tmpdir("demo1bin");
    const auto run = [&](const std::string& args) {
        const int status = std::system((bin + " " + args + " >/dev/null 2>&1").c_str());
        return WEXITSTATUS(status);
    };
    REQUIRE(run("demo1 --out " + dir) == 0);
    for (const char* f : {"margin.csv", "curve.csv", "curve.svg", "run.log"})
        CHECK(fs::exists(dir + "/" + f));
    const auto margin_first = slurp(dir + "/margin.csv");
    const auto curve_first = slurp(dir + "/curve.csv");
    CHECK(margin_first.find("initial,1,7060,7060,above") != std::string::npos);

    // the strategy finishes in its first interval: one all-success record
    const auto log = slurp(dir + "/run.log");
    CHECK(log.find("\"all_success\":true") != std::string::npos);
    CHECK(log.find("\"index\":1") == std::string::npos);

    // a second process with the same seed reproduces the bytes
    REQUIRE(run("demo1 --out " + dir) == 0);
    CHECK(slurp(dir + "/margin.csv") == margin_first);
    CHECK(slurp(dir + "/curve.csv") == curve_first);

    // a different seed gives a different transcript
    REQUIRE(run("demo1 --seed 7 --out " + dir) == 0);
    CHECK(slurp(dir + "/margin.csv") != margin_first);
}

TEST_CASE("demo1 curve shape: above the rule at 11/16, crossing near 1.3") {
    const auto cfg = cli::demo1_config();
    const auto problem = cli::build_problem(cfg);
    const auto curve = curve::sample_reuse_curve(
        problem, 50631, 0.001, curve::RadiusGrid(11.0 / 16.0, 11.0 / 8.0, 100),
        RngStream(42, {0x6375, 0}));

    // the bottom row sits well above the 1 - eps = 0.999 rule line
    const auto& bottom = curve.points.back();
    CHECK(bottom.r == doctest::Approx(11.0 / 16.0));
    CHECK(bottom.estimate > 0.999);
    CHECK(bottom.bounds.lower > 0.999);

    // the estimate crosses 0.999 somewhere near r = 1.3
    double crossing = 0.0;
    for (std::size_t i = curve.points.size(); i-- > 1;) {
        if (curve.points[i].estimate >= 0.999 && curve.points[i - 1].estimate < 0.999) {
            crossing = curve.points[i].r;
            break;
        }
    }
    CHECK(crossing > 1.15);
    CHECK(crossing < 1.375);
}

TEST_CASE("specs mode prints roots and the step statistics") {
    auto cfg = cli::parse_config_text(minimal_margin_config);
    cfg.mode = cli::Mode::Specs;
    cfg.out_dir = tmpdir("specs");
    (void)cli::run_experiment(cfg); // throws on failure
    CHECK(fs::exists(cfg.out_dir + "/run.log"));
}
