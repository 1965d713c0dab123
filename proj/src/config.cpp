// config.cpp -- config file parsing, validation, rendering, demo setups.

#include "robustmc/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "robustmc/errors.hpp"

namespace robustmc::cli {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

struct Entry {
    std::string value;
    int line = 0;
    mutable bool consumed = false;
};

// Raw parse result: ordered (section, key) -> value, duplicates rejected.
class RawConfig {
  public:
    RawConfig(const std::string& text, std::string source) : source_(std::move(source)) {
        std::istringstream in(text);
        std::string line;
        std::string section;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            const auto hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            const std::string t = trim(line);
            if (t.empty()) continue;
            if (t.front() == '[') {
                if (t.back() != ']')
                    fail(lineno, "malformed section header '" + t + "'");
                section = trim(t.substr(1, t.size() - 2));
                if (section.empty()) fail(lineno, "empty section name");
                continue;
            }
            const auto eq = t.find('=');
            if (eq == std::string::npos)
                fail(lineno, "expected 'key = value', got '" + t + "'");
            const std::string key = trim(t.substr(0, eq));
            const std::string value = trim(t.substr(eq + 1));
            if (key.empty()) fail(lineno, "empty key");
            if (section.empty()) fail(lineno, "key '" + key + "' outside any [section]");
            auto& sec = entries_[section];
            if (sec.count(key))
                fail(lineno, "duplicate key '" + section + "." + key + "' (first at line " +
                                 std::to_string(sec[key].line) + ")");
            sec[key] = Entry{value, lineno, false};
        }
    }

    const Entry* find(const std::string& section, const std::string& key) const {
        const auto sit = entries_.find(section);
        if (sit == entries_.end()) return nullptr;
        const auto kit = sit->second.find(key);
        if (kit == sit->second.end()) return nullptr;
        kit->second.consumed = true;
        return &kit->second;
    }

    bool has_section(const std::string& section) const { return entries_.count(section) > 0; }

    // Consumed-marked iteration over keys of one section matching a prefix
    // like "vertex."; returns (suffix, entry) sorted by numeric suffix.
    std::vector<std::pair<int, const Entry*>> indexed(const std::string& section,
                                                      const std::string& prefix) const {
        std::vector<std::pair<int, const Entry*>> out;
        const auto sit = entries_.find(section);
        if (sit == entries_.end()) return out;
        for (const auto& [key, entry] : sit->second) {
            if (key.rfind(prefix, 0) != 0) continue;
            const std::string suffix = key.substr(prefix.size());
            if (suffix.empty() || !std::all_of(suffix.begin(), suffix.end(), [](char c) {
                    return std::isdigit(static_cast<unsigned char>(c));
                }))
                continue;
            entry.consumed = true;
            int idx = 0;
            try {
                idx = std::stoi(suffix);
            } catch (const std::exception&) {
                fail(entry.line, "index in '" + section + "." + key + "' is out of range");
            }
            out.emplace_back(idx, &entry);
        }
        std::sort(out.begin(), out.end());
        for (std::size_t i = 0; i < out.size(); ++i)
            if (out[i].first != static_cast<int>(i) + 1)
                fail(out[i].second->line, "indexed keys '" + section + "." + prefix +
                                              "<i>' must run 1,2,... without gaps");
        return out;
    }

    void reject_unconsumed() const {
        for (const auto& [section, keys] : entries_)
            for (const auto& [key, entry] : keys)
                if (!entry.consumed)
                    fail(entry.line, "unknown key '" + section + "." + key + "'");
    }

    [[noreturn]] void fail(int line, const std::string& msg) const {
        throw ConfigError(source_ + ":" + std::to_string(line) + ": " + msg);
    }

  private:
    std::string source_;
    std::map<std::string, std::map<std::string, Entry>> entries_;
};

double parse_double(const RawConfig& raw, const Entry& e, const std::string& name) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(e.value, &pos);
        if (pos != e.value.size()) throw std::invalid_argument("trailing characters");
        if (!std::isfinite(v)) throw std::invalid_argument("not finite");
        return v;
    } catch (const std::exception&) {
        raw.fail(e.line, name + ": expected a finite number, got '" + e.value + "'");
    }
}

std::int64_t parse_int(const RawConfig& raw, const Entry& e, const std::string& name) {
    try {
        std::size_t pos = 0;
        const long long v = std::stoll(e.value, &pos);
        if (pos != e.value.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        raw.fail(e.line, name + ": expected an integer, got '" + e.value + "'");
    }
}

std::uint64_t parse_uint(const RawConfig& raw, const Entry& e, const std::string& name) {
    try {
        std::size_t pos = 0;
        const unsigned long long v = std::stoull(e.value, &pos);
        if (pos != e.value.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        raw.fail(e.line, name + ": expected a nonnegative integer, got '" + e.value + "'");
    }
}

std::vector<std::string> split_list(const std::string& value) {
    std::vector<std::string> parts;
    std::string cur;
    for (char c : value) {
        if (c == ',') {
            parts.push_back(trim(cur));
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    parts.push_back(trim(cur));
    return parts;
}

std::vector<double> parse_double_list(const RawConfig& raw, const Entry& e,
                                      const std::string& name) {
    std::vector<double> out;
    for (const auto& part : split_list(e.value)) {
        if (part.empty()) raw.fail(e.line, name + ": empty element in list '" + e.value + "'");
        try {
            std::size_t pos = 0;
            const double v = std::stod(part, &pos);
            if (pos != part.size()) throw std::invalid_argument("trailing characters");
            if (!std::isfinite(v)) throw std::invalid_argument("not finite");
            out.push_back(v);
        } catch (const std::exception&) {
            raw.fail(e.line, name + ": expected a finite number, got '" + part + "'");
        }
    }
    return out;
}

// Multiaffine expression: terms joined by +/-, each term a numeric
// coefficient and/or '*'-joined variables d1, d2, ... 1-based in the file.
std::vector<systems::MultiaffineTerm> parse_multiaffine(const RawConfig& raw, const Entry& e,
                                                        const std::string& name, int dim) {
    const std::string& s = e.value;
    std::vector<std::string> pieces;
    std::vector<int> signs;
    std::string cur;
    int sign = 1;
    bool expecting_term = true;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const char c = s[i];
        if ((c == '+' || c == '-') &&
            !(i > 0 && (s[i - 1] == 'e' || s[i - 1] == 'E') && !expecting_term)) {
            if (expecting_term) { // unary sign
                if (c == '-') sign = -sign;
                continue;
            }
            pieces.push_back(cur);
            signs.push_back(sign);
            cur.clear();
            sign = c == '-' ? -1 : 1;
            expecting_term = true;
            continue;
        }
        if (!std::isspace(static_cast<unsigned char>(c))) expecting_term = false;
        cur.push_back(c);
    }
    pieces.push_back(cur);
    signs.push_back(sign);

    std::vector<systems::MultiaffineTerm> terms;
    for (std::size_t t = 0; t < pieces.size(); ++t) {
        const std::string piece = trim(pieces[t]);
        if (piece.empty()) raw.fail(e.line, name + ": empty term in '" + s + "'");
        systems::MultiaffineTerm term;
        term.coeff = static_cast<double>(signs[t]);
        bool saw_number = false;
        for (const auto& factor_raw : [&] {
                 std::vector<std::string> f;
                 std::string c2;
                 for (char ch : piece) {
                     if (ch == '*') {
                         f.push_back(trim(c2));
                         c2.clear();
                     } else {
                         c2.push_back(ch);
                     }
                 }
                 f.push_back(trim(c2));
                 return f;
             }()) {
            if (factor_raw.empty()) raw.fail(e.line, name + ": empty factor in '" + piece + "'");
            if (factor_raw[0] == 'd' && factor_raw.size() > 1 &&
                std::all_of(factor_raw.begin() + 1, factor_raw.end(), [](char c2) {
                    return std::isdigit(static_cast<unsigned char>(c2));
                })) {
                int var = 0;
                try {
                    var = std::stoi(factor_raw.substr(1));
                } catch (const std::exception&) {
                    raw.fail(e.line, name + ": variable index in '" + factor_raw + "' out of range");
                }
                if (var < 1 || var > dim)
                    raw.fail(e.line, name + ": variable '" + factor_raw + "' outside d1..d" +
                                         std::to_string(dim));
                if (std::find(term.vars.begin(), term.vars.end(), var - 1) != term.vars.end())
                    raw.fail(e.line, name + ": variable '" + factor_raw +
                                         "' repeated in one term (map must be multiaffine)");
                term.vars.push_back(var - 1);
            } else {
                try {
                    std::size_t pos = 0;
                    const double v = std::stod(factor_raw, &pos);
                    if (pos != factor_raw.size()) throw std::invalid_argument("trailing");
                    if (!std::isfinite(v)) throw std::invalid_argument("not finite");
                    term.coeff *= v;
                    saw_number = true;
                } catch (const std::exception&) {
                    raw.fail(e.line, name + ": bad factor '" + factor_raw + "'");
                }
            }
        }
        if (!saw_number && term.vars.empty())
            raw.fail(e.line, name + ": term '" + piece + "' has neither number nor variable");
        terms.push_back(std::move(term));
    }
    return terms;
}

Mode parse_mode(const RawConfig& raw, const Entry& e) {
    const std::string v = e.value;
    if (v == "ci-table") return Mode::CiTable;
    if (v == "margin") return Mode::Margin;
    if (v == "curve") return Mode::Curve;
    if (v == "specs") return Mode::Specs;
    if (v == "demo1") return Mode::Demo1;
    if (v == "demo2") return Mode::Demo2;
    raw.fail(e.line, "run.mode: expected one of ci-table|margin|curve|specs|demo1|demo2, got '" +
                         v + "'");
}

void require_unit_interval(const RawConfig& raw, const Entry& e, double v, const std::string& name) {
    if (!(v > 0.0 && v < 1.0))
        raw.fail(e.line, name + ": must lie strictly inside (0,1), got " + e.value);
}

ParamsBlock parse_params(const RawConfig& raw) {
    ParamsBlock p;
    if (const auto* e = raw.find("params", "epsilon")) {
        p.epsilon = parse_double(raw, *e, "params.epsilon");
        require_unit_interval(raw, *e, p.epsilon, "params.epsilon");
    }
    if (const auto* e = raw.find("params", "delta")) {
        p.delta = parse_double(raw, *e, "params.delta");
        require_unit_interval(raw, *e, p.delta, "params.delta");
    }
    if (const auto* e = raw.find("params", "gamma")) {
        p.gamma = parse_double(raw, *e, "params.gamma");
        if (!(p.gamma > 0.0)) raw.fail(e->line, "params.gamma: must be > 0");
    }
    if (const auto* e = raw.find("params", "alpha")) {
        p.alpha = parse_double(raw, *e, "params.alpha");
        require_unit_interval(raw, *e, p.alpha, "params.alpha");
    }
    if (const auto* e = raw.find("params", "l")) {
        p.l = static_cast<int>(parse_int(raw, *e, "params.l"));
        if (p.l < 2) raw.fail(e->line, "params.l: need at least 2 radii");
    }
    if (const auto* e = raw.find("params", "N")) {
        p.n_override = parse_int(raw, *e, "params.N");
        if (*p.n_override < 1) raw.fail(e->line, "params.N: must be >= 1");
    }
    if (const auto* e = raw.find("params", "cap")) {
        p.cap = parse_int(raw, *e, "params.cap");
        if (*p.cap < 1) raw.fail(e->line, "params.cap: must be >= 1");
    }
    if (const auto* e = raw.find("params", "max_halvings")) {
        p.max_halvings = static_cast<int>(parse_int(raw, *e, "params.max_halvings"));
        if (p.max_halvings < 1) raw.fail(e->line, "params.max_halvings: must be >= 1");
    }
    if (const auto* e = raw.find("params", "max_doublings")) {
        p.max_doublings = static_cast<int>(parse_int(raw, *e, "params.max_doublings"));
        if (p.max_doublings < 1) raw.fail(e->line, "params.max_doublings: must be >= 1");
    }
    if (const auto* e = raw.find("params", "start_radius")) {
        p.start_radius = parse_double(raw, *e, "params.start_radius");
        if (!(p.start_radius > 0.0)) raw.fail(e->line, "params.start_radius: must be > 0");
    }
    if (const auto* e = raw.find("params", "batch")) {
        p.batch = parse_int(raw, *e, "params.batch");
        if (p.batch < 1) raw.fail(e->line, "params.batch: must be >= 1");
    }
    if (const auto* e = raw.find("params", "curve_delta")) {
        p.curve_delta = parse_double(raw, *e, "params.curve_delta");
        require_unit_interval(raw, *e, *p.curve_delta, "params.curve_delta");
    }
    if (const auto* e = raw.find("params", "R_hat")) {
        p.r_hat = parse_double(raw, *e, "params.R_hat");
        if (!(*p.r_hat > 0.0)) raw.fail(e->line, "params.R_hat: must be > 0");
    }
    return p;
}

uncertainty::UncertaintySet parse_set(const RawConfig& raw) {
    const auto* type = raw.find("set", "type");
    if (!type) throw ConfigError("config: [set] block needs a 'type' key");
    const std::string t = type->value;

    if (t == "lp_ball" || t == "box") {
        const auto* dim_e = raw.find("set", "dim");
        if (!dim_e) raw.fail(type->line, "set.dim: required for type '" + t + "'");
        const int dim = static_cast<int>(parse_int(raw, *dim_e, "set.dim"));
        if (dim < 1) raw.fail(dim_e->line, "set.dim: must be >= 1");
        if (t == "box") return uncertainty::UncertaintySet(uncertainty::Box{dim});
        double p = 2.0;
        if (const auto* pe = raw.find("set", "p")) {
            if (pe->value == "inf") {
                p = uncertainty::inf_norm;
            } else {
                p = parse_double(raw, *pe, "set.p");
                if (!(p >= 1.0)) raw.fail(pe->line, "set.p: norm order must be >= 1 (or 'inf')");
            }
        }
        return uncertainty::UncertaintySet(uncertainty::LpBall{p, dim});
    }

    if (t == "spectral") {
        uncertainty::ScalarBlockSpectral sp;
        for (const auto& [idx, e] : raw.indexed("set", "block.")) {
            (void)idx;
            const auto parts = split_list(e->value);
            uncertainty::ScalarBlock blk;
            if (parts.empty() || (parts[0] != "real" && parts[0] != "complex"))
                raw.fail(e->line, "set.block: expected 'real' or 'complex', got '" + e->value + "'");
            blk.field = parts[0] == "real" ? uncertainty::BlockField::Real
                                           : uncertainty::BlockField::Complex;
            if (parts.size() > 2) raw.fail(e->line, "set.block: too many fields");
            if (parts.size() == 2) {
                try {
                    blk.multiplicity = std::stoi(parts[1]);
                } catch (const std::exception&) {
                    raw.fail(e->line, "set.block: bad multiplicity '" + parts[1] + "'");
                }
                if (blk.multiplicity < 1) raw.fail(e->line, "set.block: multiplicity must be >= 1");
            }
            sp.blocks.push_back(blk);
        }
        if (sp.blocks.empty()) raw.fail(type->line, "set type 'spectral' needs block.1, block.2, ...");
        return uncertainty::UncertaintySet(std::move(sp));
    }

    if (t == "simplex") {
        uncertainty::StarSimplex sx;
        for (const auto& [idx, e] : raw.indexed("set", "vertex.")) {
            (void)idx;
            sx.vertices.push_back(parse_double_list(raw, *e, "set.vertex"));
        }
        if (sx.vertices.empty()) raw.fail(type->line, "set type 'simplex' needs vertex.1, vertex.2, ...");
        return uncertainty::UncertaintySet(std::move(sx));
    }

    raw.fail(type->line, "set.type: expected lp_ball|box|spectral|simplex, got '" + t + "'");
}

systems::UncertainPlant parse_plant(const RawConfig& raw, int set_dim) {
    systems::UncertainPlant plant;
    plant.uncertainty_dim = set_dim;
    if (const auto* e = raw.find("plant", "dim")) {
        plant.uncertainty_dim = static_cast<int>(parse_int(raw, *e, "plant.dim"));
        if (plant.uncertainty_dim < 0) raw.fail(e->line, "plant.dim: must be >= 0");
    }
    const int dim = plant.uncertainty_dim;

    if (const auto* e = raw.find("plant", "gain")) plant.gain0 = parse_double(raw, *e, "plant.gain");
    plant.gain_lin.assign(static_cast<std::size_t>(dim), 0.0);
    for (int i = 1; i <= dim; ++i) {
        if (const auto* e = raw.find("plant", "gain.d" + std::to_string(i)))
            plant.gain_lin[static_cast<std::size_t>(i - 1)] =
                parse_double(raw, *e, "plant.gain.d" + std::to_string(i));
    }

    const auto parse_factor = [&](const Entry& e, const std::string& name) {
        const auto v = parse_double_list(raw, e, name);
        if (v.size() != 3) raw.fail(e.line, name + ": expected 'a, b, d' (d = 0 for none)");
        systems::LinearFactor f;
        f.a = v[0];
        f.b = v[1];
        const int d = static_cast<int>(v[2]);
        if (v[2] != d || d < 0 || d > dim)
            raw.fail(e.line, name + ": uncertainty index must be an integer in 0.." +
                                 std::to_string(dim));
        f.delta_index = d - 1; // 0 means no dependence
        return f;
    };
    for (const auto& [idx, e] : raw.indexed("plant", "num_factor.")) {
        (void)idx;
        plant.numerator_factors.push_back(parse_factor(*e, "plant.num_factor"));
    }
    for (const auto& [idx, e] : raw.indexed("plant", "den_factor.")) {
        (void)idx;
        plant.denominator_factors.push_back(parse_factor(*e, "plant.den_factor"));
    }

    const auto parse_table = [&](const char* prefix) -> std::optional<systems::CoeffTable> {
        const std::string deg_key = std::string(prefix) + ".degree";
        const auto* deg_e = raw.find("plant", deg_key);
        if (!deg_e) return std::nullopt;
        const int degree = static_cast<int>(parse_int(raw, *deg_e, "plant." + deg_key));
        if (degree < 0) raw.fail(deg_e->line, "plant." + deg_key + ": must be >= 0");
        systems::CoeffTable table;
        table.coeffs.assign(static_cast<std::size_t>(degree) + 1, {});
        for (int pow = 0; pow <= degree; ++pow) {
            const std::string key = std::string(prefix) + ".s" + std::to_string(pow);
            if (const auto* e = raw.find("plant", key))
                table.coeffs[static_cast<std::size_t>(degree - pow)] =
                    parse_multiaffine(raw, *e, "plant." + key, dim);
        }
        return table;
    };
    plant.num_table = parse_table("num_table");
    plant.den_table = parse_table("den_table");
    return plant;
}

systems::Compensator parse_compensator(const RawConfig& raw) {
    systems::Compensator comp{poly::Polynomial({1.0}), poly::Polynomial({1.0})};
    const auto* num = raw.find("compensator", "num");
    const auto* den = raw.find("compensator", "den");
    if (!num || !den) throw ConfigError("config: [compensator] needs both 'num' and 'den'");
    comp.num = poly::Polynomial(parse_double_list(raw, *num, "compensator.num"));
    comp.den = poly::Polynomial(parse_double_list(raw, *den, "compensator.den"));
    if (comp.num.degree() > comp.den.degree())
        raw.fail(num->line, "compensator: must be proper (deg num <= deg den)");
    return comp;
}

systems::Predicate parse_predicate(const RawConfig& raw) {
    const auto* type = raw.find("predicate", "type");
    if (!type) throw ConfigError("config: [predicate] block needs a 'type' key");
    const std::string t = type->value;

    if (t == "stability") return systems::StabilityPredicate{};

    if (t == "dstability") {
        systems::DStabilityPredicate d;
        if (const auto* e = raw.find("predicate", "half_plane"))
            d.region.half_plane_bound = parse_double(raw, *e, "predicate.half_plane");
        for (const auto& [idx, e] : raw.indexed("predicate", "disk.")) {
            (void)idx;
            const auto v = parse_double_list(raw, *e, "predicate.disk");
            if (v.size() != 3) raw.fail(e->line, "predicate.disk: expected 're, im, radius'");
            if (!(v[2] > 0.0)) raw.fail(e->line, "predicate.disk: radius must be > 0");
            d.region.disks.push_back({{v[0], v[1]}, v[2]});
        }
        if (!d.region.half_plane_bound && d.region.disks.empty())
            raw.fail(type->line, "predicate 'dstability' needs half_plane and/or disk.<i>");
        return d;
    }

    if (t == "timedomain") {
        systems::TimeDomainPredicate td;
        const auto* rise = raw.find("predicate", "rise_max");
        const auto* settle = raw.find("predicate", "settle_max");
        const auto* peak = raw.find("predicate", "peak_max");
        if (!rise || !settle || !peak)
            raw.fail(type->line, "predicate 'timedomain' needs rise_max, settle_max, peak_max");
        td.spec.rise_time_max = parse_double(raw, *rise, "predicate.rise_max");
        td.spec.settling_time_max = parse_double(raw, *settle, "predicate.settle_max");
        td.spec.peak_max = parse_double(raw, *peak, "predicate.peak_max");
        if (!(td.spec.rise_time_max > 0.0 && td.spec.settling_time_max > 0.0 &&
              td.spec.peak_max > 0.0))
            raw.fail(type->line, "predicate thresholds must be positive");
        if (const auto* e = raw.find("predicate", "rise_def")) {
            if (e->value == "10-90")
                td.spec.rise_def = systems::RiseDefinition::Pct10to90;
            else if (e->value == "0-100")
                td.spec.rise_def = systems::RiseDefinition::Pct0to100;
            else
                raw.fail(e->line, "predicate.rise_def: expected '10-90' or '0-100'");
        }
        if (const auto* e = raw.find("predicate", "settle_band")) {
            td.spec.settle_band = parse_double(raw, *e, "predicate.settle_band");
            require_unit_interval(raw, *e, td.spec.settle_band, "predicate.settle_band");
        }
        return td;
    }

    raw.fail(type->line, "predicate.type: expected stability|dstability|timedomain, got '" + t + "'");
}

systems::SimParams parse_sim(const RawConfig& raw) {
    systems::SimParams sim;
    if (const auto* e = raw.find("sim", "dt")) {
        sim.dt = parse_double(raw, *e, "sim.dt");
        if (!(sim.dt > 0.0)) raw.fail(e->line, "sim.dt: must be > 0");
    }
    if (const auto* e = raw.find("sim", "horizon")) {
        sim.horizon = parse_double(raw, *e, "sim.horizon");
        if (!(sim.horizon > 0.0)) raw.fail(e->line, "sim.horizon: must be > 0");
    }
    if (const auto* e = raw.find("sim", "hold")) {
        sim.settle_hold = parse_double(raw, *e, "sim.hold");
        if (!(sim.settle_hold >= 0.0)) raw.fail(e->line, "sim.hold: must be >= 0");
    }
    return sim;
}

} // namespace

const char* mode_name(Mode m) {
    switch (m) {
        case Mode::CiTable: return "ci-table";
        case Mode::Margin: return "margin";
        case Mode::Curve: return "curve";
        case Mode::Specs: return "specs";
        case Mode::Demo1: return "demo1";
        case Mode::Demo2: return "demo2";
    }
    return "?";
}

ExperimentConfig parse_config_text(const std::string& text, const std::string& source_name) {
    const RawConfig raw(text, source_name);
    ExperimentConfig cfg;

    const auto* mode_e = raw.find("run", "mode");
    if (!mode_e) throw ConfigError(source_name + ": missing required key 'run.mode'");
    cfg.mode = parse_mode(raw, *mode_e);
    if (const auto* e = raw.find("run", "seed")) cfg.seed = parse_uint(raw, *e, "run.seed");
    if (const auto* e = raw.find("run", "out")) cfg.out_dir = e->value;

    cfg.params = parse_params(raw);

    if (const auto* e = raw.find("ci", "N")) {
        cfg.ci.n = parse_int(raw, *e, "ci.N");
        if (cfg.ci.n < 1) raw.fail(e->line, "ci.N: must be >= 1");
    }
    if (const auto* e = raw.find("ci", "delta")) {
        cfg.ci.delta = parse_double(raw, *e, "ci.delta");
        require_unit_interval(raw, *e, cfg.ci.delta, "ci.delta");
    }

    if (raw.has_section("set")) cfg.set = parse_set(raw);

    if (raw.has_section("plant") || raw.has_section("compensator") || raw.has_section("predicate")) {
        SystemBlock sys;
        sys.plant = parse_plant(raw, cfg.set ? cfg.set->dim() : 0);
        sys.compensator = parse_compensator(raw);
        sys.predicate = parse_predicate(raw);
        sys.sim = parse_sim(raw);
        cfg.system = std::move(sys);
    } else if (raw.has_section("sim")) {
        throw ConfigError(source_name + ": [sim] given without a system ([plant]/[compensator]/[predicate])");
    }

    if (const auto* e = raw.find("specs", "delta_point"))
        cfg.specs_delta_point = parse_double_list(raw, *e, "specs.delta_point");

    raw.reject_unconsumed();
    return cfg;
}

ExperimentConfig parse_config_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open config file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str(), path);
}

namespace {

void render_multiaffine(std::ostringstream& out, const std::vector<systems::MultiaffineTerm>& terms) {
    bool first = true;
    for (const auto& t : terms) {
        if (!first) out << " + ";
        first = false;
        out << fmt_double(t.coeff);
        for (int v : t.vars) out << "*d" << v + 1;
    }
    if (first) out << "0";
}

void render_system(std::ostringstream& out, const SystemBlock& sys) {
    const auto& plant = sys.plant;
    out << "\n[plant]\n";
    out << "dim = " << plant.uncertainty_dim << "\n";
    out << "gain = " << fmt_double(plant.gain0) << "\n";
    for (std::size_t i = 0; i < plant.gain_lin.size(); ++i)
        if (plant.gain_lin[i] != 0.0)
            out << "gain.d" << i + 1 << " = " << fmt_double(plant.gain_lin[i]) << "\n";
    const auto render_factors = [&](const char* prefix, const std::vector<systems::LinearFactor>& fs) {
        for (std::size_t i = 0; i < fs.size(); ++i)
            out << prefix << "." << i + 1 << " = " << fmt_double(fs[i].a) << ", "
                << fmt_double(fs[i].b) << ", " << fs[i].delta_index + 1 << "\n";
    };
    render_factors("num_factor", plant.numerator_factors);
    render_factors("den_factor", plant.denominator_factors);
    const auto render_table = [&](const char* prefix, const std::optional<systems::CoeffTable>& t) {
        if (!t) return;
        const int degree = static_cast<int>(t->coeffs.size()) - 1;
        out << prefix << ".degree = " << degree << "\n";
        for (int pow = degree; pow >= 0; --pow) {
            const auto& terms = t->coeffs[static_cast<std::size_t>(degree - pow)];
            if (terms.empty()) continue;
            out << prefix << ".s" << pow << " = ";
            std::ostringstream expr;
            render_multiaffine(expr, terms);
            out << expr.str() << "\n";
        }
    };
    render_table("num_table", plant.num_table);
    render_table("den_table", plant.den_table);

    out << "\n[compensator]\n";
    const auto render_poly = [&](const char* key, const poly::Polynomial& p) {
        out << key << " = ";
        for (std::size_t i = 0; i < p.coeffs().size(); ++i)
            out << (i ? ", " : "") << fmt_double(p.coeffs()[i]);
        out << "\n";
    };
    render_poly("num", sys.compensator.num);
    render_poly("den", sys.compensator.den);

    out << "\n[predicate]\n";
    if (std::holds_alternative<systems::StabilityPredicate>(sys.predicate)) {
        out << "type = stability\n";
    } else if (const auto* d = std::get_if<systems::DStabilityPredicate>(&sys.predicate)) {
        out << "type = dstability\n";
        if (d->region.half_plane_bound)
            out << "half_plane = " << fmt_double(*d->region.half_plane_bound) << "\n";
        for (std::size_t i = 0; i < d->region.disks.size(); ++i) {
            const auto& disk = d->region.disks[i];
            out << "disk." << i + 1 << " = " << fmt_double(disk.center.real()) << ", "
                << fmt_double(disk.center.imag()) << ", " << fmt_double(disk.radius) << "\n";
        }
    } else {
        const auto& td = std::get<systems::TimeDomainPredicate>(sys.predicate);
        out << "type = timedomain\n";
        out << "rise_max = " << fmt_double(td.spec.rise_time_max) << "\n";
        out << "settle_max = " << fmt_double(td.spec.settling_time_max) << "\n";
        out << "peak_max = " << fmt_double(td.spec.peak_max) << "\n";
        out << "rise_def = "
            << (td.spec.rise_def == systems::RiseDefinition::Pct10to90 ? "10-90" : "0-100") << "\n";
        out << "settle_band = " << fmt_double(td.spec.settle_band) << "\n";
    }

    out << "\n[sim]\n";
    out << "dt = " << fmt_double(sys.sim.dt) << "\n";
    out << "horizon = " << fmt_double(sys.sim.horizon) << "\n";
    out << "hold = " << fmt_double(sys.sim.settle_hold) << "\n";
}

void render_set(std::ostringstream& out, const uncertainty::UncertaintySet& set) {
    out << "\n[set]\n";
    if (const auto* lp = std::get_if<uncertainty::LpBall>(&set.variant())) {
        out << "type = lp_ball\n";
        out << "dim = " << lp->dim << "\n";
        if (std::isinf(lp->p))
            out << "p = inf\n";
        else
            out << "p = " << fmt_double(lp->p) << "\n";
    } else if (const auto* bx = std::get_if<uncertainty::Box>(&set.variant())) {
        out << "type = box\n";
        out << "dim = " << bx->dim << "\n";
    } else if (const auto* sp = std::get_if<uncertainty::ScalarBlockSpectral>(&set.variant())) {
        out << "type = spectral\n";
        for (std::size_t i = 0; i < sp->blocks.size(); ++i) {
            const auto& blk = sp->blocks[i];
            out << "block." << i + 1 << " = "
                << (blk.field == uncertainty::BlockField::Real ? "real" : "complex");
            if (blk.multiplicity != 1) out << ", " << blk.multiplicity;
            out << "\n";
        }
    } else {
        const auto& sx = std::get<uncertainty::StarSimplex>(set.variant());
        out << "type = simplex\n";
        for (std::size_t i = 0; i < sx.vertices.size(); ++i) {
            out << "vertex." << i + 1 << " = ";
            for (std::size_t j = 0; j < sx.vertices[i].size(); ++j)
                out << (j ? ", " : "") << fmt_double(sx.vertices[i][j]);
            out << "\n";
        }
    }
}

} // namespace

std::string ExperimentConfig::render() const {
    std::ostringstream out;
    out << "[run]\n";
    out << "mode = " << mode_name(mode) << "\n";
    out << "seed = " << seed << "\n";
    out << "out = " << out_dir << "\n";

    out << "\n[params]\n";
    out << "epsilon = " << fmt_double(params.epsilon) << "\n";
    out << "delta = " << fmt_double(params.delta) << "\n";
    out << "gamma = " << fmt_double(params.gamma) << "\n";
    out << "alpha = " << fmt_double(params.alpha) << "\n";
    out << "l = " << params.l << "\n";
    if (params.n_override) out << "N = " << *params.n_override << "\n";
    if (params.cap) out << "cap = " << *params.cap << "\n";
    out << "max_halvings = " << params.max_halvings << "\n";
    out << "max_doublings = " << params.max_doublings << "\n";
    out << "start_radius = " << fmt_double(params.start_radius) << "\n";
    out << "batch = " << params.batch << "\n";
    if (params.curve_delta) out << "curve_delta = " << fmt_double(*params.curve_delta) << "\n";
    if (params.r_hat) out << "R_hat = " << fmt_double(*params.r_hat) << "\n";

    if (mode == Mode::CiTable) {
        out << "\n[ci]\n";
        out << "N = " << ci.n << "\n";
        out << "delta = " << fmt_double(ci.delta) << "\n";
    }

    if (set) render_set(out, *set);
    if (system) render_system(out, *system);

    if (!specs_delta_point.empty()) {
        out << "\n[specs]\n";
        out << "delta_point = ";
        for (std::size_t i = 0; i < specs_delta_point.size(); ++i)
            out << (i ? ", " : "") << fmt_double(specs_delta_point[i]);
        out << "\n";
    }
    return out.str();
}

ExperimentConfig demo1_config() {
    ExperimentConfig cfg;
    cfg.mode = Mode::Demo1;
    cfg.seed = 42;
    cfg.params.epsilon = 0.001;
    cfg.params.delta = 0.01;
    cfg.params.gamma = 0.05;
    cfg.params.alpha = 0.5;
    cfg.params.l = 100;
    cfg.params.curve_delta = 0.001;

    // Regular tetrahedron-like simplex used by the D-stability demo.
    uncertainty::StarSimplex sx;
    const double pi = 3.14159265358979323846;
    for (int i = 1; i <= 3; ++i) {
        const double ang = (2.0 * i - 1.0) / 3.0 * pi;
        sx.vertices.push_back({0.5 * std::sin(ang), 0.5 * std::cos(ang), -std::sqrt(3.0) / 2.0});
    }
    sx.vertices.push_back({0.0, 0.0, 1.0});
    cfg.set = uncertainty::UncertaintySet(std::move(sx));

    SystemBlock sys;
    sys.plant.uncertainty_dim = 3;
    sys.plant.gain0 = 800.0;
    sys.plant.gain_lin = {80.0, 0.0, 0.0};
    sys.plant.denominator_factors = {
        {0.0, 0.0, -1}, // s
        {4.0, 0.2, 1},  // s + 4 + 0.2 d2
        {6.0, 0.3, 2},  // s + 6 + 0.3 d3
    };
    sys.compensator.num = poly::Polynomial({1.0, 2.0});
    sys.compensator.den = poly::Polynomial({1.0, 10.0});

    systems::DStabilityPredicate pred;
    pred.region.half_plane_bound = -1.5;
    // Disk radius calibrated so the risk-0.001 margin sits near r = 1.3 and
    // the degradation curve crosses the 0.999 rule there; see README.
    pred.region.disks = {{{-1.1256, 7.3234}, 0.228}, {{-1.1256, -7.3234}, 0.228}};
    sys.predicate = pred;
    cfg.system = std::move(sys);
    return cfg;
}

ExperimentConfig demo2_config() {
    ExperimentConfig cfg;
    cfg.mode = Mode::Demo2;
    cfg.seed = 42;
    cfg.params.epsilon = 0.01;
    cfg.params.delta = 0.01;
    cfg.params.gamma = 0.25;
    // alpha = 0.5 keeps the demo at desk scale; the original study used 0.2
    // (N = 24495), available via --alpha.
    cfg.params.alpha = 0.5;
    cfg.params.l = 100;

    cfg.set = uncertainty::UncertaintySet(uncertainty::Box{3});

    SystemBlock sys;
    sys.plant.uncertainty_dim = 3;
    sys.plant.gain0 = 800.0;
    sys.plant.gain_lin = {80.0, 0.0, 0.0};
    sys.plant.denominator_factors = {
        {0.0, 0.0, -1},
        {4.0, 0.2, 1},
        {6.0, 0.3, 2},
    };
    sys.compensator.num = poly::Polynomial({1.0, 2.0});
    sys.compensator.den = poly::Polynomial({1.0, 10.0});

    systems::TimeDomainPredicate pred;
    pred.spec.rise_time_max = 0.25;
    pred.spec.settling_time_max = 3.5;
    pred.spec.peak_max = 1.7;
    pred.spec.rise_def = systems::RiseDefinition::Pct10to90;
    pred.spec.settle_band = 0.02;
    sys.predicate = pred;
    cfg.system = std::move(sys);
    return cfg;
}

systems::RobustnessProblem build_problem(const ExperimentConfig& config) {
    if (!config.system)
        throw ConfigError("config: this mode needs [plant]/[compensator]/[predicate] blocks");
    if (!config.set) throw ConfigError("config: this mode needs a [set] block");
    return systems::RobustnessProblem(config.system->plant, config.system->compensator,
                                      config.system->predicate, *config.set, config.system->sim);
}

} // namespace robustmc::cli
