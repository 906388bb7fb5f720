#pragma once

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "stratlab/errors.hpp"
#include "stratlab/format.hpp"
#include "stratlab/group.hpp"
#include "stratlab/lab.hpp"

namespace stratlab {

/// One [experiment <id>] section.
struct ExperimentConfig {
    std::string id;
    std::string kind;
    std::map<std::string, std::string> params;
    int line = 0;
};

struct WeightConfig {
    std::string kind = "unit";  // unit | power
    double alpha = 0.0;
};

/**
 * Plain-text run description:
 *
 *   [group]       name, n, exponents, law, gauge_coeff
 *   [grid]        half_widths, points, dof_cap
 *   [weight]      kind = unit | power, alpha
 *   [tgrid]       min, max, points        (Poincare t grid)
 *   [besov]       min, max, points        (Besov sup grid)
 *   [balls]       radii, stride
 *   [family]      kind, count, width_min, width_max, chain_width, chain_links, modes
 *   [run]         seed, output_dir, cache
 *   [experiment <id>]  kind plus experiment parameters; weight.* and family.* override the defaults
 *
 * Lines are "key = value"; '#' starts a comment.
 */
struct RunConfig {
    std::string source = "<config>";
    std::map<std::string, std::string> group{{"name", "heisenberg"}};
    std::vector<double> half_widths{4.0, 4.0, 4.0};
    std::vector<int> points{17, 17, 25};
    std::size_t dof_cap = Grid::kDefaultDofCap;
    WeightConfig weight;
    double t_min = 1e-4, t_max = 1e2;
    int t_points = 97;
    double besov_min = 1e-4, besov_max = 1e2;
    int besov_points = 121;
    std::vector<double> radii{0.5, 1.0, 2.0, 4.0};
    int ball_stride = 2;
    FamilyParams family;
    std::uint64_t seed = 1;
    std::string output_dir = "stratlab-out";
    bool cache = true;
    std::vector<ExperimentConfig> experiments;

    GroupSpec spec() const { return from_config_block(group); }
};

struct ExperimentInfo {
    std::string kind;
    std::string summary;
    std::vector<std::string> params;
};

inline const std::vector<ExperimentInfo>& experiment_catalog() {
    static const std::vector<ExperimentInfo> c{
        {"poincare", "||J^(s/2)f - H_t J^(s/2)f||_{L1(w)} vs t^((1-s)/2) ||grad f||_{L1(w)}", {"s"}},
        {"strong", "||f||_{Lq(w)} <= C ||grad f||_{L1(w)}^(1/q) ||f||_{B^-beta}^(1-1/q)", {"q"}},
        {"weak", "weak-Lq form with J^(s/2) f, beta = (1-sq)/(q-1)", {"q", "s"}},
        {"glr", "||f||_{W^{s,q}(w)} <= C ||f||_{W^{s1,p}(w)}^(p/q) ||f||_{B^-beta}^(1-p/q)", {"p", "q", "s1", "s"}},
        {"pointwise", "|J^(-a/2)f| <= C M_B f^theta ||f||_{B^{-beta-s1}}^(1-theta)", {"p", "q", "s1", "s"}},
        {"lp-approximation", "Littlewood-Paley blocks f_j: reconstruction and L^q growth", {"j_max", "q", "member"}},
        {"weights", "Muckenhoupt A_p profile across the ball radii",
         {"p", "expect", "grid.half_widths", "grid.points", "balls.radii", "balls.stride"}},
        {"maximal", "M_phi f <= C M_B f for the heat profile phi = h_1", {}},
        {"threshold", "threshold items 1-3 on random and ramp functions", {"alpha", "M", "samples", "ramps"}},
        {"heat", "heat semigroup suite: composition, contraction, mass, symmetry, scaling", {"t", "s", "scale_t"}},
    };
    return c;
}

namespace detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

struct ConfigError {
    const std::string& source;
    int line;
    [[noreturn]] void operator()(const std::string& msg) const {
        throw InvalidArgument(source + ":" + std::to_string(line) + ": " + msg);
    }
};

inline double parse_double(const std::string& v, const ConfigError& err, const std::string& key) {
    double out = 0.0;
    const char* b = v.data();
    const char* e = v.data() + v.size();
    auto res = std::from_chars(b, e, out);
    if (res.ec != std::errc() || res.ptr != e) err("field '" + key + "': expected a number, got '" + v + "'");
    return out;
}

inline long long parse_int(const std::string& v, const ConfigError& err, const std::string& key) {
    long long out = 0;
    auto res = std::from_chars(v.data(), v.data() + v.size(), out);
    if (res.ec != std::errc() || res.ptr != v.data() + v.size())
        err("field '" + key + "': expected an integer, got '" + v + "'");
    return out;
}

inline bool parse_bool(const std::string& v, const ConfigError& err, const std::string& key) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    err("field '" + key + "': expected true/false, got '" + v + "'");
}

inline std::vector<std::string> split_list(const std::string& v) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream is(v);
    while (std::getline(is, cur, ',')) {
        cur = trim(cur);
        if (!cur.empty()) out.push_back(cur);
    }
    return out;
}

inline void apply_family_key(FamilyParams& f, const std::string& key, const std::string& v, const ConfigError& err) {
    if (key == "kind") f.kind = v;
    else if (key == "count") f.count = static_cast<int>(parse_int(v, err, key));
    else if (key == "width_min") f.width_min = parse_double(v, err, key);
    else if (key == "width_max") f.width_max = parse_double(v, err, key);
    else if (key == "chain_width") f.chain_width = parse_double(v, err, key);
    else if (key == "chain_links") f.chain_links = static_cast<int>(parse_int(v, err, key));
    else if (key == "modes") f.modes = static_cast<int>(parse_int(v, err, key));
    else if (key == "seed") f.seed = static_cast<std::uint64_t>(parse_int(v, err, key));
    else err("unknown family field '" + key + "'");
}

inline void apply_weight_key(WeightConfig& w, const std::string& key, const std::string& v, const ConfigError& err) {
    if (key == "kind") w.kind = v;
    else if (key == "alpha") w.alpha = parse_double(v, err, key);
    else err("unknown weight field '" + key + "'");
}

}  // namespace detail

inline RunConfig parse_config(const std::string& text, const std::string& source = "<config>") {
    RunConfig cfg;
    cfg.source = source;
    std::istringstream in(text);
    std::string raw, section;
    int line = 0;
    bool group_seen = false;
    ExperimentConfig* exp = nullptr;
    while (std::getline(in, raw)) {
        ++line;
        const detail::ConfigError err{cfg.source, line};
        std::string s = raw.substr(0, raw.find('#'));
        s = detail::trim(s);
        if (s.empty()) continue;
        if (s.front() == '[') {
            if (s.back() != ']') err("unterminated section header");
            section = detail::trim(s.substr(1, s.size() - 2));
            exp = nullptr;
            if (section.rfind("experiment", 0) == 0) {
                const std::string id = detail::trim(section.substr(10));
                if (id.empty()) err("experiment section needs an id: [experiment <id>]");
                for (const auto& e : cfg.experiments)
                    if (e.id == id) err("duplicate experiment id '" + id + "'");
                cfg.experiments.push_back({id, "", {}, line});
                exp = &cfg.experiments.back();
                section = "experiment";
            } else if (section == "group") {
                cfg.group.clear();
                group_seen = true;
            } else if (section != "grid" && section != "weight" && section != "tgrid" && section != "besov" &&
                       section != "balls" && section != "family" && section != "run") {
                err("unknown section [" + section + "]");
            }
            continue;
        }
        const auto eq = s.find('=');
        if (eq == std::string::npos) err("expected 'key = value'");
        const std::string key = detail::trim(s.substr(0, eq));
        const std::string val = detail::trim(s.substr(eq + 1));
        if (key.empty()) err("empty key");
        if (section.empty()) err("key '" + key + "' outside any section");

        if (section == "group") {
            cfg.group[key] = val;
        } else if (section == "grid") {
            if (key == "half_widths") {
                cfg.half_widths.clear();
                for (const auto& x : detail::split_list(val)) cfg.half_widths.push_back(detail::parse_double(x, err, key));
            } else if (key == "points" || key == "points_per_axis") {
                cfg.points.clear();
                for (const auto& x : detail::split_list(val))
                    cfg.points.push_back(static_cast<int>(detail::parse_int(x, err, key)));
            } else if (key == "dof_cap") {
                cfg.dof_cap = static_cast<std::size_t>(detail::parse_int(val, err, key));
            } else {
                err("unknown grid field '" + key + "'");
            }
        } else if (section == "weight") {
            detail::apply_weight_key(cfg.weight, key, val, err);
        } else if (section == "tgrid" || section == "besov") {
            double& lo = section == "tgrid" ? cfg.t_min : cfg.besov_min;
            double& hi = section == "tgrid" ? cfg.t_max : cfg.besov_max;
            int& n = section == "tgrid" ? cfg.t_points : cfg.besov_points;
            if (key == "min") lo = detail::parse_double(val, err, key);
            else if (key == "max") hi = detail::parse_double(val, err, key);
            else if (key == "points") n = static_cast<int>(detail::parse_int(val, err, key));
            else err("unknown " + section + " field '" + key + "'");
        } else if (section == "balls") {
            if (key == "radii") {
                cfg.radii.clear();
                for (const auto& x : detail::split_list(val)) cfg.radii.push_back(detail::parse_double(x, err, key));
            } else if (key == "stride") {
                cfg.ball_stride = static_cast<int>(detail::parse_int(val, err, key));
            } else {
                err("unknown balls field '" + key + "'");
            }
        } else if (section == "family") {
            detail::apply_family_key(cfg.family, key, val, err);
        } else if (section == "run") {
            if (key == "seed") cfg.seed = static_cast<std::uint64_t>(detail::parse_int(val, err, key));
            else if (key == "output_dir") cfg.output_dir = val;
            else if (key == "cache") cfg.cache = detail::parse_bool(val, err, key);
            else err("unknown run field '" + key + "'");
        } else if (section == "experiment") {
            if (key == "kind") exp->kind = val;
            else exp->params[key] = val;
        }
    }
    (void)group_seen;
    return cfg;
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidArgument("cannot read config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path);
}

// Typed access to experiment parameters with defaults.
struct ExperimentParams {
    const ExperimentConfig& e;
    const std::string& source;

    detail::ConfigError err() const { return {source, e.line}; }
    bool has(const std::string& k) const { return e.params.count(k) > 0; }
    double num(const std::string& k, double def) const {
        auto it = e.params.find(k);
        return it == e.params.end() ? def : detail::parse_double(it->second, err(), k);
    }
    long long integer(const std::string& k, long long def) const {
        auto it = e.params.find(k);
        return it == e.params.end() ? def : detail::parse_int(it->second, err(), k);
    }
    std::string str(const std::string& k, const std::string& def) const {
        auto it = e.params.find(k);
        return it == e.params.end() ? def : it->second;
    }
};

/// Weight block of an experiment: [weight] defaults overridden by weight.kind / weight.alpha.
inline WeightConfig experiment_weight(const RunConfig& cfg, const ExperimentConfig& e) {
    WeightConfig w = cfg.weight;
    const detail::ConfigError err{cfg.source, e.line};
    for (const auto& [k, v] : e.params)
        if (k.rfind("weight.", 0) == 0) detail::apply_weight_key(w, k.substr(7), v, err);
    return w;
}

/// Grid and ball settings of an experiment; grid.* and balls.* override the run defaults.
struct ExperimentGeometry {
    std::vector<double> half_widths;
    std::vector<int> points;
    std::vector<double> radii;
    int ball_stride = 2;
    bool own_grid = false;
};

inline ExperimentGeometry experiment_geometry(const RunConfig& cfg, const ExperimentConfig& e) {
    ExperimentGeometry g{cfg.half_widths, cfg.points, cfg.radii, cfg.ball_stride, false};
    const detail::ConfigError err{cfg.source, e.line};
    for (const auto& [k, v] : e.params) {
        if (k == "grid.half_widths") {
            g.half_widths.clear();
            for (const auto& x : detail::split_list(v)) g.half_widths.push_back(detail::parse_double(x, err, k));
            g.own_grid = true;
        } else if (k == "grid.points") {
            g.points.clear();
            for (const auto& x : detail::split_list(v)) g.points.push_back(static_cast<int>(detail::parse_int(x, err, k)));
            g.own_grid = true;
        } else if (k == "balls.radii") {
            g.radii.clear();
            for (const auto& x : detail::split_list(v)) g.radii.push_back(detail::parse_double(x, err, k));
        } else if (k == "balls.stride") {
            g.ball_stride = static_cast<int>(detail::parse_int(v, err, k));
        }
    }
    return g;
}

inline FamilyParams experiment_family(const RunConfig& cfg, const ExperimentConfig& e) {
    FamilyParams f = cfg.family;
    f.seed = cfg.seed;
    const detail::ConfigError err{cfg.source, e.line};
    for (const auto& [k, v] : e.params)
        if (k.rfind("family.", 0) == 0) detail::apply_family_key(f, k.substr(7), v, err);
    return f;
}

/**
 * Checks every parameter relation the inequalities need before anything is computed.
 * Messages quote the violated relation and the offending section line.
 */
inline void validate_config(const RunConfig& cfg) {
    auto fail = [&](int line, const std::string& msg) {
        throw InvalidArgument(cfg.source + ":" + std::to_string(line) + ": " + msg);
    };
    GroupSpec spec;
    try {
        spec = cfg.spec();
    } catch (const InvalidArgument& e) {
        fail(0, std::string("[group] ") + e.what());
    }
    auto check_geometry = [&](int line, const std::vector<double>& hw, const std::vector<int>& pts,
                              const std::vector<double>& radii, int stride) {
        if (hw.size() != static_cast<std::size_t>(spec.n) || pts.size() != static_cast<std::size_t>(spec.n))
            fail(line, "[grid] half_widths and points need one entry per axis (n=" + std::to_string(spec.n) + ")");
        std::size_t dof = 1;
        for (std::size_t a = 0; a < pts.size(); ++a) {
            if (!(hw[a] > 0.0)) fail(line, "[grid] half widths must be positive");
            if (pts[a] < 5 || pts[a] % 2 == 0) fail(line, "[grid] points per axis must be odd and >= 5");
            dof *= static_cast<std::size_t>(pts[a]);
        }
        if (dof > cfg.dof_cap)
            fail(line, "[grid] " + std::to_string(dof) + " dof exceeds dof_cap " + std::to_string(cfg.dof_cap));
        if (radii.empty()) fail(line, "[balls] need at least one radius");
        for (double r : radii)
            if (!(r > 0.0)) fail(line, "[balls] radii must be positive");
        if (stride < 1) fail(line, "[balls] stride must be >= 1");
    };
    check_geometry(0, cfg.half_widths, cfg.points, cfg.radii, cfg.ball_stride);
    if (!(cfg.t_min > 0.0 && cfg.t_max > cfg.t_min) || cfg.t_points < 8) fail(0, "[tgrid] need 0 < min < max, points >= 8");
    if (!(cfg.besov_min > 0.0 && cfg.besov_max > cfg.besov_min) || cfg.besov_points < 2)
        fail(0, "[besov] need 0 < min < max, points >= 2");
    if (std::log10(cfg.besov_max / cfg.besov_min) < 6.0 - 1e-9) fail(0, "[besov] t grid must span >= 6 decades");
    if (cfg.experiments.empty()) fail(0, "no [experiment <id>] sections");

    const int n_hom = spec.homogeneous_dimension();
    auto check_weight = [&](const ExperimentConfig& e, double p_class) {
        const WeightConfig w = experiment_weight(cfg, e);
        if (w.kind == "unit") return;
        if (w.kind != "power") fail(e.line, "weight kind must be 'unit' or 'power', got '" + w.kind + "'");
        if (!(w.alpha > -n_hom))
            fail(e.line, "power weight needs α > −N (α=" + format_double(w.alpha) + ", N=" + std::to_string(n_hom) + ")");
        if (p_class == 1.0 && w.alpha > 0.0)
            fail(e.line, "experiment '" + e.id + "' needs an A₁ weight: −N < α ≤ 0 (α=" + format_double(w.alpha) + ")");
        if (p_class > 1.0 && !(w.alpha < n_hom * (p_class - 1.0)))
            fail(e.line, "experiment '" + e.id + "' needs an A_p weight: −N < α < N(p−1) (α=" + format_double(w.alpha) +
                             ", p=" + format_double(p_class) + ")");
    };
    auto check_family = [&](const ExperimentConfig& e) {
        const FamilyParams f = experiment_family(cfg, e);
        const auto& kinds = family_kinds();
        if (std::find(kinds.begin(), kinds.end(), f.kind) == kinds.end())
            fail(e.line, "unknown family kind '" + f.kind + "'");
        if (f.count < 0) fail(e.line, "family count must be >= 0");
        if (f.chain_links < 0 || f.chain_links > 3) fail(e.line, "family chain_links must be in [0, 3]");
    };

    for (const auto& e : cfg.experiments) {
        const ExperimentParams P{e, cfg.source};
        const auto& cat = experiment_catalog();
        auto it = std::find_if(cat.begin(), cat.end(), [&](const ExperimentInfo& i) { return i.kind == e.kind; });
        if (e.kind.empty()) fail(e.line, "experiment '" + e.id + "' has no kind");
        if (it == cat.end()) fail(e.line, "unknown experiment kind '" + e.kind + "' (see list-experiments)");
        for (const auto& [k, v] : e.params) {
            if (k.rfind("weight.", 0) == 0 || k.rfind("family.", 0) == 0) continue;
            if (std::find(it->params.begin(), it->params.end(), k) == it->params.end())
                fail(e.line, "experiment '" + e.id + "': unknown parameter '" + k + "'");
        }
        if (e.kind == "poincare") {
            const double s = P.num("s", 0.0);
            if (!(s >= 0.0 && s < 1.0)) fail(e.line, "poincare needs s ∈ [0,1) (s=" + format_double(s) + ")");
            check_weight(e, 1.0);
            check_family(e);
        } else if (e.kind == "strong") {
            const double q = P.num("q", 2.0);
            if (!(q > 1.0 && std::isfinite(q))) fail(e.line, "strong needs q ∈ (1,∞) (q=" + format_double(q) + ")");
            check_weight(e, 1.0);
            check_family(e);
        } else if (e.kind == "weak") {
            const double q = P.num("q", 2.0), s = P.num("s", 0.25);
            if (!(q > 1.0 && std::isfinite(q))) fail(e.line, "weak needs q ∈ (1,∞) (q=" + format_double(q) + ")");
            if (!(s > 0.0 && s < 1.0 / q))
                fail(e.line, "weak needs s ∈ (0,1/q) (s=" + format_double(s) + ", q=" + format_double(q) + ")");
            check_weight(e, 1.0);
            check_family(e);
        } else if (e.kind == "glr" || e.kind == "pointwise") {
            const double p = P.num("p", 2.0), q = P.num("q", 4.0), s1 = P.num("s1", 1.0), s = P.num("s", 0.0);
            if (!(p > 1.0 && p < q && std::isfinite(q)))
                fail(e.line, e.kind + " needs 1 < p < q < ∞ (p=" + format_double(p) + ", q=" + format_double(q) + ")");
            const double theta = p / q;
            const double beta = (theta * s1 - s) / (1.0 - theta);
            if (!(beta > 0.0))
                fail(e.line, e.kind + " needs s = θs₁ − (1−θ)β with β > 0, i.e. s < θs₁ (θ=" + format_double(theta) + ")");
            if (!(-beta < s && s < s1)) fail(e.line, e.kind + " needs −β < s < s₁");
            if (e.kind == "glr") check_weight(e, p);
            check_family(e);
        } else if (e.kind == "lp-approximation") {
            if (P.integer("j_max", 8) < 3) fail(e.line, "lp-approximation needs j_max ≥ 3");
            const double q = P.num("q", 2.0);
            if (!(q > 1.0 && std::isfinite(q))) fail(e.line, "lp-approximation needs q ∈ (1,∞)");
            check_weight(e, 1.0);
            check_family(e);
        } else if (e.kind == "weights") {
            const double p = P.num("p", 1.0);
            if (!(p >= 1.0)) fail(e.line, "weights needs p ≥ 1 (p=" + format_double(p) + ")");
            const std::string ex = P.str("expect", "stable");
            if (ex != "stable" && ex != "unstable" && ex != "one")
                fail(e.line, "weights expect must be stable, unstable or one");
            const WeightConfig w = experiment_weight(cfg, e);
            if (w.kind != "unit" && w.kind != "power")
                fail(e.line, "weight kind must be 'unit' or 'power', got '" + w.kind + "'");
            if (w.kind == "power" && !(w.alpha > -n_hom))
                fail(e.line, "power weight needs α > −N (α=" + format_double(w.alpha) + ")");
            const ExperimentGeometry geo = experiment_geometry(cfg, e);
            check_geometry(e.line, geo.half_widths, geo.points, geo.radii, geo.ball_stride);
        } else if (e.kind == "maximal") {
            check_family(e);
        } else if (e.kind == "threshold") {
            if (!(P.num("alpha", 0.1) > 0.0)) fail(e.line, "threshold needs α > 0");
            if (!(P.num("M", 12.0) > 10.0)) fail(e.line, "threshold needs M > 10");
            if (P.integer("samples", 1000) < 1 || P.integer("ramps", 8) < 1)
                fail(e.line, "threshold needs samples ≥ 1 and ramps ≥ 1");
        } else if (e.kind == "heat") {
            if (!(P.num("t", 0.5) > 0.0) || !(P.num("s", 0.25) > 0.0) || !(P.num("scale_t", 0.25) > 0.0))
                fail(e.line, "heat needs t > 0, s > 0 and scale_t > 0");
            check_family(e);
        }
    }
}

}  // namespace stratlab
