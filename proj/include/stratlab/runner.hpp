#pragma once

#include <filesystem>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "stratlab/config.hpp"
#include "stratlab/lab.hpp"
#include "stratlab/report.hpp"
#include "stratlab/spectral.hpp"

namespace stratlab {

struct RunOptions {
    std::optional<std::filesystem::path> output_dir;  // overrides [run] output_dir
    std::optional<std::filesystem::path> cache_dir;   // defaults to default_cache_dir()
    bool use_cache = true;
    std::ostream* log = nullptr;
};

struct RunResult {
    std::vector<ExperimentReport> reports;
    std::vector<ReportFiles> files;
    bool all_pass() const {
        return std::all_of(reports.begin(), reports.end(), [](const ExperimentReport& r) { return r.pass(); });
    }
};

namespace detail {

inline bool needs_decomposition(const std::string& kind) {
    return kind != "weights" && kind != "threshold";
}

inline std::optional<Weight> build_weight(const WeightConfig& wc, const GridPtr& grid) {
    if (wc.kind == "unit") return std::nullopt;
    return power_weight(grid, wc.alpha);
}

}  // namespace detail

/// Runs one experiment section; `dec` may be null for kinds that do not need it.
inline ExperimentReport run_experiment(const RunConfig& cfg, const ExperimentConfig& e, const GridPtr& grid,
                                       const SpectralDecomposition* dec) {
    const ExperimentParams P{e, cfg.source};
    const std::optional<Weight> w = detail::build_weight(experiment_weight(cfg, e), grid);
    const Weight* wp = w ? &*w : nullptr;
    const FamilyParams fp = experiment_family(cfg, e);
    const auto besov = log_grid(cfg.besov_min, cfg.besov_max, cfg.besov_points);
    auto family = [&] { return generate_family(fp, grid, dec); };
    auto balls_on = [&](const GridPtr& g) {
        const ExperimentGeometry geo = experiment_geometry(cfg, e);
        return BallFamily(g, geo.radii, geo.ball_stride);
    };

    ExperimentReport rep;
    if (e.kind == "poincare") {
        rep = poincare_experiment(*dec, family(), wp, P.num("s", 0.0), log_grid(cfg.t_min, cfg.t_max, cfg.t_points));
    } else if (e.kind == "strong") {
        rep = strong_sobolev_experiment(*dec, family(), wp, P.num("q", 2.0), besov);
    } else if (e.kind == "weak") {
        rep = weak_sobolev_experiment(*dec, family(), wp, P.num("q", 2.0), P.num("s", 0.25), besov);
    } else if (e.kind == "glr") {
        rep = glr_experiment(*dec, family(), wp, P.num("p", 2.0), P.num("q", 4.0), P.num("s1", 1.0), P.num("s", 0.0),
                             besov);
    } else if (e.kind == "pointwise") {
        rep = pointwise_interpolation_check(*dec, family(), balls_on(grid), P.num("p", 2.0), P.num("q", 4.0),
                                            P.num("s1", 1.0), P.num("s", 0.0), besov);
    } else if (e.kind == "lp-approximation") {
        const auto fam = family();
        const long long m = P.integer("member", 0);
        if (m < 0 || m >= static_cast<long long>(fam.size()))
            throw InvalidArgument(cfg.source + ":" + std::to_string(e.line) + ": member index " + std::to_string(m) +
                                  " outside the family of " + std::to_string(fam.size()));
        rep = lp_approximation_check(*dec, fam[static_cast<std::size_t>(m)].f, static_cast<int>(P.integer("j_max", 8)),
                                     P.num("q", 2.0), wp);
        rep.param("member", fam[static_cast<std::size_t>(m)].id);
    } else if (e.kind == "weights") {
        const ExperimentGeometry geo = experiment_geometry(cfg, e);
        GridPtr g = grid;
        if (geo.own_grid) g = make_grid(cfg.spec(), geo.half_widths, geo.points, cfg.dof_cap);
        const WeightConfig wc = experiment_weight(cfg, e);
        const Weight weight = wc.kind == "unit" ? unit_weight(g) : power_weight(g, wc.alpha);
        rep = weights_experiment(weight, P.num("p", 1.0), BallFamily(g, geo.radii, geo.ball_stride),
                                 P.str("expect", "stable"));
        rep.param("grid", g->descriptor_line());
    } else if (e.kind == "maximal") {
        const ExperimentGeometry geo = experiment_geometry(cfg, e);
        const auto [lo, hi] = std::minmax_element(geo.radii.begin(), geo.radii.end());
        const double t_lo = (*lo) * (*lo), t_hi = (*hi) * (*hi);
        const auto tg = t_hi > t_lo ? log_grid(t_lo, t_hi, 25) : std::vector<double>{t_lo};
        rep = maximal_comparison(*dec, family(), balls_on(grid), tg);
    } else if (e.kind == "threshold") {
        rep = threshold_experiment(grid, P.num("alpha", 0.1), P.num("M", 12.0), static_cast<int>(P.integer("samples", 1000)),
                                   cfg.seed, static_cast<int>(P.integer("ramps", 8)));
    } else if (e.kind == "heat") {
        rep = heat_suite(*dec, family(), P.num("t", 0.5), P.num("s", 0.25), P.num("scale_t", 0.25));
    } else {
        throw InvalidArgument("unknown experiment kind '" + e.kind + "'");
    }
    rep.id = e.id;
    if (e.kind != "weights" && e.kind != "threshold") rep.param("family", fp.kind);
    return rep;
}

/**
 * Validates the whole config first, then builds the grid, decomposes it
 * once if any experiment needs the spectral calculus, and runs the
 * experiments in file order, writing <id>.csv and <id>.summary.json.
 */
inline RunResult run(const RunConfig& cfg, const RunOptions& opt = {}) {
    validate_config(cfg);
    const GridPtr grid = make_grid(cfg.spec(), cfg.half_widths, cfg.points, cfg.dof_cap);
    const std::filesystem::path out_dir = opt.output_dir ? *opt.output_dir : std::filesystem::path(cfg.output_dir);
    const bool cache = opt.use_cache && cfg.cache;
    const std::filesystem::path cache_dir = opt.cache_dir ? *opt.cache_dir : default_cache_dir();

    DecompositionPtr dec;
    for (const auto& e : cfg.experiments) {
        if (!detail::needs_decomposition(e.kind)) continue;
        if (opt.log) *opt.log << "decomposing " << grid->descriptor_line() << " (" << grid->dof() << " dof)\n";
        Stopwatch sw;
        dec = decompose_grid(grid, cache, cache_dir);
        if (opt.log) *opt.log << "decomposition ready in " << format_double(sw.seconds()) << " s\n";
        break;
    }

    RunResult res;
    for (const auto& e : cfg.experiments) {
        ExperimentReport rep = run_experiment(cfg, e, grid, dec.get());
        res.files.push_back(emit_report(rep, out_dir));
        if (opt.log)
            *opt.log << "[" << rep.id << "] " << rep.kind << " " << (rep.pass() ? "PASS" : "FAIL") << " (" << rep.rows.size()
                     << " rows, " << format_double(rep.runtime_seconds) << " s)\n";
        res.reports.push_back(std::move(rep));
    }
    return res;
}

}  // namespace stratlab
