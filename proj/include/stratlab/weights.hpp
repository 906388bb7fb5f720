#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "stratlab/calculus.hpp"
#include "stratlab/errors.hpp"
#include "stratlab/format.hpp"
#include "stratlab/grid.hpp"

namespace stratlab {

/**
 * `values` are point samples (maximal functions, A_p estimates);
 * `quadrature`, when set, is the density used in weighted integrals.
 */
struct Weight {
    GridFunction values;
    std::string label;
    std::optional<double> declared_p;  // claimed A_p class
    std::optional<double> estimated_constant;
    std::optional<GridFunction> quadrature;

    const Grid& grid() const { return values.grid(); }
    const GridFunction& density() const { return quadrature ? *quadrature : values; }
};

inline Weight unit_weight(const GridPtr& grid) {
    Weight w{GridFunction(grid, Eigen::VectorXd::Ones(static_cast<Eigen::Index>(grid->dof()))), "unit", 1.0, {}, {}};
    return w;
}

/// Origin value used when a power weight is integrated.
enum class OriginRule {
    CellAverage,  // mean of rho^alpha over the origin cell (16^n midpoint samples)
    HalfSpacing,  // same as the point sample max(rho, h_min / 2)^alpha
};

/// Mean of rho^alpha over the grid cell centred at the origin; finite for alpha > -N.
inline double origin_cell_average(const Grid& grid, double alpha, int k = 16) {
    const int n = grid.dim();
    std::vector<int> idx(static_cast<std::size_t>(n), 0);
    GroupPoint p(static_cast<std::size_t>(n));
    double acc = 0.0;
    std::size_t count = 0;
    while (true) {
        for (int a = 0; a < n; ++a) p[a] = ((idx[a] + 0.5) / k - 0.5) * grid.spacing()[a];
        acc += std::pow(gauge(grid.spec(), p), alpha);
        ++count;
        int a = n - 1;
        while (a >= 0 && ++idx[a] == k) idx[a--] = 0;
        if (a < 0) break;
    }
    return acc / static_cast<double>(count);
}

/**
 * Point samples max(rho, h_min/2)^alpha; integrable iff alpha > -N.
 * With CellAverage the integration density replaces the origin node by the
 * cell mean of rho^alpha, which keeps Riemann sums of singular weights
 * consistent across scales.
 */
inline Weight power_weight(const GridPtr& grid, double alpha, OriginRule rule = OriginRule::CellAverage) {
    const int n_hom = grid->spec().homogeneous_dimension();
    if (!(alpha > -n_hom))
        throw InvalidArgument("power_weight: need α > −N (alpha=" + format_double(alpha) +
                              ", N=" + std::to_string(n_hom) + ")");
    const double eps = grid->min_spacing() / 2.0;
    auto v = GridFunction::sample(grid, [&](const GroupPoint& p) {
        return std::pow(std::max(gauge(grid->spec(), p), eps), alpha);
    });
    std::optional<GridFunction> quad;
    if (rule == OriginRule::CellAverage && alpha != 0.0) {
        quad = v;
        quad->values()[static_cast<Eigen::Index>(grid->origin_node())] = origin_cell_average(*grid, alpha);
    }
    Weight w{std::move(v), "rho^" + format_double(alpha), {}, {}, std::move(quad)};
    // -N < alpha <= 0 is A_1; -N < alpha < N(p-1) is A_p.
    if (alpha <= 0.0) w.declared_p = 1.0;
    else w.declared_p = 1.0 + alpha / n_hom + 1e-9;
    return w;
}

inline Weight make_weight(GridFunction values, std::string label = "custom") {
    if (values.values().size() && values.values().minCoeff() <= 0.0)
        throw InvalidArgument("weight values must be strictly positive");
    return Weight{std::move(values), std::move(label), {}, {}, {}};
}

/**
 * Finite surrogate of "all balls": gauge balls B(c, r) with centres on a
 * coarsened lattice (every `stride`-th node per axis, origin included) and
 * the given radii. Membership lists are precomputed; averages use the
 * in-box node count, so truncated balls near the boundary stay unbiased.
 */
class BallFamily {
public:
    struct Ball {
        std::size_t center;
        double radius;
        std::vector<std::uint32_t> members;
    };

    BallFamily(GridPtr grid, std::vector<double> radii, int stride = 2) : grid_(std::move(grid)), radii_(std::move(radii)) {
        if (radii_.empty()) throw InvalidArgument("ball family: need at least one radius");
        if (stride < 1) throw InvalidArgument("ball family: stride must be >= 1");
        for (double r : radii_)
            if (!(r > 0.0)) throw InvalidArgument("ball family: radii must be positive");
        const Grid& g = *grid_;
        const GroupSpec& spec = g.spec();
        const int n = g.dim();
        const int d = spec.max_exponent();
        std::vector<std::vector<double>> pts(g.dof(), std::vector<double>(static_cast<std::size_t>(n)));
        for (std::size_t k = 0; k < g.dof(); ++k) g.point(k, pts[k]);
        std::vector<double> cinv(static_cast<std::size_t>(n)), z(static_cast<std::size_t>(n));

        for (std::size_t c = 0; c < g.dof(); ++c) {
            bool on_lattice = true;
            for (int a = 0; a < n; ++a)
                if ((g.index_along(c, a) - g.points()[a] / 2) % stride != 0) on_lattice = false;
            if (!on_lattice) continue;
            detail::inverse_into(spec, pts[c], cinv);
            for (double r : radii_) {
                Ball b{c, r, {}};
                const double r2d = std::pow(r, 2.0 * d);
                for (std::size_t y = 0; y < g.dof(); ++y) {
                    bool near = true;
                    for (int a = 0; a < n && near; ++a)
                        if (spec.exponents[a] == 1 && std::abs(pts[y][a] - pts[c][a]) >= r) near = false;
                    if (!near) continue;
                    detail::multiply_into(spec, cinv, pts[y], z);
                    if (gauge_power(spec, z, d) < r2d) b.members.push_back(static_cast<std::uint32_t>(y));
                }
                balls_.push_back(std::move(b));
            }
        }
    }

    /// Radii 2^k h_min for k = 0..levels-1.
    static BallFamily dyadic(GridPtr grid, int levels = 4, int stride = 2) {
        std::vector<double> radii;
        for (int k = 0; k < levels; ++k) radii.push_back(std::ldexp(grid->min_spacing(), k));
        return BallFamily(std::move(grid), std::move(radii), stride);
    }

    const Grid& grid() const { return *grid_; }
    const std::vector<Ball>& balls() const { return balls_; }
    const std::vector<double>& radii() const { return radii_; }
    bool empty() const { return balls_.empty(); }

    double average(const Ball& b, const Eigen::VectorXd& v) const {
        double acc = 0.0;
        for (auto y : b.members) acc += v[y];
        return acc / static_cast<double>(b.members.size());
    }

private:
    // rho^(2d) without the final root.
    static double gauge_power(const GroupSpec& g, std::span<const double> x, int d) {
        double horizontal = 0.0, vertical = 0.0;
        for (int i = 0; i < g.n; ++i) {
            if (g.exponents[i] == 1) horizontal += x[i] * x[i];
            else vertical += std::pow(std::abs(x[i]), 2.0 * d / g.exponents[i]);
        }
        return std::pow(horizontal, d) + g.gauge_coeff * vertical;
    }

    GridPtr grid_;
    std::vector<double> radii_;
    std::vector<Ball> balls_;
};

namespace detail {

// Max of ball averages of v over the balls of radius r (all radii if r < 0) containing each node.
inline Eigen::VectorXd maximal_values(const BallFamily& fam, const Eigen::VectorXd& v, double r = -1.0) {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(v.size());
    for (const auto& b : fam.balls()) {
        if (r > 0.0 && b.radius != r) continue;
        if (b.members.empty()) continue;
        const double avg = fam.average(b, v);
        for (auto y : b.members) out[y] = std::max(out[y], avg);
    }
    return out;
}

}  // namespace detail

/// M_B f(x) = max over family balls containing x of the average of |f|.
inline GridFunction hl_maximal(const GridFunction& f, const BallFamily& fam) {
    if (fam.empty()) throw InvalidArgument("hl_maximal: empty ball family");
    if (!(f.grid() == fam.grid())) throw InvalidArgument("hl_maximal: ball family built on a different grid");
    return GridFunction(f.grid_ptr(), detail::maximal_values(fam, f.values().cwiseAbs()));
}

/**
 * M_phi f(x) = max over t in t_grid of |f * phi_t(x)|, where
 * phi_t(x) = t^(-N/2) phi(dilate(t^(-1/2), x)) is resampled from the grid
 * samples of phi.
 */
inline GridFunction phi_maximal(const GridFunction& f, const GridFunction& phi, const std::vector<double>& t_grid) {
    if (!(f.grid() == phi.grid())) throw InvalidArgument("phi_maximal: kernel lives on a different grid");
    if (t_grid.empty()) throw InvalidArgument("phi_maximal: empty t grid");
    const GroupSpec& spec = f.grid().spec();
    const int n = spec.n;
    Eigen::VectorXd out = Eigen::VectorXd::Zero(f.values().size());
    std::vector<double> scaled(static_cast<std::size_t>(n));
    for (double t : t_grid) {
        if (!(t > 0.0)) throw InvalidArgument("phi_maximal: t values must be positive");
        const double amp = std::pow(t, -spec.homogeneous_dimension() / 2.0);
        std::vector<double> scale(static_cast<std::size_t>(n));
        for (int a = 0; a < n; ++a) scale[a] = std::pow(t, -0.5 * spec.exponents[a]);
        GridFunction conv = convolve_with(f, [&](std::span<const double> z) {
            for (int a = 0; a < n; ++a) scaled[a] = z[a] * scale[a];
            return amp * interpolate(phi, scaled);
        });
        out = out.cwiseMax(conv.values().cwiseAbs());
    }
    return GridFunction(f.grid_ptr(), std::move(out));
}

struct RadiusValue {
    double radius;
    double value;
};

/**
 * A_p expression per radius. For p > 1: max over balls of radius r of
 * avg(w) * avg(w^(-1/(p-1)))^(p-1). For p = 1: max over nodes x of
 * M_r w(x) / w(x), with M_r the maximal function restricted to radius r.
 */
inline std::vector<RadiusValue> muckenhoupt_profile(const Weight& w, double p, const BallFamily& fam) {
    if (!(p >= 1.0)) throw InvalidArgument("muckenhoupt: need p >= 1");
    if (fam.empty()) throw InvalidArgument("muckenhoupt: empty ball family");
    const Eigen::VectorXd& v = w.values.values();
    if (v.minCoeff() <= 0.0) throw InvalidArgument("muckenhoupt: weight must be strictly positive");
    std::vector<RadiusValue> out;
    if (p == 1.0) {
        for (double r : fam.radii()) {
            const Eigen::VectorXd m = detail::maximal_values(fam, v, r);
            double best = 0.0;
            for (Eigen::Index k = 0; k < v.size(); ++k)
                if (m[k] > 0.0) best = std::max(best, m[k] / v[k]);
            out.push_back({r, best});
        }
        return out;
    }
    const Eigen::VectorXd dual = v.array().pow(-1.0 / (p - 1.0));
    for (double r : fam.radii()) {
        double best = 0.0;
        for (const auto& b : fam.balls()) {
            if (b.radius != r || b.members.empty()) continue;
            best = std::max(best, fam.average(b, v) * std::pow(fam.average(b, dual), p - 1.0));
        }
        out.push_back({r, best});
    }
    return out;
}

inline double muckenhoupt_constant(const Weight& w, double p, const BallFamily& fam) {
    double best = 0.0;
    for (const auto& rv : muckenhoupt_profile(w, p, fam)) best = std::max(best, rv.value);
    return best;
}

struct StabilityVerdict {
    double total_growth = 1.0;        // max / min over the radii
    double mean_growth_per_doubling = 1.0;  // geometric mean of consecutive ratios, per factor 2 in r
    bool stable = false;               // total_growth < 2
    bool growing = false;              // monotone, and mean growth per doubling >= 2
};

inline StabilityVerdict assess_profile(const std::vector<RadiusValue>& prof) {
    StabilityVerdict v;
    if (prof.empty()) return v;
    double lo = prof.front().value, hi = lo;
    bool monotone = true;
    for (std::size_t i = 1; i < prof.size(); ++i) {
        lo = std::min(lo, prof[i].value);
        hi = std::max(hi, prof[i].value);
        if (prof[i].value < prof[i - 1].value) monotone = false;
    }
    v.total_growth = hi / lo;
    if (prof.size() > 1) {
        const double doublings = std::log2(prof.back().radius / prof.front().radius);
        v.mean_growth_per_doubling = std::pow(prof.back().value / prof.front().value, 1.0 / doublings);
    }
    v.stable = v.total_growth < 2.0;
    v.growing = monotone && prof.size() > 1 && v.mean_growth_per_doubling >= 2.0;
    return v;
}

}  // namespace stratlab
