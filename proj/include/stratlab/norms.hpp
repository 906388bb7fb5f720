#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "stratlab/calculus.hpp"
#include "stratlab/cutoffs.hpp"
#include "stratlab/errors.hpp"
#include "stratlab/spectral.hpp"
#include "stratlab/weights.hpp"

namespace stratlab {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

namespace detail {

inline void check_weight(const GridFunction& f, const Weight* w) {
    if (w && !(f.grid() == w->grid())) throw InvalidArgument("weight lives on a different grid");
}

inline double weight_at(const Weight* w, Eigen::Index k) { return w ? w->density().values()[k] : 1.0; }

}  // namespace detail

/// (sum |f|^p w h^n)^(1/p); p = inf gives max |f| over nodes of positive weight.
inline double lebesgue_norm(const GridFunction& f, double p, const Weight* w = nullptr) {
    if (!(p >= 1.0)) throw InvalidArgument("lebesgue_norm: need p >= 1");
    detail::check_weight(f, w);
    const Eigen::VectorXd& v = f.values();
    if (std::isinf(p)) return f.max_abs();
    const double vol = f.grid().cell_volume();
    double acc = 0.0;
    for (Eigen::Index k = 0; k < v.size(); ++k) {
        const double a = std::abs(v[k]);
        if (a != 0.0) acc += (p == 1.0 ? a : std::pow(a, p)) * detail::weight_at(w, k);
    }
    return std::pow(acc * vol, 1.0 / p);
}

/// w-measure of {|f| > sigma} for each sigma in an ascending list.
inline std::vector<double> distribution_function(const GridFunction& f, const std::vector<double>& sigmas,
                                                 const Weight* w = nullptr) {
    detail::check_weight(f, w);
    const Eigen::VectorXd& v = f.values();
    std::vector<std::pair<double, double>> mass;  // (|f|, w dV)
    const double vol = f.grid().cell_volume();
    for (Eigen::Index k = 0; k < v.size(); ++k) mass.emplace_back(std::abs(v[k]), detail::weight_at(w, k) * vol);
    std::sort(mass.begin(), mass.end(), [](auto& a, auto& b) { return a.first > b.first; });
    std::vector<double> out(sigmas.size());
    std::size_t i = 0;
    double acc = 0.0;
    for (std::size_t s = sigmas.size(); s-- > 0;) {
        while (i < mass.size() && mass[i].first > sigmas[s]) acc += mass[i++].second;
        out[s] = acc;
    }
    return out;
}

/**
 * Layer-cake route ||f||_p^p = int_0^inf p sigma^(p-1) w({|f| > sigma}) dsigma,
 * trapezoid rule in log sigma over `levels` log-spaced levels. The levels
 * start at the smallest nonzero |f| (at most 8 decades below the maximum);
 * below it the distribution function is constant, so the head is exactly
 * sigma_0^p w({|f| > 0}). max|f| sits half a step below the top level:
 * with a level exactly at the maximum, the peak nodes (which dominate
 * for concentrated f) lose half of their last interval.
 */
inline double lebesgue_norm_layer_cake(const GridFunction& f, double p, const Weight* w = nullptr, int levels = 200) {
    if (!(p >= 1.0) || std::isinf(p)) throw InvalidArgument("lebesgue_norm_layer_cake: need 1 <= p < inf");
    if (levels < 2) throw InvalidArgument("lebesgue_norm_layer_cake: need at least 2 levels");
    const double top = f.max_abs();
    if (top == 0.0) return 0.0;
    double low = top;
    for (double v : f.values())
        if (v != 0.0) low = std::min(low, std::abs(v));
    const double total = distribution_function(f, {0.0}, w)[0];
    if (low == top) return top * std::pow(total, 1.0 / p);
    const double bottom = std::max(low, top * 1e-8);
    const double du = std::log(top / bottom) / (levels - 1.5);
    std::vector<double> sig(static_cast<std::size_t>(levels));
    for (int i = 0; i < levels; ++i) sig[static_cast<std::size_t>(i)] = bottom * std::exp(i * du);
    const std::vector<double> dist = distribution_function(f, sig, w);
    double acc = 0.0;
    for (int i = 0; i < levels; ++i) {
        const double wt = (i == 0 || i == levels - 1) ? 0.5 : 1.0;
        acc += wt * du * p * std::pow(sig[static_cast<std::size_t>(i)], p) * dist[static_cast<std::size_t>(i)];
    }
    acc += std::pow(bottom, p) * total;
    return std::pow(acc, 1.0 / p);
}

/**
 * sup_sigma sigma w({|f| > sigma})^(1/p). The supremum is taken exactly:
 * it is approached as sigma rises to one of the values |f(x_k)|, where the
 * level set is {|f| >= |f(x_k)|}.
 */
inline double weak_norm(const GridFunction& f, double p, const Weight* w = nullptr) {
    if (!(p >= 1.0)) throw InvalidArgument("weak_norm: need p >= 1");
    detail::check_weight(f, w);
    if (std::isinf(p)) return f.max_abs();
    const Eigen::VectorXd& v = f.values();
    const double vol = f.grid().cell_volume();
    std::vector<Eigen::Index> order(static_cast<std::size_t>(v.size()));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) { return std::abs(v[a]) > std::abs(v[b]); });
    double best = 0.0, measure = 0.0;
    for (std::size_t i = 0; i < order.size();) {
        const double level = std::abs(v[order[i]]);
        if (level == 0.0) break;
        while (i < order.size() && std::abs(v[order[i]]) == level) measure += detail::weight_at(w, order[i++]) * vol;
        best = std::max(best, level * std::pow(measure, 1.0 / p));
    }
    return best;
}

/// ||J^(s/2) f||_{L^p(w)} (or the weak norm); (s, p) = (1, 1) is ||grad f||_{L^1(w)}.
inline double sobolev_norm(const SpectralDecomposition& dec, const GridFunction& f, double s, double p,
                           const Weight* w = nullptr, bool weak = false) {
    if (s == 1.0 && p == 1.0 && !weak) return integrate(gradient_length(f), w ? &w->density() : nullptr);
    if (s == 0.0) return weak ? weak_norm(f, p, w) : lebesgue_norm(f, p, w);
    if (!(p > 1.0 && p < kInf))
        throw InvalidArgument("sobolev_norm: fractional route needs 1 < p < inf (or s = p = 1 for the gradient)");
    const GridFunction g = fractional_power(dec, f, s);
    return weak ? weak_norm(g, p, w) : lebesgue_norm(g, p, w);
}

/// Log-spaced grid of `points` values in [lo, hi].
inline std::vector<double> log_grid(double lo, double hi, int points) {
    if (!(lo > 0.0 && hi > lo) || points < 2) throw InvalidArgument("log_grid: need 0 < lo < hi and points >= 2");
    std::vector<double> t(static_cast<std::size_t>(points));
    const double step = std::log(hi / lo) / (points - 1);
    for (int i = 0; i < points; ++i) t[static_cast<std::size_t>(i)] = lo * std::exp(i * step);
    t.back() = hi;
    return t;
}

inline std::vector<double> default_besov_t_grid() { return log_grid(1e-4, 1e2, 121); }

struct BesovResult {
    double value = 0.0;
    double argmax_t = 0.0;
    bool boundary_sup = false;  // supremum attained at an end of the t grid
};

/// sup_t t^(beta/2) ||H_t f||_inf over the t grid.
inline BesovResult besov_negative_norm(const SpectralDecomposition& dec, const GridFunction& f, double beta,
                                       const std::vector<double>& t_grid = default_besov_t_grid()) {
    if (!(beta > 0.0)) throw InvalidArgument("besov_negative_norm: need beta > 0");
    if (t_grid.size() < 2) throw InvalidArgument("besov_negative_norm: t grid needs at least 2 points");
    BesovResult r;
    if (f.max_abs() == 0.0) return r;
    const Eigen::MatrixXd h = heat_many(dec, f, t_grid);
    std::size_t arg = 0;
    for (std::size_t i = 0; i < t_grid.size(); ++i) {
        const double v = std::pow(t_grid[i], beta / 2.0) * h.col(static_cast<Eigen::Index>(i)).cwiseAbs().maxCoeff();
        if (v > r.value) {
            r.value = v;
            arg = i;
        }
    }
    r.argmax_t = t_grid[arg];
    r.boundary_sup = arg == 0 || arg + 1 == t_grid.size();
    return r;
}

/**
 * [int t^((m - s/2) q) ||d^m/dt^m H_t f||_{L^p(w)}^q dt/t]^(1/q) with the
 * t-derivative realized as the multiplier (-lambda)^m e^(-t lambda); the
 * integral is the trapezoid rule in log t over the grid.
 */
inline double besov_general_norm(const SpectralDecomposition& dec, const GridFunction& f, double s, double p, double q,
                                 int m_order, const std::vector<double>& t_grid, const Weight* w = nullptr) {
    if (!(m_order > s / 2.0)) throw InvalidArgument("besov_general_norm: need m > s/2");
    if (!(q >= 1.0 && q < kInf)) throw InvalidArgument("besov_general_norm: need 1 <= q < inf");
    if (t_grid.size() < 2) throw InvalidArgument("besov_general_norm: t grid needs at least 2 points");
    // (t lambda)^m e^(-t lambda) (-1)^m at scale t equals t^m d^m/dt^m H_t.
    const Multiplier mt{"dt_heat", [m_order](double l) { return std::pow(-l, m_order) * std::exp(-l); }};
    const Eigen::MatrixXd cols = apply_multiplier_many(dec, mt, t_grid, f);
    std::vector<double> integrand(t_grid.size());
    for (std::size_t i = 0; i < t_grid.size(); ++i) {
        const GridFunction g(f.grid_ptr(), cols.col(static_cast<Eigen::Index>(i)));
        integrand[i] = std::pow(t_grid[i], -s * q / 2.0) * std::pow(lebesgue_norm(g, p, w), q);
    }
    double acc = 0.0;
    for (std::size_t i = 1; i < t_grid.size(); ++i)
        acc += 0.5 * (integrand[i] + integrand[i - 1]) * std::log(t_grid[i] / t_grid[i - 1]);
    return std::pow(acc, 1.0 / q);
}

}  // namespace stratlab
