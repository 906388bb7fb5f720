#pragma once

#include <Eigen/Core>
#include <lapacke.h>

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "stratlab/calculus.hpp"
#include "stratlab/cutoffs.hpp"
#include "stratlab/errors.hpp"
#include "stratlab/grid.hpp"

namespace stratlab {

inline constexpr std::size_t kDenseEigenCap = 14000;
inline constexpr double kEigenClamp = 1e-10;
inline constexpr double kNullThreshold = 1e-12;

/**
 * D = Q diag(lambda) Q^T for the discrete sub-Laplacian. Eigenvalues are
 * sorted ascending and clamped to zero in [-1e-10, 0). Every multiplier
 * m(tD) is evaluated as Q m(t lambda) Q^T.
 */
class SpectralDecomposition {
public:
    SpectralDecomposition(GridPtr grid, Eigen::VectorXd eigenvalues, Eigen::MatrixXd vectors)
        : grid_(std::move(grid)), eigenvalues_(std::move(eigenvalues)), vectors_(std::move(vectors)) {}

    const Grid& grid() const { return *grid_; }
    const GridPtr& grid_ptr() const { return grid_; }
    const Eigen::VectorXd& eigenvalues() const { return eigenvalues_; }
    const Eigen::MatrixXd& vectors() const { return vectors_; }
    Eigen::Index size() const { return eigenvalues_.size(); }

    Eigen::VectorXd coefficients(const Eigen::VectorXd& f) const { return vectors_.transpose() * f; }
    Eigen::VectorXd synthesize(const Eigen::VectorXd& c) const { return vectors_ * c; }

    GridFunction eigenvector(Eigen::Index k) const { return GridFunction(grid_, vectors_.col(k)); }

    double smallest_positive(double threshold = kNullThreshold) const {
        for (Eigen::Index k = 0; k < size(); ++k)
            if (eigenvalues_[k] >= threshold) return eigenvalues_[k];
        return std::numeric_limits<double>::infinity();
    }
    double largest() const { return size() ? eigenvalues_[size() - 1] : 0.0; }

    /// max |Q^T Q - I|
    double orthogonality_error() const {
        Eigen::MatrixXd g = vectors_.transpose() * vectors_;
        g.diagonal().array() -= 1.0;
        return g.cwiseAbs().maxCoeff();
    }

    /// max |D Q - Q Lambda|
    double residual(const LinearOperator& op) const {
        Eigen::MatrixXd r = op.matrix * vectors_;
        r -= vectors_ * eigenvalues_.asDiagonal();
        return r.cwiseAbs().maxCoeff();
    }

private:
    GridPtr grid_;
    Eigen::VectorXd eigenvalues_;
    Eigen::MatrixXd vectors_;
};

using DecompositionPtr = std::shared_ptr<const SpectralDecomposition>;

inline SpectralDecomposition eigendecompose(const GridPtr& grid, const LinearOperator& op,
                                            std::size_t cap = kDenseEigenCap) {
    const Eigen::Index n = op.size();
    if (op.matrix.rows() != op.matrix.cols()) throw InvalidArgument("eigendecompose: operator is not square");
    if (static_cast<std::size_t>(n) != grid->dof())
        throw InvalidArgument("eigendecompose: operator size does not match the grid");
    if (static_cast<std::size_t>(n) > cap)
        throw ResourceError("eigendecompose: " + std::to_string(n) + " dof exceeds the dense cap of " +
                            std::to_string(cap) + " for grid " + grid->descriptor_line() +
                            "; use heat_stepping for grids this large");
    Eigen::MatrixXd a = Eigen::MatrixXd(op.matrix);
    const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
    if ((a - a.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
        throw InvalidArgument("eigendecompose: operator is not symmetric");
    Eigen::VectorXd w(n);
    if (n > 0) {
        const lapack_int info = LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'V', 'L', static_cast<lapack_int>(n), a.data(),
                                               static_cast<lapack_int>(n), w.data());
        if (info != 0) throw NumericError("eigendecompose: dsyevd failed with info=" + std::to_string(info));
    }
    for (Eigen::Index k = 0; k < n; ++k) {
        if (w[k] < -kEigenClamp * scale)
            throw DomainError("eigendecompose: eigenvalue " + std::to_string(w[k]) +
                              " is negative; operator is not positive semi-definite");
        if (w[k] < 0.0) w[k] = 0.0;
    }
    return SpectralDecomposition(grid, std::move(w), std::move(a));
}

namespace detail {

inline Eigen::VectorXd symbol_values(const SpectralDecomposition& dec, const Multiplier& m, double t) {
    Eigen::VectorXd v(dec.size());
    for (Eigen::Index k = 0; k < dec.size(); ++k) {
        const double lam = dec.eigenvalues()[k];
        v[k] = m(t * lam);
        if (!std::isfinite(v[k])) {
            std::ostringstream os;
            os.precision(17);
            os << "multiplier '" << m.name << "' is not finite at lambda=" << lam << " (t=" << t << ")";
            throw DomainError(os.str());
        }
    }
    return v;
}

inline void check_same_grid(const SpectralDecomposition& dec, const GridFunction& f) {
    if (!(dec.grid() == f.grid())) throw InvalidArgument("function and decomposition live on different grids");
}

}  // namespace detail

/// m(tD) f = Q m(t Lambda) Q^T f.
inline GridFunction apply_multiplier(const SpectralDecomposition& dec, const Multiplier& m, double t,
                                     const GridFunction& f) {
    detail::check_same_grid(dec, f);
    const Eigen::VectorXd sym = detail::symbol_values(dec, m, t);
    Eigen::VectorXd c = dec.coefficients(f.values());
    c.array() *= sym.array();
    return GridFunction(f.grid_ptr(), dec.synthesize(c));
}

/// Columns m(t_i D) f for every t_i, one GEMM.
inline Eigen::MatrixXd apply_multiplier_many(const SpectralDecomposition& dec, const Multiplier& m,
                                             const std::vector<double>& ts, const GridFunction& f) {
    detail::check_same_grid(dec, f);
    const Eigen::VectorXd c = dec.coefficients(f.values());
    Eigen::MatrixXd scaled(dec.size(), static_cast<Eigen::Index>(ts.size()));
    for (std::size_t i = 0; i < ts.size(); ++i)
        scaled.col(static_cast<Eigen::Index>(i)) = detail::symbol_values(dec, m, ts[i]).cwiseProduct(c);
    return dec.vectors() * scaled;
}

inline GridFunction heat(const SpectralDecomposition& dec, const GridFunction& f, double t) {
    if (t < 0.0) throw InvalidArgument("heat: t must be non-negative");
    if (t == 0.0) return f;
    return apply_multiplier(dec, heat_multiplier(), t, f);
}

inline Eigen::MatrixXd heat_many(const SpectralDecomposition& dec, const GridFunction& f,
                                 const std::vector<double>& ts) {
    for (double t : ts)
        if (t < 0.0) throw InvalidArgument("heat: t must be non-negative");
    return apply_multiplier_many(dec, heat_multiplier(), ts, f);
}

/// Component of f on eigenvalues >= threshold.
inline GridFunction positive_projection(const SpectralDecomposition& dec, const GridFunction& f,
                                        double threshold = kNullThreshold) {
    return apply_multiplier(dec, {"positive", [threshold](double l) { return l >= threshold ? 1.0 : 0.0; }}, 1.0,
                            f);
}

/**
 * J^(s/2) f through the spectral rule lambda^(s/2). For s > 0 near-null
 * components map to 0; for s < 0, f must be orthogonal to eigenvalues
 * below 1e-12 (relative residue 1e-8), otherwise DomainError.
 */
inline GridFunction fractional_power(const SpectralDecomposition& dec, const GridFunction& f, double s) {
    detail::check_same_grid(dec, f);
    if (s == 0.0) return f;
    Eigen::VectorXd c = dec.coefficients(f.values());
    if (s < 0.0) {
        double null_mass = 0.0;
        for (Eigen::Index k = 0; k < dec.size() && dec.eigenvalues()[k] < kNullThreshold; ++k)
            null_mass += c[k] * c[k];
        const double norm = c.norm();
        if (std::sqrt(null_mass) > 1e-8 * std::max(norm, 1e-300) && null_mass > 0.0)
            throw DomainError("fractional_power: negative power on a function with a near-null component");
    }
    for (Eigen::Index k = 0; k < dec.size(); ++k) {
        const double lam = dec.eigenvalues()[k];
        c[k] = lam < kNullThreshold ? 0.0 : c[k] * std::pow(lam, s / 2.0);
    }
    return GridFunction(f.grid_ptr(), dec.synthesize(c));
}

/**
 * Independent route to J^(s/2) f for 0 < s < 2 through the heat semigroup:
 *   J^(s/2) f = 1/Gamma(1 - s/2) int_0^inf t^(-s/2) J H_t f dt,
 * with J applied as the sparse operator and the t-integral done by the
 * trapezoid rule in log t. The step is halved until two successive
 * results agree to 1e-9 relative.
 */
inline GridFunction fractional_power_integral_oracle(const SpectralDecomposition& dec, const LinearOperator& op,
                                                     const GridFunction& f, double s) {
    if (!(s > 0.0 && s < 2.0)) throw InvalidArgument("fractional_power_integral_oracle: need 0 < s < 2");
    detail::check_same_grid(dec, f);
    const double e = 1.0 - s / 2.0;  // power of t after the log substitution
    const double lmax = std::max(dec.largest(), 1e-300);
    const double lmin = dec.smallest_positive();
    if (!std::isfinite(lmin)) return GridFunction(f.grid_ptr());
    const double t_lo = 1e-10 / lmax;
    const double t_hi = 60.0 / lmin;
    const double u_lo = std::log(t_lo), u_hi = std::log(t_hi);
    const Eigen::VectorXd df = op.matrix * f.values();
    // int_0^t_lo t^(-s/2) J H_t f dt ~ t_lo^e / e * J f
    const Eigen::VectorXd head = std::pow(t_lo, e) / e * df;

    auto integrate_with = [&](int nodes) {
        std::vector<double> ts(static_cast<std::size_t>(nodes));
        const double du = (u_hi - u_lo) / (nodes - 1);
        for (int i = 0; i < nodes; ++i) ts[static_cast<std::size_t>(i)] = std::exp(u_lo + i * du);
        const Eigen::MatrixXd h = heat_many(dec, f, ts);
        Eigen::VectorXd acc = Eigen::VectorXd::Zero(f.values().size());
        for (int i = 0; i < nodes; ++i) {
            const double w = (i == 0 || i == nodes - 1) ? 0.5 : 1.0;
            acc += (w * du * std::pow(ts[static_cast<std::size_t>(i)], e)) * (op.matrix * h.col(i));
        }
        return Eigen::VectorXd((acc + head) / std::tgamma(e));
    };

    int nodes = static_cast<int>(std::ceil((u_hi - u_lo) / 0.2)) + 1;
    Eigen::VectorXd prev = integrate_with(nodes);
    for (int round = 0; round < 6; ++round) {
        nodes = 2 * nodes - 1;
        Eigen::VectorXd next = integrate_with(nodes);
        const double scale = std::max(next.cwiseAbs().maxCoeff(), 1e-300);
        if ((next - prev).cwiseAbs().maxCoeff() <= 1e-9 * scale) return GridFunction(f.grid_ptr(), std::move(next));
        prev = std::move(next);
    }
    throw NumericError("fractional_power_integral_oracle: quadrature did not converge");
}

/// Littlewood-Paley approximation f_j = (phi(2^-2j D) - phi(2^2j D)) f.
inline GridFunction lp_block(const SpectralDecomposition& dec, const GridFunction& f, int j) {
    if (j < 0) throw InvalidArgument("lp_block: j must be non-negative");
    const double lo = std::ldexp(1.0, -2 * j), hi = std::ldexp(1.0, 2 * j);
    return apply_multiplier(
        dec, {"lp_block", [lo, hi](double l) { return cutoff::phi(lo * l) - cutoff::phi(hi * l); }}, 1.0, f);
}

/// Kernel of m(tD): the multiplier applied to the unit-mass delta at the origin.
inline GridFunction kernel_of_multiplier(const SpectralDecomposition& dec, const Multiplier& m, double t) {
    return apply_multiplier(dec, m, t, discrete_delta(dec.grid_ptr()));
}

struct ScalingCheck {
    double max_relative_error = 0.0;
    double mean_relative_error = 0.0;
    std::size_t compared_nodes = 0;
};

/**
 * Compares alpha^N h(dilate(alpha, x), alpha^2 t) with h(x, t) at nodes
 * where h(., t) exceeds `significance` times its peak and dilate(alpha, x)
 * is inside the box. h(., alpha^2 t) is resampled by interpolation.
 */
inline ScalingCheck heat_kernel_scaling(const SpectralDecomposition& dec, double t, double alpha = 2.0,
                                        double significance = 0.1) {
    const Grid& g = dec.grid();
    const GridFunction k1 = kernel_of_multiplier(dec, heat_multiplier(), t);
    const GridFunction k2 = kernel_of_multiplier(dec, heat_multiplier(), alpha * alpha * t);
    const double peak = k1.max_abs();
    const double gain = std::pow(alpha, g.spec().homogeneous_dimension());
    ScalingCheck out;
    double sum = 0.0;
    GroupPoint x(static_cast<std::size_t>(g.dim()));
    for (std::size_t k = 0; k < g.dof(); ++k) {
        if (k1[k] < significance * peak) continue;
        g.point(k, x.coords());
        const GroupPoint y = dilate(g.spec(), alpha, x);
        bool inside = true;
        for (int a = 0; a < g.dim(); ++a)
            if (std::abs(y[a]) > g.half_widths()[a] + 1e-12) inside = false;
        if (!inside) continue;
        const double rel = std::abs(gain * interpolate(k2, y) - k1[k]) / k1[k];
        out.max_relative_error = std::max(out.max_relative_error, rel);
        sum += rel;
        ++out.compared_nodes;
    }
    if (out.compared_nodes) out.mean_relative_error = sum / static_cast<double>(out.compared_nodes);
    return out;
}

// ---- on-disk cache -------------------------------------------------------

inline std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::uint64_t decomposition_key(const Grid& grid) {
    return fnv1a("stratlab-sublaplacian-v2\n" + grid.descriptor());
}

inline std::filesystem::path cache_file(const std::filesystem::path& dir, const Grid& grid) {
    std::ostringstream os;
    os << "eig-" << std::hex << decomposition_key(grid) << ".bin";
    return dir / os.str();
}

inline void save_decomposition(const SpectralDecomposition& dec, const std::filesystem::path& path) {
    std::filesystem::create_directories(path.parent_path().empty() ? "." : path.parent_path());
    const auto tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write cache file " + tmp);
        const std::uint64_t key = decomposition_key(dec.grid());
        const std::uint64_t n = static_cast<std::uint64_t>(dec.size());
        out.write("STRATEIG", 8);
        out.write(reinterpret_cast<const char*>(&key), sizeof key);
        out.write(reinterpret_cast<const char*>(&n), sizeof n);
        out.write(reinterpret_cast<const char*>(dec.eigenvalues().data()), static_cast<std::streamsize>(n * 8));
        out.write(reinterpret_cast<const char*>(dec.vectors().data()), static_cast<std::streamsize>(n * n * 8));
    }
    std::filesystem::rename(tmp, path);
}

/// Returns nullptr when the file is missing, truncated or keyed to a different grid.
inline DecompositionPtr load_decomposition(const GridPtr& grid, const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return nullptr;
    char magic[8];
    std::uint64_t key = 0, n = 0;
    in.read(magic, 8);
    in.read(reinterpret_cast<char*>(&key), sizeof key);
    in.read(reinterpret_cast<char*>(&n), sizeof n);
    if (!in || std::string(magic, 8) != "STRATEIG" || key != decomposition_key(*grid) || n != grid->dof())
        return nullptr;
    Eigen::VectorXd w(static_cast<Eigen::Index>(n));
    Eigen::MatrixXd q(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    in.read(reinterpret_cast<char*>(w.data()), static_cast<std::streamsize>(n * 8));
    in.read(reinterpret_cast<char*>(q.data()), static_cast<std::streamsize>(n * n * 8));
    if (!in) return nullptr;
    return std::make_shared<const SpectralDecomposition>(grid, std::move(w), std::move(q));
}

inline std::filesystem::path default_cache_dir() {
    if (const char* env = std::getenv("STRATLAB_CACHE_DIR"); env && *env) return env;
    return std::filesystem::temp_directory_path() / "stratlab-cache";
}

/// Decomposition of the grid's sub-Laplacian, reusing the cache when enabled.
inline DecompositionPtr decompose_grid(const GridPtr& grid, bool use_cache = true,
                                       const std::filesystem::path& cache_dir = default_cache_dir(),
                                       std::size_t cap = kDenseEigenCap) {
    const auto path = cache_file(cache_dir, *grid);
    if (use_cache)
        if (auto hit = load_decomposition(grid, path)) return hit;
    auto dec = std::make_shared<const SpectralDecomposition>(eigendecompose(grid, sublaplacian(*grid), cap));
    if (use_cache) save_decomposition(*dec, path);
    return dec;
}

}  // namespace stratlab
