#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include "stratlab/errors.hpp"
#include "stratlab/grid.hpp"

namespace stratlab {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

struct LinearOperator {
    SparseMatrix matrix;
    bool symmetric = false;

    Eigen::Index size() const { return matrix.rows(); }
    Eigen::VectorXd apply(const Eigen::VectorXd& v) const { return matrix * v; }
};

enum class FieldSide { Left, Right };

/// Coefficients of the j-th invariant field at x: X_j = sum_k c_k(x) d/dx_k.
/// Left fields come from d/dy_j f(x.y), right fields from d/dy_j f(y.x).
inline void field_coefficients(const GroupSpec& g, int j, FieldSide side, std::span<const double> x,
                               std::span<double> out) {
    for (int k = 0; k < g.n; ++k) out[k] = 0.0;
    out[j] = 1.0;
    for (const auto& t : g.law) {
        if (side == FieldSide::Left && t.right == j) out[t.target] += t.coeff * x[t.left];
        if (side == FieldSide::Right && t.left == j) out[t.target] += t.coeff * x[t.right];
    }
}

namespace detail {

inline void check_generator(const Grid& grid, int j) {
    if (j < 0 || j >= grid.spec().generators())
        throw InvalidArgument("vector field index " + std::to_string(j) + " outside the " +
                              std::to_string(grid.spec().generators()) + " degree-1 generators");
}

}  // namespace detail

/// Central-difference matrix of X_j (or Y_j) with zero extension outside the box.
/// Exactly skew-symmetric, exact on polynomials of coordinate degree <= 2.
inline SparseMatrix field_matrix(const Grid& grid, int j, FieldSide side = FieldSide::Left) {
    detail::check_generator(grid, j);
    const int n = grid.dim();
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(grid.dof() * 2 * static_cast<std::size_t>(n));
    std::vector<double> x(static_cast<std::size_t>(n)), c(static_cast<std::size_t>(n));
    std::vector<int> idx(static_cast<std::size_t>(n));
    for (std::size_t node = 0; node < grid.dof(); ++node) {
        grid.point(node, x);
        field_coefficients(grid.spec(), j, side, x, c);
        for (int a = 0; a < n; ++a) idx[a] = grid.index_along(node, a);
        for (int k = 0; k < n; ++k) {
            if (c[k] == 0.0) continue;
            const double w = c[k] / (2.0 * grid.spacing()[k]);
            if (idx[k] + 1 < grid.points()[k])
                trip.emplace_back(static_cast<int>(node), static_cast<int>(node + grid.stride(k)), w);
            if (idx[k] - 1 >= 0)
                trip.emplace_back(static_cast<int>(node), static_cast<int>(node - grid.stride(k)), -w);
        }
    }
    SparseMatrix m(static_cast<Eigen::Index>(grid.dof()), static_cast<Eigen::Index>(grid.dof()));
    m.setFromTriplets(trip.begin(), trip.end());
    return m;
}

/**
 * One-sided difference operator of X_j used to assemble the sub-Laplacian.
 * Rows run over the grid extended by one ghost layer on the low side of
 * every axis, so A^T A carries the homogeneous Dirichlet condition on both
 * sides. Row r approximates X_j u at the cell anchored at r:
 *   sum_k c_k(x_r) (u[r + e_k] - u[r]) / h_k.
 */
inline SparseMatrix edge_operator(const Grid& grid, int j) {
    detail::check_generator(grid, j);
    const int n = grid.dim();
    std::vector<int> ext(static_cast<std::size_t>(n));
    std::size_t rows_ext = 1;
    for (int a = 0; a < n; ++a) {
        ext[a] = grid.points()[a] + 1;
        rows_ext *= static_cast<std::size_t>(ext[a]);
    }
    std::vector<Eigen::Triplet<double>> trip;
    std::vector<double> x(static_cast<std::size_t>(n)), c(static_cast<std::size_t>(n));
    std::vector<int> idx(static_cast<std::size_t>(n)), nb(static_cast<std::size_t>(n));
    int row = 0;
    for (std::size_t r = 0; r < rows_ext; ++r) {
        std::size_t rem = r;
        for (int a = n - 1; a >= 0; --a) {
            idx[a] = static_cast<int>(rem % static_cast<std::size_t>(ext[a])) - 1;
            rem /= static_cast<std::size_t>(ext[a]);
        }
        for (int a = 0; a < n; ++a) x[a] = grid.coord_of_index(idx[a], a);
        field_coefficients(grid.spec(), j, FieldSide::Left, x, c);
        double centre = 0.0;
        bool any = false;
        const bool self_in = grid.in_range(idx);
        for (int k = 0; k < n; ++k) {
            if (c[k] == 0.0) continue;
            const double w = c[k] / grid.spacing()[k];
            centre -= w;
            nb = idx;
            nb[k] += 1;
            if (grid.in_range(nb)) {
                trip.emplace_back(row, static_cast<int>(grid.node_of(nb)), w);
                any = true;
            }
        }
        if (self_in && centre != 0.0) {
            trip.emplace_back(row, static_cast<int>(grid.node_of(idx)), centre);
            any = true;
        }
        if (any) ++row;
    }
    SparseMatrix m(row, static_cast<Eigen::Index>(grid.dof()));
    m.setFromTriplets(trip.begin(), trip.end());
    m.prune(0.0);
    return m;
}

/// Discrete sub-Laplacian D = sum_j A_j^T A_j over the degree-1 generators.
/// Symmetric positive semi-definite by construction.
inline LinearOperator sublaplacian(const Grid& grid, std::size_t dof_cap = Grid::kDefaultDofCap) {
    if (grid.dof() > dof_cap)
        throw ResourceError("sublaplacian: grid " + grid.descriptor_line() + " exceeds the dof cap " +
                            std::to_string(dof_cap));
    SparseMatrix d(static_cast<Eigen::Index>(grid.dof()), static_cast<Eigen::Index>(grid.dof()));
    for (int j = 0; j < grid.spec().generators(); ++j) {
        const SparseMatrix a = edge_operator(grid, j);
        d += SparseMatrix(a.transpose() * a);
    }
    d.makeCompressed();
    return {std::move(d), true};
}

inline GridFunction apply_vector_field(const GridFunction& f, int j, FieldSide side = FieldSide::Left) {
    GridFunction out(f.grid_ptr(), field_matrix(f.grid(), j, side) * f.values());
    out.boundary_warning = !f.interior_supported();
    return out;
}

inline GridFunction right_vector_field(const GridFunction& f, int j) {
    return apply_vector_field(f, j, FieldSide::Right);
}

/// |grad f| = sqrt(sum_j (X_j f)^2) over the degree-1 generators.
inline GridFunction gradient_length(const GridFunction& f) {
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(f.values().size());
    for (int j = 0; j < f.grid().spec().generators(); ++j) {
        const Eigen::VectorXd xj = field_matrix(f.grid(), j) * f.values();
        acc += xj.cwiseProduct(xj);
    }
    GridFunction out(f.grid_ptr(), acc.cwiseSqrt());
    out.boundary_warning = !f.interior_supported();
    return out;
}

/// Sum of f * omega * dV with the outermost nodes of each axis at half weight
/// (trapezoid rule). For interior-supported f this is the plain Riemann sum;
/// the half weights make the indicator of the box integrate to its volume.
inline double integrate(const GridFunction& f, const GridFunction* omega = nullptr) {
    const Grid& g = f.grid();
    double acc = 0.0;
    for (std::size_t k = 0; k < g.dof(); ++k) {
        double v = f[k];
        if (v == 0.0) continue;
        if (omega) v *= (*omega)[k];
        for (int a = 0; a < g.dim(); ++a) {
            const int i = g.index_along(k, a);
            if (i == 0 || i == g.points()[a] - 1) v *= 0.5;
        }
        acc += v;
    }
    return acc * g.cell_volume();
}

/// Multilinear interpolation at an arbitrary point; zero outside the grid
/// (a ghost node one spacing beyond the box holds 0).
inline double interpolate(const GridFunction& f, std::span<const double> p) {
    const Grid& g = f.grid();
    const int n = g.dim();
    int base[8];
    double frac[8];
    for (int a = 0; a < n; ++a) {
        const double u = p[a] / g.spacing()[a] + g.points()[a] / 2;
        if (u <= -1.0 || u >= g.points()[a]) return 0.0;
        const double fl = std::floor(u);
        base[a] = static_cast<int>(fl);
        frac[a] = u - fl;
    }
    double acc = 0.0;
    const int corners = 1 << n;
    for (int c = 0; c < corners; ++c) {
        double w = 1.0;
        std::size_t node = 0;
        bool inside = true;
        for (int a = 0; a < n; ++a) {
            const int bit = (c >> a) & 1;
            const int i = base[a] + bit;
            w *= bit ? frac[a] : 1.0 - frac[a];
            if (i < 0 || i >= g.points()[a]) {
                inside = false;
                break;
            }
            node += static_cast<std::size_t>(i) * g.stride(a);
        }
        if (inside && w != 0.0) acc += w * f[node];
    }
    return acc;
}

inline double interpolate(const GridFunction& f, const GroupPoint& p) { return interpolate(f, p.coords()); }

/// g(x) = f(dilate(alpha, x)) resampled onto the same grid.
inline GridFunction dilate_function(const GridFunction& f, double alpha) {
    if (!(alpha > 0.0)) throw InvalidArgument("dilate_function: alpha must be positive");
    const Grid& g = f.grid();
    std::vector<double> x(static_cast<std::size_t>(g.dim()));
    Eigen::VectorXd v(g.dof());
    std::vector<double> scale(static_cast<std::size_t>(g.dim()));
    for (int a = 0; a < g.dim(); ++a) scale[a] = std::pow(alpha, g.spec().exponents[a]);
    for (std::size_t k = 0; k < g.dof(); ++k) {
        g.point(k, x);
        for (int a = 0; a < g.dim(); ++a) x[a] *= scale[a];
        v[static_cast<Eigen::Index>(k)] = interpolate(f, x);
    }
    return GridFunction(f.grid_ptr(), std::move(v));
}

/// Unit-mass delta at the origin node (value 1 / cell volume).
inline GridFunction discrete_delta(const GridPtr& grid) {
    GridFunction d(grid);
    d.values()[static_cast<Eigen::Index>(grid->origin_node())] = 1.0 / grid->cell_volume();
    return d;
}

/**
 * (f * K)(x) = sum_y f(y) K(y^-1 . x) dV with K an arbitrary callable on
 * group points. Sets boundary_warning when the result does not vanish on
 * the two outer layers (the true convolution leaves the box).
 */
template <class Kernel>
GridFunction convolve_with(const GridFunction& f, Kernel&& kernel) {
    const Grid& g = f.grid();
    const int n = g.dim();
    const double vol = g.cell_volume();
    std::vector<std::vector<double>> pts(g.dof(), std::vector<double>(static_cast<std::size_t>(n)));
    for (std::size_t k = 0; k < g.dof(); ++k) g.point(k, pts[k]);
    Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(g.dof()));
    std::vector<double> yinv(static_cast<std::size_t>(n)), z(static_cast<std::size_t>(n));
    for (std::size_t y = 0; y < g.dof(); ++y) {
        const double fy = f[y];
        if (fy == 0.0) continue;
        detail::inverse_into(g.spec(), pts[y], yinv);
        for (std::size_t x = 0; x < g.dof(); ++x) {
            detail::multiply_into(g.spec(), yinv, pts[x], z);
            const double kv = kernel(std::span<const double>(z));
            if (kv != 0.0) out[static_cast<Eigen::Index>(x)] += fy * kv;
        }
    }
    out *= vol;
    GridFunction res(f.grid_ptr(), std::move(out));
    const double peak = res.max_abs();
    for (std::size_t k = 0; k < g.dof() && peak > 0.0; ++k)
        if (g.near_boundary(k, 2) && std::abs(res[k]) > 1e-12 * peak) {
            res.boundary_warning = true;
            break;
        }
    return res;
}

/// Group convolution f * g(x) = int f(y) g(y^-1 . x) dy with multilinear
/// interpolation of g at off-grid points.
inline GridFunction group_convolve(const GridFunction& f, const GridFunction& g) {
    if (!(f.grid() == g.grid())) throw InvalidArgument("group_convolve: functions live on different grids");
    return convolve_with(f, [&g](std::span<const double> z) { return interpolate(g, z); });
}

}  // namespace stratlab
