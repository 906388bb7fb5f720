#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "stratlab/errors.hpp"
#include "stratlab/group.hpp"

namespace stratlab {

/**
 * Anisotropic box grid [-L_i, L_i] with m_i points per axis (odd, so the
 * origin is a node). Nodes are stored row-major with the last axis fastest.
 */
class Grid {
public:
    static constexpr std::size_t kDefaultDofCap = 250000;

    Grid(GroupSpec spec, std::vector<double> half_widths, std::vector<int> points,
         std::size_t dof_cap = kDefaultDofCap)
        : spec_(std::move(spec)), half_(std::move(half_widths)), points_(std::move(points)) {
        spec_.validate();
        const auto n = static_cast<std::size_t>(spec_.n);
        if (half_.size() != n || points_.size() != n)
            throw InvalidArgument("grid: half_widths and points need one entry per axis");
        dof_ = 1;
        for (std::size_t i = 0; i < n; ++i) {
            if (!(half_[i] > 0.0)) throw InvalidArgument("grid: half widths must be positive");
            if (points_[i] < 5) throw InvalidArgument("grid: need at least 5 points per axis");
            if (points_[i] % 2 == 0) throw InvalidArgument("grid: points per axis must be odd");
            spacing_.push_back(2.0 * half_[i] / (points_[i] - 1));
            dof_ *= static_cast<std::size_t>(points_[i]);
        }
        if (dof_ > dof_cap)
            throw ResourceError("grid " + descriptor_line() + " has " + std::to_string(dof_) +
                                " dof, above the cap of " + std::to_string(dof_cap));
        strides_.assign(n, 1);
        for (int i = static_cast<int>(n) - 2; i >= 0; --i)
            strides_[i] = strides_[i + 1] * static_cast<std::size_t>(points_[i + 1]);
    }

    const GroupSpec& spec() const { return spec_; }
    int dim() const { return spec_.n; }
    std::size_t dof() const { return dof_; }
    const std::vector<double>& half_widths() const { return half_; }
    const std::vector<int>& points() const { return points_; }
    const std::vector<double>& spacing() const { return spacing_; }
    std::size_t stride(int axis) const { return strides_[axis]; }

    double cell_volume() const {
        double v = 1.0;
        for (double h : spacing_) v *= h;
        return v;
    }
    double box_volume() const {
        double v = 1.0;
        for (double l : half_) v *= 2.0 * l;
        return v;
    }
    double min_spacing() const { return *std::min_element(spacing_.begin(), spacing_.end()); }

    int index_along(std::size_t node, int axis) const {
        return static_cast<int>((node / strides_[axis]) % static_cast<std::size_t>(points_[axis]));
    }
    double coord(std::size_t node, int axis) const { return coord_of_index(index_along(node, axis), axis); }
    // Measured from the centre so the origin node is exactly 0 and mirror nodes are exact negatives.
    double coord_of_index(int idx, int axis) const { return (idx - points_[axis] / 2) * spacing_[axis]; }

    void point(std::size_t node, std::span<double> out) const {
        for (int a = 0; a < dim(); ++a) out[a] = coord(node, a);
    }
    GroupPoint point(std::size_t node) const {
        GroupPoint p(static_cast<std::size_t>(dim()));
        point(node, p.coords());
        return p;
    }

    bool in_range(std::span<const int> idx) const {
        for (int a = 0; a < dim(); ++a)
            if (idx[a] < 0 || idx[a] >= points_[a]) return false;
        return true;
    }
    std::size_t node_of(std::span<const int> idx) const {
        std::size_t k = 0;
        for (int a = 0; a < dim(); ++a) k += static_cast<std::size_t>(idx[a]) * strides_[a];
        return k;
    }
    std::size_t origin_node() const {
        std::vector<int> idx(static_cast<std::size_t>(dim()));
        for (int a = 0; a < dim(); ++a) idx[a] = points_[a] / 2;
        return node_of(idx);
    }

    // Within `layers` of the box boundary along some axis.
    bool near_boundary(std::size_t node, int layers = 2) const {
        for (int a = 0; a < dim(); ++a) {
            const int i = index_along(node, a);
            if (i < layers || i >= points_[a] - layers) return true;
        }
        return false;
    }

    // Single-line grid descriptor; also the sidecar header body and cache key input.
    std::string descriptor_line() const {
        std::ostringstream os;
        os.precision(17);
        os << "group=" << spec_.name << " n=" << spec_.n << " points=";
        for (int a = 0; a < dim(); ++a) os << (a ? "x" : "") << points_[a];
        os << " half_widths=";
        for (int a = 0; a < dim(); ++a) os << (a ? "," : "") << half_[a];
        return os.str();
    }

    std::string descriptor() const {
        std::ostringstream os;
        os.precision(17);
        for (const auto& [k, v] : to_config_block(spec_)) os << "group." << k << " = " << v << "\n";
        os << "grid.points = ";
        for (int a = 0; a < dim(); ++a) os << (a ? ", " : "") << points_[a];
        os << "\ngrid.half_widths = ";
        for (int a = 0; a < dim(); ++a) os << (a ? ", " : "") << half_[a];
        os << "\n";
        return os.str();
    }

    bool operator==(const Grid& o) const {
        return spec_ == o.spec_ && half_ == o.half_ && points_ == o.points_;
    }

private:
    GroupSpec spec_;
    std::vector<double> half_;
    std::vector<int> points_;
    std::vector<double> spacing_;
    std::vector<std::size_t> strides_;
    std::size_t dof_ = 0;
};

using GridPtr = std::shared_ptr<const Grid>;

inline GridPtr make_grid(GroupSpec spec, std::vector<double> half_widths, std::vector<int> points,
                         std::size_t dof_cap = Grid::kDefaultDofCap) {
    return std::make_shared<const Grid>(std::move(spec), std::move(half_widths), std::move(points), dof_cap);
}

/**
 * Real samples on a grid. "Interior-supported" means the two outermost
 * layers along every axis are exactly zero, so Dirichlet truncation does
 * not touch the function.
 */
class GridFunction {
public:
    GridFunction() = default;
    explicit GridFunction(GridPtr grid) : grid_(std::move(grid)), values_(Eigen::VectorXd::Zero(grid_->dof())) {}
    GridFunction(GridPtr grid, Eigen::VectorXd values) : grid_(std::move(grid)), values_(std::move(values)) {
        if (static_cast<std::size_t>(values_.size()) != grid_->dof())
            throw InvalidArgument("grid function: value count does not match grid dof");
        if (!values_.allFinite()) throw InvalidArgument("grid function: values must be finite");
    }

    template <class F>
    static GridFunction sample(GridPtr grid, F&& fn) {
        Eigen::VectorXd v(grid->dof());
        GroupPoint p(static_cast<std::size_t>(grid->dim()));
        for (std::size_t k = 0; k < grid->dof(); ++k) {
            grid->point(k, p.coords());
            v[static_cast<Eigen::Index>(k)] = fn(p);
        }
        return GridFunction(grid, std::move(v));
    }

    const Grid& grid() const { return *grid_; }
    const GridPtr& grid_ptr() const { return grid_; }
    const Eigen::VectorXd& values() const { return values_; }
    Eigen::VectorXd& values() { return values_; }
    double operator[](std::size_t k) const { return values_[static_cast<Eigen::Index>(k)]; }

    bool interior_supported() const {
        for (std::size_t k = 0; k < grid_->dof(); ++k)
            if (grid_->near_boundary(k, 2) && values_[static_cast<Eigen::Index>(k)] != 0.0) return false;
        return true;
    }

    // Zero the two outermost layers.
    GridFunction& clip_to_interior() {
        for (std::size_t k = 0; k < grid_->dof(); ++k)
            if (grid_->near_boundary(k, 2)) values_[static_cast<Eigen::Index>(k)] = 0.0;
        return *this;
    }

    // Set when an operator was applied to a function that was not interior-supported.
    bool boundary_warning = false;

    GridFunction operator*(double c) const { return GridFunction(grid_, values_ * c); }
    GridFunction operator+(const GridFunction& o) const { return GridFunction(grid_, values_ + o.values_); }
    GridFunction operator-(const GridFunction& o) const { return GridFunction(grid_, values_ - o.values_); }
    double max_abs() const { return values_.size() ? values_.cwiseAbs().maxCoeff() : 0.0; }

private:
    GridPtr grid_;
    Eigen::VectorXd values_;
};

// Binary layout: dof little-endian doubles; the sidecar "<path>.hdr" holds the grid descriptor.
inline void save_grid_function(const GridFunction& f, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(f.values().data()),
              static_cast<std::streamsize>(f.values().size() * sizeof(double)));
    std::ofstream hdr(path.string() + ".hdr");
    if (!hdr) throw std::runtime_error("cannot write " + path.string() + ".hdr");
    hdr << "format = stratlab-gridfunction-v1\n" << "dof = " << f.grid().dof() << "\n" << f.grid().descriptor();
}

inline GridFunction load_grid_function(const GridPtr& grid, const std::filesystem::path& path) {
    std::ifstream hdr(path.string() + ".hdr");
    if (!hdr) throw std::runtime_error("missing sidecar header " + path.string() + ".hdr");
    std::stringstream ss;
    ss << hdr.rdbuf();
    const std::string expect = "format = stratlab-gridfunction-v1\ndof = " + std::to_string(grid->dof()) +
                               "\n" + grid->descriptor();
    if (ss.str() != expect) throw InvalidArgument("grid function header does not match grid " + grid->descriptor_line());
    std::ifstream in(path, std::ios::binary);
    Eigen::VectorXd v(grid->dof());
    in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(double)));
    if (in.gcount() != static_cast<std::streamsize>(v.size() * sizeof(double)))
        throw InvalidArgument("grid function file " + path.string() + " is truncated");
    return GridFunction(grid, std::move(v));
}

// CSV of the slice through the origin spanned by axes (a, b): columns x_a, x_b, value.
inline void export_slice_csv(const GridFunction& f, int axis_a, int axis_b, const std::filesystem::path& path) {
    const Grid& g = f.grid();
    if (axis_a < 0 || axis_b < 0 || axis_a >= g.dim() || axis_b >= g.dim() || axis_a == axis_b)
        throw InvalidArgument("export_slice_csv: bad axes");
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out.precision(17);
    out << "x" << axis_a + 1 << ",x" << axis_b + 1 << ",value\n";
    std::vector<int> idx(static_cast<std::size_t>(g.dim()));
    for (int a = 0; a < g.dim(); ++a) idx[a] = g.points()[a] / 2;
    for (int i = 0; i < g.points()[axis_a]; ++i) {
        for (int j = 0; j < g.points()[axis_b]; ++j) {
            idx[axis_a] = i;
            idx[axis_b] = j;
            out << g.coord_of_index(i, axis_a) << ',' << g.coord_of_index(j, axis_b) << ','
                << f[g.node_of(idx)] << '\n';
        }
    }
}

}  // namespace stratlab
