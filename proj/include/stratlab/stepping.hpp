#pragma once

#include <Eigen/SparseCholesky>

#include <sstream>

#include "stratlab/calculus.hpp"
#include "stratlab/errors.hpp"

namespace stratlab {

/**
 * Crank-Nicolson approximation of e^{-tD} f for grids beyond the dense
 * eigendecomposition cap:
 *   (I + dt/2 D) u_{k+1} = (I - dt/2 D) u_k,  dt = t / steps.
 * Unconditionally stable; second order in dt.
 */
inline GridFunction heat_stepping(const LinearOperator& op, const GridFunction& f, double t, int steps) {
    if (t < 0.0) throw InvalidArgument("heat_stepping: t must be non-negative");
    if (steps < 1) throw InvalidArgument("heat_stepping: steps must be >= 1");
    if (static_cast<std::size_t>(op.size()) != f.grid().dof())
        throw InvalidArgument("heat_stepping: operator size does not match the grid");
    if (t == 0.0) return f;

    using ColMajor = Eigen::SparseMatrix<double>;
    const double dt = t / steps;
    ColMajor id(op.size(), op.size());
    id.setIdentity();
    const ColMajor d = ColMajor(op.matrix);
    const ColMajor lhs = id + (0.5 * dt) * d;
    const ColMajor rhs = id - (0.5 * dt) * d;

    Eigen::SimplicialLDLT<ColMajor> solver(lhs);
    if (solver.info() != Eigen::Success) throw NumericError("heat_stepping: factorization failed");

    Eigen::VectorXd u = f.values();
    for (int k = 0; k < steps; ++k) {
        const Eigen::VectorXd b = rhs * u;
        Eigen::VectorXd next = solver.solve(b);
        const double res = (lhs * next - b).norm();
        const double scale = std::max(b.norm(), 1e-300);
        if (solver.info() != Eigen::Success || !(res <= 1e-10 * scale)) {
            std::ostringstream os;
            os << "heat_stepping: linear solve did not converge at step " << k << " (relative residual "
               << res / scale << ")";
            throw NumericError(os.str());
        }
        u = std::move(next);
    }
    return GridFunction(f.grid_ptr(), std::move(u));
}

}  // namespace stratlab
