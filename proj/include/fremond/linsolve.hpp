#pragma once

#include <span>

#include "fremond/grid.hpp"

namespace fremond {

struct LinearSolveStats {
    int iterations = 0;
    double relative_residual = 0.0;
    bool converged = false;
};

/**
 * Solves (diag(shift) - coef * Delta) x = rhs with the Neumann Laplacian.
 *
 * 1D grids use tridiagonal elimination; 2D grids use Jacobi-preconditioned
 * conjugate gradients to relative residual tol, starting from the contents of x.
 * The operator is SPD whenever coef >= 0 and shift > 0 cellwise; otherwise the
 * 1D path still runs but reports failure on a vanishing pivot.
 */
LinearSolveStats solve_shifted_laplacian(const Grid& grid, std::span<const double> shift, double coef,
                                         std::span<const double> rhs, std::span<double> x, double tol,
                                         int max_iter);

} // namespace fremond
