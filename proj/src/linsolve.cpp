#include "fremond/linsolve.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace fremond {

namespace {

LinearSolveStats thomas(const Grid& grid, std::span<const double> shift, double coef,
                        std::span<const double> rhs, std::span<double> x)
{
    const std::size_t n = grid.n(0);
    const double off = -coef / (grid.h(0) * grid.h(0));
    std::vector<double> c(n), d(n);

    // Row i: off * x[i-1] + diag_i * x[i] + off * x[i+1]; mirrored ghosts drop one -off from the ends.
    auto diag = [&](std::size_t i) {
        const double neighbours = (i == 0 || i + 1 == n) ? 1.0 : 2.0;
        return shift[i] - off * neighbours;
    };

    LinearSolveStats stats;
    double b = diag(0);
    if (b == 0.0 || !std::isfinite(b))
        return stats;
    c[0] = off / b;
    d[0] = rhs[0] / b;
    for (std::size_t i = 1; i < n; ++i) {
        b = diag(i) - off * c[i - 1];
        if (b == 0.0 || !std::isfinite(b))
            return stats;
        c[i] = off / b;
        d[i] = (rhs[i] - off * d[i - 1]) / b;
    }
    x[n - 1] = d[n - 1];
    for (std::size_t i = n - 1; i-- > 0;)
        x[i] = d[i] - c[i] * x[i + 1];
    stats.iterations = 1;
    stats.converged = true;
    return stats;
}

LinearSolveStats pcg(const Grid& grid, std::span<const double> shift, double coef, std::span<const double> rhs,
                     std::span<double> x, double tol, int max_iter)
{
    const std::size_t n = grid.size();
    std::vector<double> r(n), z(n), p(n), ap(n), lap(n), inv_diag(n);
    const double stencil = 2.0 / (grid.h(0) * grid.h(0)) + 2.0 / (grid.h(1) * grid.h(1));
    for (std::size_t k = 0; k < n; ++k)
        inv_diag[k] = 1.0 / (shift[k] + coef * stencil);

    auto apply = [&](std::span<const double> in, std::span<double> out) {
        apply_laplacian(grid, in, lap);
        for (std::size_t k = 0; k < n; ++k)
            out[k] = shift[k] * in[k] - coef * lap[k];
    };
    auto dot = [n](const std::vector<double>& a, const std::vector<double>& b) {
        double s = 0.0;
        for (std::size_t k = 0; k < n; ++k)
            s += a[k] * b[k];
        return s;
    };

    LinearSolveStats stats;
    double bnorm = 0.0;
    for (double v : rhs)
        bnorm += v * v;
    bnorm = std::sqrt(bnorm);
    if (bnorm == 0.0) {
        std::fill(x.begin(), x.end(), 0.0);
        stats.converged = true;
        return stats;
    }

    apply(x, r);
    for (std::size_t k = 0; k < n; ++k) {
        r[k] = rhs[k] - r[k];
        z[k] = inv_diag[k] * r[k];
        p[k] = z[k];
    }
    double rz = dot(r, z);
    for (int it = 0; it <= max_iter; ++it) {
        const double rnorm = std::sqrt(dot(r, r));
        stats.iterations = it;
        stats.relative_residual = rnorm / bnorm;
        if (stats.relative_residual <= tol) {
            stats.converged = true;
            return stats;
        }
        if (it == max_iter)
            break;
        apply(p, ap);
        const double pap = dot(p, ap);
        if (!(pap > 0.0))
            return stats;
        const double alpha = rz / pap;
        for (std::size_t k = 0; k < n; ++k) {
            x[k] += alpha * p[k];
            r[k] -= alpha * ap[k];
            z[k] = inv_diag[k] * r[k];
        }
        const double rz_new = dot(r, z);
        const double beta = rz_new / rz;
        rz = rz_new;
        for (std::size_t k = 0; k < n; ++k)
            p[k] = z[k] + beta * p[k];
    }
    return stats;
}

} // namespace

LinearSolveStats solve_shifted_laplacian(const Grid& grid, std::span<const double> shift, double coef,
                                         std::span<const double> rhs, std::span<double> x, double tol,
                                         int max_iter)
{
    if (grid.dim() == 1)
        return thomas(grid, shift, coef, rhs, x);
    return pcg(grid, shift, coef, rhs, x, tol, max_iter);
}

} // namespace fremond
