#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace fremond {

/**
 * Uniform cell-centered grid on an axis-aligned box [0, L1] (x [0, L2]).
 *
 * Cells are indexed row-major: the linear index of cell (i, j) is i * n(1) + j,
 * where i runs along axis 0 (x) and j along axis 1 (y). In 1D the index is i.
 * Cell centers sit at (i + 1/2) h.
 */
class Grid {
public:
    static Grid line(std::size_t n, double length = 1.0);
    static Grid box(std::size_t nx, std::size_t ny, double lx = 1.0, double ly = 1.0);

    int dim() const { return dim_; }
    std::size_t n(int axis) const { return n_[axis]; }
    double h(int axis) const { return h_[axis]; }
    double extent(int axis) const { return extent_[axis]; }

    std::size_t size() const { return dim_ == 1 ? n_[0] : n_[0] * n_[1]; }
    /// Volume of one cell, h^d.
    double cell_volume() const { return dim_ == 1 ? h_[0] : h_[0] * h_[1]; }
    /// |Omega|.
    double measure() const { return dim_ == 1 ? extent_[0] : extent_[0] * extent_[1]; }

    double center(int axis, std::size_t i) const { return (static_cast<double>(i) + 0.5) * h_[axis]; }
    std::size_t index(std::size_t i, std::size_t j) const { return i * n_[1] + j; }

    bool operator==(const Grid& other) const;

private:
    Grid(int dim, std::array<std::size_t, 2> n, std::array<double, 2> extent);

    int dim_ = 1;
    std::array<std::size_t, 2> n_{1, 1};
    std::array<double, 2> h_{1.0, 1.0};
    std::array<double, 2> extent_{1.0, 1.0};
};

/// Scalar cell-centered field. Owns its values; carries its grid by value.
class Field {
public:
    explicit Field(const Grid& grid, double fill = 0.0);
    Field(const Grid& grid, std::vector<double> values);

    const Grid& grid() const { return grid_; }
    std::size_t size() const { return values_.size(); }

    double& operator[](std::size_t k) { return values_[k]; }
    double operator[](std::size_t k) const { return values_[k]; }

    std::span<double> values() { return values_; }
    std::span<const double> values() const { return values_; }

    double min() const;
    double max() const;
    bool all_finite() const;

    /// Builds a field by sampling f(x) (1D) or f(x, y) (2D) at cell centers.
    template <class F>
    static Field sample(const Grid& grid, F&& f);

private:
    Grid grid_;
    std::vector<double> values_;
};

enum class NormKind { L1, L2, H1semi, H1 };

/// Second-order Neumann Laplacian with mirrored ghost cells (zero flux).
Field laplacian_neumann(const Field& f);
/// Raw-span form used by the linear solvers: out = Delta in.
void apply_laplacian(const Grid& grid, std::span<const double> in, std::span<double> out);

/**
 * Cellwise |grad f|^2 in face-difference form.
 *
 * Each interior face carries (f_right - f_left)^2 / h^2; boundary faces carry 0
 * (mirrored ghost). A cell receives half of each of its two faces per axis, so
 * the cell sum equals the discrete Dirichlet form and
 *   sum f * (-Delta f) h^d == sum grad_sq(f) h^d.
 * Consequently a boundary cell of f(x) = x gets 1/2 instead of 1, and a 2D
 * corner cell is halved along both axes.
 */
Field grad_sq(const Field& f);
/// Polarized form of grad_sq: cellwise grad a . grad b with the same face convention.
Field grad_dot(const Field& a, const Field& b);

/// Midpoint rule, sum values * h^d.
double integrate(const Field& f);
double integrate(const Grid& grid, std::span<const double> values);
double norm(const Field& f, NormKind kind);

void require_same_grid(const Field& a, const Field& b);

template <class F>
Field Field::sample(const Grid& grid, F&& f)
{
    Field out(grid);
    if (grid.dim() == 1) {
        for (std::size_t i = 0; i < grid.n(0); ++i)
            out[i] = f(grid.center(0, i), 0.0);
    } else {
        for (std::size_t i = 0; i < grid.n(0); ++i)
            for (std::size_t j = 0; j < grid.n(1); ++j)
                out[grid.index(i, j)] = f(grid.center(0, i), grid.center(1, j));
    }
    return out;
}

} // namespace fremond
