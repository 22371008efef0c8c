#include "fremond/grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "fremond/errors.hpp"

namespace fremond {

Grid::Grid(int dim, std::array<std::size_t, 2> n, std::array<double, 2> extent)
    : dim_(dim), n_(n), extent_(extent)
{
    for (int a = 0; a < dim; ++a) {
        if (n_[a] < 2)
            throw std::invalid_argument("grid needs at least 2 cells per axis");
        if (!(extent_[a] > 0.0) || !std::isfinite(extent_[a]))
            throw std::invalid_argument("grid extent must be positive and finite");
        h_[a] = extent_[a] / static_cast<double>(n_[a]);
    }
}

Grid Grid::line(std::size_t n, double length)
{
    return Grid(1, {n, 1}, {length, 1.0});
}

Grid Grid::box(std::size_t nx, std::size_t ny, double lx, double ly)
{
    return Grid(2, {nx, ny}, {lx, ly});
}

bool Grid::operator==(const Grid& other) const
{
    if (dim_ != other.dim_ || n_ != other.n_)
        return false;
    for (int a = 0; a < dim_; ++a)
        if (std::abs(extent_[a] - other.extent_[a]) > 1e-12 * extent_[a])
            return false;
    return true;
}

Field::Field(const Grid& grid, double fill) : grid_(grid), values_(grid.size(), fill) {}

Field::Field(const Grid& grid, std::vector<double> values) : grid_(grid), values_(std::move(values))
{
    if (values_.size() != grid_.size())
        throw std::invalid_argument("field value count " + std::to_string(values_.size()) +
                                    " does not match grid size " + std::to_string(grid_.size()));
}

double Field::min() const { return *std::min_element(values_.begin(), values_.end()); }
double Field::max() const { return *std::max_element(values_.begin(), values_.end()); }

bool Field::all_finite() const
{
    return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

void require_same_grid(const Field& a, const Field& b)
{
    if (!(a.grid() == b.grid()))
        throw GridMismatch("fields live on different grids");
}

void apply_laplacian(const Grid& grid, std::span<const double> in, std::span<double> out)
{
    if (grid.dim() == 1) {
        const std::size_t n = grid.n(0);
        const double inv = 1.0 / (grid.h(0) * grid.h(0));
        for (std::size_t i = 0; i < n; ++i) {
            const double left = i == 0 ? in[i] : in[i - 1];
            const double right = i + 1 == n ? in[i] : in[i + 1];
            out[i] = (left - 2.0 * in[i] + right) * inv;
        }
        return;
    }
    const std::size_t nx = grid.n(0), ny = grid.n(1);
    const double ix = 1.0 / (grid.h(0) * grid.h(0));
    const double iy = 1.0 / (grid.h(1) * grid.h(1));
    for (std::size_t i = 0; i < nx; ++i) {
        for (std::size_t j = 0; j < ny; ++j) {
            const std::size_t k = i * ny + j;
            const double c = in[k];
            const double w = i == 0 ? c : in[k - ny];
            const double e = i + 1 == nx ? c : in[k + ny];
            const double s = j == 0 ? c : in[k - 1];
            const double nn = j + 1 == ny ? c : in[k + 1];
            out[k] = (w - 2.0 * c + e) * ix + (s - 2.0 * c + nn) * iy;
        }
    }
}

Field laplacian_neumann(const Field& f)
{
    Field out(f.grid());
    apply_laplacian(f.grid(), f.values(), out.values());
    return out;
}

namespace {

// Sums half of each adjacent face product (D a)(D b) into the cell.
template <class Op>
Field face_form(const Field& a, const Field& b, Op op)
{
    require_same_grid(a, b);
    const Grid& g = a.grid();
    Field out(g);
    if (g.dim() == 1) {
        const double inv = 1.0 / (g.h(0) * g.h(0));
        for (std::size_t i = 0; i + 1 < g.n(0); ++i) {
            const double v = 0.5 * op(a[i + 1] - a[i], b[i + 1] - b[i]) * inv;
            out[i] += v;
            out[i + 1] += v;
        }
        return out;
    }
    const std::size_t nx = g.n(0), ny = g.n(1);
    const double ix = 1.0 / (g.h(0) * g.h(0));
    const double iy = 1.0 / (g.h(1) * g.h(1));
    for (std::size_t i = 0; i < nx; ++i) {
        for (std::size_t j = 0; j < ny; ++j) {
            const std::size_t k = i * ny + j;
            if (i + 1 < nx) {
                const double v = 0.5 * op(a[k + ny] - a[k], b[k + ny] - b[k]) * ix;
                out[k] += v;
                out[k + ny] += v;
            }
            if (j + 1 < ny) {
                const double v = 0.5 * op(a[k + 1] - a[k], b[k + 1] - b[k]) * iy;
                out[k] += v;
                out[k + 1] += v;
            }
        }
    }
    return out;
}

} // namespace

Field grad_sq(const Field& f)
{
    return face_form(f, f, [](double da, double) { return da * da; });
}

Field grad_dot(const Field& a, const Field& b)
{
    return face_form(a, b, [](double da, double db) { return da * db; });
}

double integrate(const Grid& grid, std::span<const double> values)
{
    double sum = 0.0;
    for (double v : values)
        sum += v;
    return sum * grid.cell_volume();
}

double integrate(const Field& f) { return integrate(f.grid(), f.values()); }

double norm(const Field& f, NormKind kind)
{
    const Grid& g = f.grid();
    switch (kind) {
    case NormKind::L1: {
        double s = 0.0;
        for (double v : f.values())
            s += std::abs(v);
        return s * g.cell_volume();
    }
    case NormKind::L2: {
        double s = 0.0;
        for (double v : f.values())
            s += v * v;
        return std::sqrt(s * g.cell_volume());
    }
    case NormKind::H1semi:
        return std::sqrt(integrate(grad_sq(f)));
    case NormKind::H1: {
        const double l2 = norm(f, NormKind::L2);
        const double semi = norm(f, NormKind::H1semi);
        return std::sqrt(l2 * l2 + semi * semi);
    }
    }
    return 0.0;
}

} // namespace fremond
