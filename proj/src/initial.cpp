#include "fremond/initial.hpp"

#include <cmath>
#include <numbers>

#include "fremond/errors.hpp"
#include "fremond/io.hpp"

namespace fremond {

namespace {

// splitmix64; portable, unlike the std distributions.
class SplitMix {
public:
    explicit SplitMix(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next()
    {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }
    /// Uniform in [-1, 1).
    double symmetric() { return static_cast<double>(next() >> 11) * 0x1.0p-52 - 1.0; }

private:
    std::uint64_t state_;
};

Field cosine_shape(const Grid& grid)
{
    const double kx = std::numbers::pi / grid.extent(0);
    const double ky = std::numbers::pi / grid.extent(1);
    const bool two_d = grid.dim() == 2;
    return Field::sample(grid, [&](double x, double y) {
        return std::cos(kx * x) * (two_d ? std::cos(ky * y) : 1.0);
    });
}

Field affine(const Field& shape, double mean, double amp)
{
    Field out = shape;
    for (std::size_t k = 0; k < out.size(); ++k)
        out[k] = mean + amp * shape[k];
    return out;
}

} // namespace

Field random_smooth_field(const Grid& grid, std::uint64_t seed, int modes)
{
    SplitMix rng(seed);
    const int my = grid.dim() == 2 ? modes : 1;
    std::vector<double> coeff(static_cast<std::size_t>(modes * my));
    double total = 0.0;
    for (int kx = 0; kx < modes; ++kx)
        for (int ky = 0; ky < my; ++ky) {
            const double a = (kx == 0 && ky == 0) ? 0.0 : rng.symmetric() / (1.0 + kx * kx + ky * ky);
            coeff[static_cast<std::size_t>(kx * my + ky)] = a;
            total += std::abs(a);
        }
    if (total == 0.0)
        return Field(grid, 0.0);

    const double px = std::numbers::pi / grid.extent(0);
    const double py = std::numbers::pi / grid.extent(1);
    return Field::sample(grid, [&](double x, double y) {
        double s = 0.0;
        for (int kx = 0; kx < modes; ++kx)
            for (int ky = 0; ky < my; ++ky)
                s += coeff[static_cast<std::size_t>(kx * my + ky)] * std::cos(kx * px * x) * std::cos(ky * py * y);
        return s / total;
    });
}

Field gaussian_bump(const Grid& grid, double center, double width)
{
    const double cx = center * grid.extent(0);
    const double cy = center * grid.extent(1);
    const bool two_d = grid.dim() == 2;
    return Field::sample(grid, [&](double x, double y) {
        const double r2 = (x - cx) * (x - cx) + (two_d ? (y - cy) * (y - cy) : 0.0);
        return std::exp(-r2 / (width * width));
    });
}

State build_initial_state(const RunConfig& cfg)
{
    const Grid grid = cfg.grid.make();
    const InitialSpec& in = cfg.initial;

    auto make = [&]() -> std::pair<Field, Field> {
        if (in.preset == "uniform")
            return {Field(grid, in.theta_mean), Field(grid, in.phi_mean)};
        if (in.preset == "cosine_bump") {
            const Field shape = cosine_shape(grid);
            return {affine(shape, in.theta_mean, in.theta_amp), affine(shape, in.phi_mean, in.phi_amp)};
        }
        if (in.preset == "random_smooth") {
            return {affine(random_smooth_field(grid, in.seed, in.modes), in.theta_mean, in.theta_amp),
                    affine(random_smooth_field(grid, in.seed + 1, in.modes), in.phi_mean, in.phi_amp)};
        }
        if (in.preset == "steady")
            return {Field(grid, cfg.potential.eval(in.phi_star, 1)), Field(grid, in.phi_star)};
        if (in.preset == "file") {
            if (in.theta_file.empty() || in.phi_file.empty())
                throw ConfigError("initial: file preset needs theta_file and phi_file");
            FieldSnapshot th = load_field(in.theta_file);
            FieldSnapshot ph = load_field(in.phi_file);
            if (!(th.field.grid() == grid) || !(ph.field.grid() == grid))
                throw ConfigError("initial: snapshot grid does not match [grid]");
            return {std::move(th.field), std::move(ph.field)};
        }
        throw ConfigError("initial: unknown preset '" + in.preset + "'");
    };

    auto [theta, phi] = make();
    State s = make_initial_state(cfg.t0, std::move(theta), std::move(phi));
    if (in.phi_t0 == "equation")
        s.phi_t = initial_phase_rate(s.theta, s.phi, cfg.potential);
    return s;
}

} // namespace fremond
