#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "fremond/errors.hpp"
#include "fremond/stepper.hpp"
#include "support.hpp"

using namespace fremond;

namespace {

// Root of an increasing scalar function by bisection.
template <class F>
double bisect(F&& f, double lo, double hi)
{
    for (int k = 0; k < 200; ++k) {
        const double mid = 0.5 * (lo + hi);
        (f(mid) > 0.0 ? hi : lo) = mid;
    }
    return 0.5 * (lo + hi);
}

double signed_pow(double x, double p) { return std::copysign(std::pow(std::abs(x), p), x); }

struct Scalar {
    double theta, phi;
};

// One step of the scheme on a spatially uniform state, solved independently of the library.
Scalar uniform_step(double theta_n, double phi_n, const SchemeConfig& cfg, const Potential& pot)
{
    const double lam = pot.lambda();
    double theta_bar = theta_n, phi = phi_n, theta = theta_n;
    for (int it = 0; it < 200; ++it) {
        phi = cfg.freeze_phase
                  ? phi_n
                  : bisect([&](double y) { return y - phi_n + cfg.dt * (pot.convex(y, 1) - 2 * lam * phi_n - theta_bar); },
                           -20.0, 20.0);
        const double d = (phi - phi_n) / cfg.dt;
        theta = bisect(
            [&](double th) { return th - theta_n + cfg.dt * (cfg.epsilon * signed_pow(th, cfg.p) + th * d - d * d); },
            1e-300, 50.0);
        if (std::abs(theta - theta_bar) <= 1e-15 * theta)
            break;
        theta_bar = theta;
    }
    return {theta, phi};
}

SchemeConfig tight(double dt, double eps)
{
    SchemeConfig cfg;
    cfg.dt = dt;
    cfg.epsilon = eps;
    cfg.fp_tol = 1e-13;
    cfg.newton_tol = 1e-14;
    return cfg;
}

} // namespace

TEST_CASE("uniform step matches a scalar oracle")
{
    const Potential pot = Potential::double_well();
    testing::Rng rng(31);
    for (int trial = 0; trial < 20; ++trial) {
        const SchemeConfig cfg = tight(rng.uniform(1e-4, 1e-2), trial % 3 ? 1e-2 : 0.0);
        const double theta0 = rng.uniform(0.2, 2.0), phi0 = rng.uniform(-1.5, 1.5);
        const Grid g = trial % 4 ? Grid::line(6) : Grid::box(3, 3);
        const State s = step(testing::uniform_state(g, theta0, phi0), cfg, pot);
        const Scalar ref = uniform_step(theta0, phi0, cfg, pot);
        for (std::size_t k = 0; k < g.size(); ++k) {
            CHECK(s.theta[k] == doctest::Approx(ref.theta).epsilon(1e-10));
            CHECK(s.phi[k] == doctest::Approx(ref.phi).epsilon(1e-10));
            CHECK(s.phi_t[k] == doctest::Approx((ref.phi - phi0) / cfg.dt).epsilon(1e-7));
        }
        CHECK(s.t == doctest::Approx(cfg.dt));
    }
}

TEST_CASE("sub-steps match scalar oracles")
{
    const Potential pot = Potential::double_well();
    const SchemeConfig cfg = tight(1e-2, 0.5);
    const State prev = testing::uniform_state(Grid::line(5), 0.8, 0.3);
    const Field theta_bar(prev.theta.grid(), 1.3);
    const Field phi = phase_step(prev, theta_bar, cfg, pot);
    const double phi_ref = bisect(
        [&](double y) { return y - 0.3 + cfg.dt * (pot.convex(y, 1) - 2 * pot.lambda() * 0.3 - 1.3); }, -5, 5);
    CHECK(phi[2] == doctest::Approx(phi_ref).epsilon(1e-12));

    const Field theta = heat_step(prev, phi, cfg);
    const double d = (phi_ref - 0.3) / cfg.dt;
    const double theta_ref = bisect(
        [&](double th) { return th - 0.8 + cfg.dt * (0.5 * std::pow(th, 4.0) + th * d - d * d); }, 1e-12, 10);
    CHECK(theta[4] == doctest::Approx(theta_ref).epsilon(1e-12));
}

TEST_CASE("steady state is an exact fixed point")
{
    const Potential pot = Potential::double_well();
    const double phi_star = 1.1;
    const double theta_star = pot.eval(phi_star, 1);
    CHECK(theta_star == doctest::Approx(0.924));
    SchemeConfig cfg = tight(1e-3, 0.0);
    const State s0 = testing::uniform_state(Grid::line(16), theta_star, phi_star);
    StepStats stats;
    const State s1 = step(s0, cfg, pot, &stats);
    CHECK(stats.fp_iterations == 1);
    for (std::size_t k = 0; k < 16; ++k) {
        CHECK(std::abs(s1.theta[k] - theta_star) < 1e-14);
        CHECK(std::abs(s1.phi[k] - phi_star) < 1e-14);
        CHECK(std::abs(s1.phi_t[k]) < 1e-11);
    }
}

TEST_CASE("uniform data stays uniform")
{
    const Potential flat = Potential::polynomial({2.0}, 0.0);
    SchemeConfig cfg = tight(1e-3, 1e-3);
    const SimulationResult r = simulate(testing::uniform_state(Grid::box(6, 5), 1.2, -0.4), cfg, flat, 0.05);
    REQUIRE(r.ok());
    for (const State& s : r.trajectory.states) {
        CHECK(s.theta.max() - s.theta.min() <= 1e-13);
        CHECK(s.phi.max() - s.phi.min() <= 1e-13);
    }
}

TEST_CASE("uniform decay follows the closed form")
{
    // theta' = -eps theta^p with phi frozen: theta = (theta0^{1-p} + (p-1) eps t)^{-1/(p-1)}.
    const Potential pot = Potential::double_well();
    for (double dt : {1e-2, 5e-3, 2.5e-3}) {
        SchemeConfig cfg = tight(dt, 1.0);
        cfg.freeze_phase = true;
        const SimulationResult r = simulate(testing::uniform_state(Grid::line(4), 1.5, 0.2), cfg, pot, 1.0);
        REQUIRE(r.ok());
        double worst = 0.0;
        for (const State& s : r.trajectory.states) {
            const double exact = std::pow(std::pow(1.5, -3.0) + 3.0 * s.t, -1.0 / 3.0);
            worst = std::max(worst, std::abs(s.theta[0] - exact));
            CHECK(s.phi[0] == 0.2);
        }
        CHECK(worst < 5 * dt);
        CHECK(worst > 0.0);
    }
}

TEST_CASE("step results are consistent with the sub-steps")
{
    const Potential pot = Potential::double_well();
    testing::Rng rng(41);
    for (int trial = 0; trial < 12; ++trial) {
        const Grid g = trial % 3 ? Grid::line(24) : Grid::box(10, 8);
        Field theta = testing::smooth_field(g, rng, 0.4);
        for (std::size_t k = 0; k < theta.size(); ++k)
            theta[k] += 1.0;
        const State prev{0.0, theta, testing::smooth_field(g, rng, 0.8), Field(g)};
        const SchemeConfig cfg = tight(2e-4, 1e-3);
        const State next = step(prev, cfg, pot);
        const Field phi = phase_step(prev, next.theta, cfg, pot);
        const Field th = heat_step(prev, next.phi, cfg);
        for (std::size_t k = 0; k < g.size(); ++k) {
            CHECK(std::abs(phi[k] - next.phi[k]) < 1e-10);
            CHECK(std::abs(th[k] - next.theta[k]) < 1e-10);
        }
    }
}

TEST_CASE("run bookkeeping")
{
    const Potential pot = Potential::double_well();
    SchemeConfig cfg = tight(1e-3, 1e-3);
    const State s0 = testing::uniform_state(Grid::line(8), 1.0, 0.0);
    const SimulationResult none = simulate(s0, cfg, pot, 0.0);
    CHECK(none.ok());
    CHECK(none.trajectory.size() == 1);

    const SimulationResult r = simulate(s0, cfg, pot, 0.01);
    CHECK(r.trajectory.size() == 11);
    CHECK(r.trajectory.back().t == doctest::Approx(0.01));

    CHECK(step_count(0.0, 1.0, 0.1) == 10);
    CHECK(step_count(0.5, 0.5, 0.1) == 0);
    CHECK_THROWS_AS(step_count(0.0, 1.0, 0.3), ConfigError);
    CHECK_THROWS_AS(step_count(1.0, 0.0, 0.1), ConfigError);
}

TEST_CASE("solver failure reports the step index")
{
    const Potential pot = Potential::double_well();
    SchemeConfig cfg = tight(1e-2, 1e-3);
    cfg.newton_max_iter = 1;
    State s0 = testing::uniform_state(Grid::line(8), 1.0, 0.5);
    const SimulationResult r = simulate(s0, cfg, pot, 0.05);
    REQUIRE(!r.ok());
    CHECK(r.failure->step_index == 1);
    CHECK(r.failure->kind == "NewtonDiverged");
    CHECK(r.trajectory.size() == 1);
}

TEST_CASE("scheme and state validation")
{
    SchemeConfig cfg;
    cfg.p = 3.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg.epsilon = 0.0;
    CHECK_NOTHROW(cfg.validate());
    cfg.kappa = 0.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);

    const Grid g = Grid::line(4);
    State s = testing::uniform_state(g, 1.0, 0.0);
    CHECK_NOTHROW(validate_state(s));
    s.theta[2] = 0.0;
    CHECK_THROWS_AS(validate_state(s), NonpositiveTemperature);
    s.theta[2] = 1.0;
    s.phi[1] = std::nan("");
    CHECK_THROWS_AS(validate_state(s), ValidationFailed);
    s.phi = Field(Grid::line(5));
    CHECK_THROWS_AS(validate_state(s), GridMismatch);
    CHECK_THROWS_AS(make_initial_state(0.0, Field(g, -1.0), Field(g)), NonpositiveTemperature);
}

TEST_CASE("initial phase rate")
{
    const Potential pot = Potential::double_well();
    const Grid g = Grid::line(8);
    const Field r = initial_phase_rate(Field(g, 0.7), Field(g, 0.5), pot);
    for (std::size_t k = 0; k < 8; ++k)
        CHECK(r[k] == doctest::Approx(0.7 - pot.eval(0.5, 1)));
}

TEST_CASE("positivity floor")
{
    // p = 2 gives h' = -3/2 h^2, so h = h0 / (1 + 3/2 h0 t).
    for (double t : {0.0, 0.1, 1.0, 7.0})
        CHECK(positivity_floor(t, 0.8, 2.0) == doctest::Approx(0.8 / (1 + 1.2 * t)).epsilon(1e-10));

    double prev = 2.0;
    PositivityFloorTrack track(2.0, 4.0);
    for (int k = 1; k <= 40; ++k) {
        const double t = 0.05 * k;
        const double h = positivity_floor(t, 2.0, 4.0);
        CHECK(h > 0.0);
        CHECK(h < prev);
        CHECK(track.at(t) == doctest::Approx(h).epsilon(1e-9));
        prev = h;
    }
    CHECK_THROWS_AS(track.at(0.5), std::invalid_argument);
    CHECK_THROWS_AS(positivity_floor(1.0, 0.0, 4.0), std::invalid_argument);
}

TEST_CASE("phase floor")
{
    CHECK(phase_floor(1.0, 1.0, 1.0) == doctest::Approx(-std::exp(2.0)));
    CHECK(phase_floor(0.0, 0.3, 4.0) == doctest::Approx(-0.3));
    CHECK(phase_floor(5.0, 0.0, 4.0) == 0.0);
}
