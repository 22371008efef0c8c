#include "fremond/stepper.hpp"

#include <cmath>
#include <sstream>
#include <typeinfo>

#include "fremond/errors.hpp"
#include "fremond/linsolve.hpp"

namespace fremond {

namespace {

// (x)^p = |x|^{p-1} x and its derivative p |x|^{p-1}.
struct SignedPower {
    explicit SignedPower(double p) : p_(p), integer_(p == std::floor(p) && p >= 1.0 && p <= 8.0) {}

    double abs_pow_m1(double x) const
    {
        const double a = std::abs(x);
        if (!integer_)
            return std::pow(a, p_ - 1.0);
        double r = 1.0;
        for (int k = 1; k < static_cast<int>(p_); ++k)
            r *= a;
        return r;
    }
    double value(double x) const { return abs_pow_m1(x) * x; }
    double slope(double x) const { return p_ * abs_pow_m1(x); }

    double p_;
    bool integer_;
};

double l2(const Grid& g, std::span<const double> v)
{
    double s = 0.0;
    for (double x : v)
        s += x * x;
    return std::sqrt(s * g.cell_volume());
}

void require_finite(const Field& f, const char* what)
{
    if (!f.all_finite())
        throw NewtonDiverged(std::string(what) + " produced non-finite values");
}

} // namespace

void SchemeConfig::validate() const
{
    auto fail = [](const std::string& m) { throw ConfigError("scheme: " + m); };
    if (!(kappa > 0.0))
        fail("kappa must be positive");
    if (!(epsilon >= 0.0))
        fail("epsilon must be nonnegative");
    if (epsilon > 0.0 && !(p > 3.0))
        fail("p must exceed 3 when epsilon > 0");
    if (!(dt > 0.0))
        fail("dt must be positive");
    if (!(fp_tol > 0.0) || !(newton_tol > 0.0) || !(linear_tol > 0.0))
        fail("tolerances must be positive");
    if (fp_max_iter < 1 || newton_max_iter < 1 || linear_max_iter < 1)
        fail("iteration limits must be positive");
}

void validate_state(const State& s)
{
    require_same_grid(s.theta, s.phi);
    require_same_grid(s.theta, s.phi_t);
    if (!s.theta.all_finite() || !s.phi.all_finite() || !s.phi_t.all_finite())
        throw ValidationFailed("state contains non-finite values");
    for (std::size_t k = 0; k < s.theta.size(); ++k)
        if (!(s.theta[k] > 0.0)) {
            std::ostringstream os;
            os << "theta <= 0 at cell " << k << " (value " << s.theta[k] << ")";
            throw NonpositiveTemperature(os.str());
        }
}

State make_initial_state(double t0, Field theta, Field phi)
{
    Field rate(theta.grid());
    State s{t0, std::move(theta), std::move(phi), std::move(rate)};
    validate_state(s);
    return s;
}

Field initial_phase_rate(const Field& theta0, const Field& phi0, const Potential& potential)
{
    require_same_grid(theta0, phi0);
    Field out = laplacian_neumann(phi0);
    for (std::size_t k = 0; k < out.size(); ++k)
        out[k] += theta0[k] - potential.eval(phi0[k], 1);
    return out;
}

Field phase_step(const State& prev, const Field& theta_bar, const SchemeConfig& cfg, const Potential& potential,
                 int* iterations)
{
    require_same_grid(prev.phi, theta_bar);
    const Grid& g = prev.phi.grid();
    const std::size_t n = g.size();
    const double dt = cfg.dt;
    const double two_lambda = 2.0 * potential.lambda();

    Field phi = prev.phi;
    if (cfg.freeze_phase) {
        if (iterations)
            *iterations = 0;
        return phi;
    }

    std::vector<double> lap(n), r(n), shift(n), delta(n);
    for (int it = 0;; ++it) {
        apply_laplacian(g, phi.values(), lap);
        for (std::size_t k = 0; k < n; ++k)
            r[k] = phi[k] - prev.phi[k] +
                   dt * (-lap[k] + potential.convex(phi[k], 1) - two_lambda * prev.phi[k] - theta_bar[k]);
        const double res = l2(g, r);
        if (!std::isfinite(res))
            throw NewtonDiverged("phase step: residual is not finite");
        if (res <= cfg.newton_tol) {
            if (iterations)
                *iterations = it;
            return phi;
        }
        if (it == cfg.newton_max_iter) {
            std::ostringstream os;
            os << "phase step: residual " << res << " above tolerance after " << it << " Newton iterations";
            throw NewtonDiverged(os.str());
        }
        for (std::size_t k = 0; k < n; ++k) {
            shift[k] = 1.0 + dt * potential.convex(phi[k], 2);
            r[k] = -r[k];
            delta[k] = 0.0;
        }
        const auto ls = solve_shifted_laplacian(g, shift, dt, r, delta, cfg.linear_tol, cfg.linear_max_iter);
        if (!ls.converged)
            throw NewtonDiverged("phase step: linear solve failed");
        for (std::size_t k = 0; k < n; ++k)
            phi[k] += delta[k];
        require_finite(phi, "phase step");
    }
}

Field heat_step(const State& prev, const Field& phi_new, const SchemeConfig& cfg, int* iterations)
{
    require_same_grid(prev.theta, phi_new);
    const Grid& g = prev.theta.grid();
    const std::size_t n = g.size();
    const double dt = cfg.dt;
    const SignedPower pw(cfg.p);

    std::vector<double> d(n), lap(n), r(n), shift(n), delta(n);
    for (std::size_t k = 0; k < n; ++k)
        d[k] = (phi_new[k] - prev.phi[k]) / dt;

    Field theta = prev.theta;
    for (int it = 0;; ++it) {
        apply_laplacian(g, theta.values(), lap);
        for (std::size_t k = 0; k < n; ++k) {
            const double reg = cfg.epsilon > 0.0 ? cfg.epsilon * pw.value(theta[k]) : 0.0;
            r[k] = theta[k] - prev.theta[k] + dt * (-cfg.kappa * lap[k] + reg + theta[k] * d[k] - d[k] * d[k]);
        }
        const double res = l2(g, r);
        if (!std::isfinite(res))
            throw NewtonDiverged("heat step: residual is not finite");
        if (res <= cfg.newton_tol) {
            if (iterations)
                *iterations = it;
            break;
        }
        if (it == cfg.newton_max_iter) {
            std::ostringstream os;
            os << "heat step: residual " << res << " above tolerance after " << it << " Newton iterations";
            throw NewtonDiverged(os.str());
        }
        for (std::size_t k = 0; k < n; ++k) {
            const double reg = cfg.epsilon > 0.0 ? cfg.epsilon * pw.slope(theta[k]) : 0.0;
            shift[k] = 1.0 + dt * (d[k] + reg);
            r[k] = -r[k];
            delta[k] = 0.0;
        }
        const auto ls =
            solve_shifted_laplacian(g, shift, dt * cfg.kappa, r, delta, cfg.linear_tol, cfg.linear_max_iter);
        if (!ls.converged)
            throw NewtonDiverged("heat step: linear solve failed");
        for (std::size_t k = 0; k < n; ++k)
            theta[k] += delta[k];
        require_finite(theta, "heat step");
    }

    for (std::size_t k = 0; k < n; ++k)
        if (!(theta[k] > 0.0)) {
            std::ostringstream os;
            os << "heat step: theta = " << theta[k] << " at cell " << k << " (dt too large relative to |phi_t|)";
            throw PositivityLost(os.str());
        }
    return theta;
}

State step(const State& prev, const SchemeConfig& cfg, const Potential& potential, StepStats* stats)
{
    const Grid& g = prev.theta.grid();
    Field theta_bar = prev.theta;
    StepStats local;

    for (int k = 1; k <= cfg.fp_max_iter; ++k) {
        int pn = 0, hn = 0;
        Field phi = phase_step(prev, theta_bar, cfg, potential, &pn);
        Field theta = heat_step(prev, phi, cfg, &hn);
        local.fp_iterations = k;
        local.phase_newton += pn;
        local.heat_newton += hn;

        double diff = 0.0, ref = 0.0;
        for (std::size_t c = 0; c < theta.size(); ++c) {
            const double e = theta[c] - theta_bar[c];
            diff += e * e;
            ref += theta_bar[c] * theta_bar[c];
        }
        const double rel = std::sqrt(diff / ref);
        local.fp_residual = rel;

        if (rel <= cfg.fp_tol || cfg.freeze_phase) {
            Field rate(g);
            for (std::size_t c = 0; c < rate.size(); ++c)
                rate[c] = (phi[c] - prev.phi[c]) / cfg.dt;
            if (stats)
                *stats = local;
            return State{prev.t + cfg.dt, std::move(theta), std::move(phi), std::move(rate)};
        }
        theta_bar = std::move(theta);
    }
    std::ostringstream os;
    os << "fixed-point iteration stalled at relative change " << local.fp_residual << " after " << cfg.fp_max_iter
       << " iterations";
    throw FixedPointDiverged(os.str());
}

std::size_t step_count(double t0, double t_end, double dt)
{
    if (!(t_end >= t0))
        throw ConfigError("t_end must not precede the initial time");
    const double ratio = (t_end - t0) / dt;
    const double rounded = std::round(ratio);
    if (std::abs(ratio - rounded) > 1e-9 * std::max(1.0, rounded))
        throw ConfigError("(t_end - t0)/dt must be an integer");
    return static_cast<std::size_t>(rounded);
}

RunSummary run(const State& init, const SchemeConfig& cfg, const Potential& potential, double t_end,
               const StateObserver& observer)
{
    cfg.validate();
    validate_state(init);
    const std::size_t steps = step_count(init.t, t_end, cfg.dt);

    RunSummary summary;
    observer(init);
    summary.states = 1;

    State current = init;
    for (std::size_t n = 1; n <= steps; ++n) {
        try {
            State next = step(current, cfg, potential);
            next.t = init.t + static_cast<double>(n) * cfg.dt;
            current = std::move(next);
        } catch (const Error& e) {
            summary.failure = StepFailure{n, error_kind(e), e.what()};
            return summary;
        }
        observer(current);
        ++summary.states;
    }
    return summary;
}

SimulationResult simulate(const State& init, const SchemeConfig& cfg, const Potential& potential, double t_end)
{
    SimulationResult result;
    result.trajectory.config = cfg;
    const RunSummary s = run(init, cfg, potential, t_end,
                             [&](const State& st) { result.trajectory.states.push_back(st); });
    result.failure = s.failure;
    return result;
}

namespace {

double floor_rhs(double h, const SignedPower& pw) { return -pw.value(h) - 0.5 * h * h; }

double rk4(double h, double dt, const SignedPower& pw)
{
    const double k1 = floor_rhs(h, pw);
    const double k2 = floor_rhs(h + 0.5 * dt * k1, pw);
    const double k3 = floor_rhs(h + 0.5 * dt * k2, pw);
    const double k4 = floor_rhs(h + dt * k3, pw);
    return h + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

} // namespace

double positivity_floor(double t, double theta_min0, double p)
{
    if (!(theta_min0 > 0.0) || !(t >= 0.0))
        throw std::invalid_argument("positivity_floor needs theta_min0 > 0 and t >= 0");
    if (t == 0.0)
        return theta_min0;
    const SignedPower pw(p);
    constexpr int n = 10000;
    const double dt = t / n;
    double h = theta_min0;
    for (int k = 0; k < n; ++k)
        h = rk4(h, dt, pw);
    return h;
}

double phase_floor(double t, double K, double lambda) { return -K * std::exp(2.0 * lambda * t); }

PositivityFloorTrack::PositivityFloorTrack(double theta_min0, double p, double t0) : t_(t0), h_(theta_min0), p_(p)
{
    if (!(theta_min0 > 0.0))
        throw std::invalid_argument("positivity floor needs theta_min0 > 0");
}

double PositivityFloorTrack::at(double t)
{
    if (t < t_)
        throw std::invalid_argument("positivity floor track must advance monotonically");
    const SignedPower pw(p_);
    const double span = t - t_;
    if (span > 0.0) {
        const int n = static_cast<int>(std::ceil(span / 2.5e-4));
        const double dt = span / n;
        for (int k = 0; k < n; ++k)
            h_ = rk4(h_, dt, pw);
        t_ = t;
    }
    return h_;
}

std::string error_kind(const std::exception& e)
{
    if (dynamic_cast<const NewtonDiverged*>(&e))
        return "NewtonDiverged";
    if (dynamic_cast<const PositivityLost*>(&e))
        return "PositivityLost";
    if (dynamic_cast<const FixedPointDiverged*>(&e))
        return "FixedPointDiverged";
    if (dynamic_cast<const NonpositiveTemperature*>(&e))
        return "NonpositiveTemperature";
    if (dynamic_cast<const ValidationFailed*>(&e))
        return "ValidationFailed";
    if (dynamic_cast<const GridMismatch*>(&e))
        return "GridMismatch";
    if (dynamic_cast<const ConfigError*>(&e))
        return "ConfigError";
    if (dynamic_cast<const IoError*>(&e))
        return "IoError";
    return "Error";
}

} // namespace fremond
