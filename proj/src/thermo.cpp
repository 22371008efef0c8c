#include "fremond/thermo.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "fremond/errors.hpp"

namespace fremond {

namespace {

void require_positive(const Field& theta)
{
    for (std::size_t k = 0; k < theta.size(); ++k)
        if (!(theta[k] > 0.0)) {
            std::ostringstream os;
            os << "theta = " << theta[k] << " at cell " << k;
            throw NonpositiveTemperature(os.str());
        }
}

Field log_field(const Field& theta)
{
    Field out(theta.grid());
    for (std::size_t k = 0; k < theta.size(); ++k)
        out[k] = std::log(theta[k]);
    return out;
}

} // namespace

double lp_power(const Field& theta, double p)
{
    double s = 0.0;
    for (double v : theta.values())
        s += std::pow(std::abs(v), p);
    return s * theta.grid().cell_volume();
}

EnergyReport energy(const State& state, const Potential& potential)
{
    require_positive(state.theta);
    const Grid& g = state.theta.grid();
    EnergyReport r;
    r.t = state.t;
    r.E_gradient = 0.5 * integrate(grad_sq(state.phi));

    double pot = 0.0, thermal = 0.0, ent = 0.0, orl = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k) {
        const double th = state.theta[k];
        const double lg = std::log(th);
        pot += potential.eval(state.phi[k], 0);
        thermal += th;
        ent += lg + state.phi[k];
        orl += th * lg;
    }
    const double vol = g.cell_volume();
    r.E_potential = pot * vol;
    r.E_thermal = thermal * vol;
    r.entropy_S = ent * vol;
    r.orlicz = orl * vol;
    r.E_total = r.E_gradient + r.E_potential + r.E_thermal;
    r.theta_min = state.theta.min();
    r.phi_min = state.phi.min();
    return r;
}

EnergyMonitor::EnergyMonitor(const Potential& potential, double epsilon, double p, double dt)
    : potential_(&potential), epsilon_(epsilon), p_(p), dt_(dt)
{
}

void EnergyMonitor::push(const State& s)
{
    const double e = energy(s, *potential_).E_total;
    if (check_.times.empty()) {
        check_.times.push_back(s.t);
        check_.energy.push_back(e);
        check_.margin.push_back(0.0);
        check_.increase.push_back(0.0);
        return;
    }
    const double sink = epsilon_ > 0.0 ? epsilon_ * dt_ * lp_power(s.theta, p_) : 0.0;
    check_.dissipated += sink;
    check_.increase.push_back(e - check_.energy.back() + sink);
    check_.times.push_back(s.t);
    check_.energy.push_back(e);
    check_.margin.push_back(check_.energy.front() - e - check_.dissipated);
}

EnergyCheck energy_inequality_check(const Trajectory& traj, const Potential& potential)
{
    EnergyMonitor m(potential, traj.config.epsilon, traj.config.p, traj.config.dt);
    for (const auto& s : traj.states)
        m.push(s);
    return m.result();
}

TestFunction TestFunction::parse(const std::string& name)
{
    if (name == "one")
        return one();
    if (name == "cosine")
        return cosine();
    if (name == "damped_cosine")
        return damped_cosine();
    throw ConfigError("unknown test function '" + name + "' (expected one, cosine, damped_cosine)");
}

std::string TestFunction::name() const
{
    switch (kind_) {
    case Kind::One:
        return "one";
    case Kind::Cosine:
        return "cosine";
    case Kind::DampedCosine:
        return "damped_cosine";
    }
    return "unknown";
}

Field TestFunction::at(const Grid& grid, double t) const
{
    if (kind_ == Kind::One)
        return Field(grid, 1.0);
    const double amp = kind_ == Kind::DampedCosine ? std::exp(-t) : 1.0;
    const double kx = std::numbers::pi / grid.extent(0);
    const double ky = std::numbers::pi / grid.extent(1);
    const bool two_d = grid.dim() == 2;
    return Field::sample(grid, [&](double x, double y) {
        const double shape = std::cos(kx * x) * (two_d ? std::cos(ky * y) : 1.0);
        return amp * (1.0 + 0.5 * shape);
    });
}

Field TestFunction::time_derivative(const Grid& grid, double t, double dt) const
{
    if (kind_ != Kind::DampedCosine)
        return Field(grid, 0.0);
    Field hi = at(grid, t + 0.5 * dt);
    const Field lo = at(grid, t - 0.5 * dt);
    for (std::size_t k = 0; k < hi.size(); ++k)
        hi[k] = (hi[k] - lo[k]) / dt;
    return hi;
}

EntropyMonitor::EntropyMonitor(TestFunction fn, double kappa, double epsilon, double p, double dt)
    : fn_(fn), kappa_(kappa), epsilon_(epsilon), p_(p), dt_(dt)
{
    report_.test_function = fn_.name();
}

void EntropyMonitor::push(const State& s)
{
    require_positive(s.theta);
    const Grid& g = s.theta.grid();
    const std::size_t n = g.size();
    const Field v = fn_.at(g, s.t);
    const Field lg = log_field(s.theta);

    double boundary = 0.0;
    for (std::size_t k = 0; k < n; ++k)
        boundary += v[k] * (lg[k] + s.phi[k]);
    boundary *= g.cell_volume();

    if (report_.times.empty()) {
        boundary0_ = boundary;
        report_.times.push_back(s.t);
        report_.lhs.push_back(0.0);
        report_.margins.push_back(0.0);
        report_.min_margin = 0.0;
        return;
    }

    const Field glog = grad_sq(lg);
    const Field gdot = grad_dot(lg, v);
    const Field vt = fn_.time_derivative(g, s.t, dt_);
    double production = 0.0, flux = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double th = s.theta[k];
        double prod = kappa_ * glog[k] + s.phi_t[k] * s.phi_t[k] / th;
        if (epsilon_ > 0.0)
            prod -= epsilon_ * std::pow(th, p_ - 1.0);
        production += v[k] * prod;
        flux += kappa_ * gdot[k] - vt[k] * (lg[k] + s.phi[k]);
    }
    lhs_sum_ += dt_ * production * g.cell_volume();
    rhs_sum_ += dt_ * flux * g.cell_volume();

    const double lhs = -boundary + boundary0_ + lhs_sum_;
    const double margin = rhs_sum_ - lhs;
    report_.times.push_back(s.t);
    report_.lhs.push_back(lhs);
    report_.margins.push_back(margin);
    report_.min_margin = std::min(report_.min_margin, margin);
}

EntropyCheckReport entropy_inequality_check(const Trajectory& traj, const TestFunction& fn, double kappa)
{
    EntropyMonitor m(fn, kappa, traj.config.epsilon, traj.config.p, traj.config.dt);
    for (const auto& s : traj.states)
        m.push(s);
    return m.result();
}

bool FloorsReport::all_pass() const { return !first_failure().has_value(); }

std::optional<std::size_t> FloorsReport::first_failure() const
{
    for (std::size_t i = 0; i < times.size(); ++i)
        if (!theta_pass[i] || !phi_pass[i])
            return i;
    return std::nullopt;
}

FloorsMonitor::FloorsMonitor(double p, double lambda, double tolerance) : p_(p), lambda_(lambda)
{
    report_.tolerance = tolerance;
}

void FloorsMonitor::push(const State& s)
{
    const double tmin = s.theta.min();
    const double pmin = s.phi.min();
    if (!track_) {
        if (!(tmin > 0.0))
            throw NonpositiveTemperature("initial temperature must be positive for the floors check");
        track_.emplace(tmin, p_, s.t);
        t0_ = s.t;
        report_.K = std::max(0.0, -pmin);
    }
    const double tf = track_->at(s.t);
    const double pf = phase_floor(s.t - t0_, report_.K, lambda_);
    report_.times.push_back(s.t);
    report_.theta_min.push_back(tmin);
    report_.theta_floor.push_back(tf);
    report_.phi_min.push_back(pmin);
    report_.phi_floor.push_back(pf);
    report_.theta_pass.push_back(tmin >= tf - report_.tolerance);
    report_.phi_pass.push_back(pmin >= pf - report_.tolerance);
}

FloorsReport floors_check(const Trajectory& traj, double p, double lambda, double tolerance)
{
    FloorsMonitor m(p, lambda, tolerance);
    for (const auto& s : traj.states)
        m.push(s);
    return m.result();
}

} // namespace fremond
