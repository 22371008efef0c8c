#include "fremond/relenergy.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "fremond/errors.hpp"

namespace fremond {

namespace {

void require_positive(const Field& theta, const char* which)
{
    for (std::size_t k = 0; k < theta.size(); ++k)
        if (!(theta[k] > 0.0)) {
            std::ostringstream os;
            os << which << " = " << theta[k] << " at cell " << k;
            throw NonpositiveTemperature(os.str());
        }
}

Field difference(const Field& a, const Field& b)
{
    require_same_grid(a, b);
    Field d = a;
    for (std::size_t k = 0; k < d.size(); ++k)
        d[k] -= b[k];
    return d;
}

} // namespace

Field lambda_dist(const Field& theta, const Field& theta_ref)
{
    require_same_grid(theta, theta_ref);
    require_positive(theta, "theta");
    require_positive(theta_ref, "theta_ref");
    Field out(theta.grid());
    for (std::size_t k = 0; k < out.size(); ++k) {
        const double a = theta[k], b = theta_ref[k];
        out[k] = a - b - b * std::log(a / b);
    }
    return out;
}

RelEnergyReport relative_energy(const State& state, const State& ref, const RelEnergyConfig& cfg,
                                const Potential& potential)
{
    const Field dphi = difference(state.phi, ref.phi);
    RelEnergyReport r;
    r.t = state.t;
    r.gradient_term = 0.5 * integrate(grad_sq(dphi));
    const double l1 = norm(dphi, NormKind::L1);
    const double l2 = norm(dphi, NormKind::L2);
    r.l1_term = cfg.M * l1 * l1;
    r.l2_term = -potential.lambda() * l2 * l2;

    double breg = 0.0;
    for (std::size_t k = 0; k < dphi.size(); ++k) {
        const double a = state.phi[k], b = ref.phi[k];
        breg += potential.convex(a, 0) - potential.convex(b, 0) - potential.convex(b, 1) * (a - b);
    }
    r.bregman_term = breg * dphi.grid().cell_volume();
    r.lambda_term = integrate(lambda_dist(state.theta, ref.theta));
    r.E_rel = r.gradient_term + r.l1_term + r.l2_term + r.bregman_term + r.lambda_term;
    return r;
}

double coercivity_check(const State& state, const State& ref, const RelEnergyConfig& cfg, const Potential& potential)
{
    const RelEnergyReport r = relative_energy(state, ref, cfg, potential);
    const Field dphi = difference(state.phi, ref.phi);
    const double l1 = norm(dphi, NormKind::L1);
    // 1/4 ||grad dphi||^2 is half of gradient_term.
    return r.E_rel - 0.5 * r.gradient_term - l1 * l1 - (r.bregman_term + r.lambda_term);
}

double dissipation_W(const State& state, const State& ref, double kappa)
{
    require_same_grid(state.theta, ref.theta);
    require_positive(state.theta, "theta");
    require_positive(ref.theta, "theta_ref");
    const Grid& g = state.theta.grid();
    Field dlog(g);
    for (std::size_t k = 0; k < dlog.size(); ++k)
        dlog[k] = std::log(state.theta[k]) - std::log(ref.theta[k]);
    const Field gl = grad_sq(dlog);

    double s = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k) {
        const double th = state.theta[k], tr = ref.theta[k];
        const double mixed = std::sqrt(tr / th) * state.phi_t[k] - std::sqrt(th / tr) * ref.phi_t[k];
        s += kappa * tr * gl[k] + mixed * mixed;
    }
    return s * g.cell_volume();
}

double k_factor(const State& ref)
{
    require_positive(ref.theta, "theta_ref");
    double max_rate = 0.0, max_ratio = 0.0;
    for (std::size_t k = 0; k < ref.phi_t.size(); ++k) {
        const double r = ref.phi_t[k];
        max_rate = std::max(max_rate, std::abs(r));
        max_ratio = std::max(max_ratio, r * r / ref.theta[k]);
    }
    return max_rate + max_ratio + 1.0;
}

GronwallReport evaluate_gronwall(const GronwallSeries& s, double multiplier)
{
    GronwallReport r;
    r.multiplier = multiplier;
    r.times = s.times;
    r.E_rel = s.E_rel;
    r.W = s.W;
    r.K = s.K;
    const std::size_t n = s.times.size();
    r.lhs.resize(n);
    r.rhs.resize(n);
    r.margin.resize(n);
    if (n == 0)
        return r;

    // Running form: acc(n) = sum_{k<=n} dt W_k exp(c (S_n - S_{k-1})) with S_n = sum_{j<=n} dt K_j,
    // so acc(n) = exp(c dt K_n) (acc(n-1) + dt W_n).
    double acc = 0.0, exponent = 0.0;
    r.lhs[0] = s.E_rel[0];
    r.rhs[0] = s.E_rel[0];
    r.margin[0] = 0.0;
    r.min_margin = 0.0;
    for (std::size_t i = 1; i < n; ++i) {
        const double grow = multiplier * s.dt * s.K[i];
        acc = std::exp(grow) * (acc + s.dt * s.W[i]);
        exponent += grow;
        r.lhs[i] = s.E_rel[i] + acc;
        r.rhs[i] = s.E_rel[0] * std::exp(exponent);
        r.margin[i] = r.rhs[i] - r.lhs[i];
        r.min_margin = std::min(r.min_margin, r.margin[i]);
    }
    return r;
}

std::optional<double> fit_gronwall_multiplier(const GronwallSeries& series, double c_max)
{
    auto closes = [&](double c) { return evaluate_gronwall(series, c).min_margin >= 0.0; };
    if (closes(0.0))
        return 0.0;
    if (!closes(c_max))
        return std::nullopt;
    double lo = 0.0, hi = c_max;
    while (hi - lo > 1e-6 * hi) {
        const double mid = 0.5 * (lo + hi);
        (closes(mid) ? hi : lo) = mid;
    }
    return hi;
}

GronwallMonitor::GronwallMonitor(RelEnergyConfig cfg, const Potential& potential, double kappa, double dt)
    : cfg_(cfg), potential_(&potential), kappa_(kappa)
{
    series_.dt = dt;
}

void GronwallMonitor::push(const State& state, const State& ref)
{
    if (!(state.theta.grid() == ref.theta.grid()))
        throw GridMismatch("gronwall check: trajectories live on different grids");
    if (std::abs(state.t - ref.t) > 1e-12 * std::max(1.0, std::abs(ref.t)))
        throw GridMismatch("gronwall check: trajectories are sampled at different times");
    series_.times.push_back(ref.t);
    series_.E_rel.push_back(relative_energy(state, ref, cfg_, *potential_).E_rel);
    series_.W.push_back(dissipation_W(state, ref, kappa_));
    series_.K.push_back(k_factor(ref));
}

GronwallSeries gronwall_series(const Trajectory& traj, const Trajectory& ref, const RelEnergyConfig& cfg,
                               const Potential& potential)
{
    if (traj.size() != ref.size())
        throw GridMismatch("gronwall check: trajectories have different lengths");
    if (std::abs(traj.config.dt - ref.config.dt) > 1e-15)
        throw GridMismatch("gronwall check: trajectories use different dt");
    GronwallMonitor m(cfg, potential, ref.config.kappa, ref.config.dt);
    for (std::size_t i = 0; i < traj.size(); ++i)
        m.push(traj.states[i], ref.states[i]);
    return m.series();
}

GronwallReport gronwall_check(const Trajectory& traj, const Trajectory& ref, const RelEnergyConfig& cfg,
                              const Potential& potential, double multiplier)
{
    return evaluate_gronwall(gronwall_series(traj, ref, cfg, potential), multiplier);
}

double xi_monitor(const State& state, double kappa)
{
    const double rate = norm(state.phi_t, NormKind::H1);
    const double temp = norm(state.theta, NormKind::H1);
    const double phi = norm(state.phi, NormKind::L2);
    const double lap = norm(laplacian_neumann(state.phi), NormKind::L2);
    return 0.5 * (rate * rate + kappa * temp * temp + phi * phi + lap * lap);
}

std::optional<std::size_t> xi_blowup(const Trajectory& traj, double kappa, double ceiling)
{
    for (std::size_t i = 0; i < traj.size(); ++i)
        if (!(xi_monitor(traj.states[i], kappa) <= ceiling))
            return i;
    return std::nullopt;
}

LogDistanceBound log_distance_bound(const Field& theta, const Field& theta_ref)
{
    const Field lam = lambda_dist(theta, theta_ref);
    Field dlog(theta.grid());
    for (std::size_t k = 0; k < dlog.size(); ++k)
        dlog[k] = std::log(theta[k]) - std::log(theta_ref[k]);
    const double l1 = norm(dlog, NormKind::L1);
    const double delta = std::min(theta.min(), theta_ref.min());
    LogDistanceBound b;
    b.lhs = l1 * l1;
    b.rhs = 2.0 * theta.grid().measure() / delta * integrate(lam);
    return b;
}

} // namespace fremond
