#pragma once

#include <optional>
#include <vector>

#include "fremond/stepper.hpp"

namespace fremond {

struct RelEnergyConfig {
    /// Weight of the squared L1 distance; must dominate the -lambda L2 term on the working domain.
    double M = 10.0;
};

struct RelEnergyReport {
    double t = 0.0;
    double E_rel = 0.0;
    double gradient_term = 0.0;
    double l1_term = 0.0;
    /// -lambda ||phi - phi_ref||_L2^2 (nonpositive).
    double l2_term = 0.0;
    double bregman_term = 0.0;
    double lambda_term = 0.0;
};

/// Pointwise theta - theta_ref - theta_ref (log theta - log theta_ref). Throws NonpositiveTemperature.
Field lambda_dist(const Field& theta, const Field& theta_ref);

RelEnergyReport relative_energy(const State& state, const State& ref, const RelEnergyConfig& cfg,
                                const Potential& potential);

/// E_rel - 1/4 ||grad dphi||^2 - ||dphi||_L1^2 - (Bregman + int Lambda); nonnegative when M is large enough.
double coercivity_check(const State& state, const State& ref, const RelEnergyConfig& cfg, const Potential& potential);

/// int kappa theta_ref |grad log theta - grad log theta_ref|^2 + |sqrt(theta_ref/theta) phi_t - sqrt(theta/theta_ref) phi_t_ref|^2.
double dissipation_W(const State& state, const State& ref, double kappa);

/// max|phi_t_ref| + max(phi_t_ref^2 / theta_ref) + 1.
double k_factor(const State& ref);

/// Series of relative energy, dissipation and amplification along a pair of runs.
struct GronwallSeries {
    double dt = 0.0;
    std::vector<double> times;
    std::vector<double> E_rel;
    std::vector<double> W;
    std::vector<double> K;
};

struct GronwallReport {
    double multiplier = 1.0;
    std::vector<double> times;
    std::vector<double> E_rel, W, K;
    std::vector<double> lhs, rhs, margin;
    double min_margin = 0.0;
};

/**
 * Discrete Gronwall envelope with the amplification scaled by c = multiplier:
 *   lhs(n) = E(tn) + sum_{k=1..n} dt W_k exp(c sum_{j=k..n} dt K_j)
 *   rhs(n) = E(t0) exp(c sum_{k=1..n} dt K_k)
 * margin = rhs - lhs.
 */
GronwallReport evaluate_gronwall(const GronwallSeries& series, double multiplier);

/**
 * Smallest multiplier c in [0, c_max] for which every margin of the series is
 * nonnegative, by bisection to relative precision 1e-6. Returns nullopt when
 * even c_max does not close the envelope.
 */
std::optional<double> fit_gronwall_multiplier(const GronwallSeries& series, double c_max = 100.0);

class GronwallMonitor {
public:
    GronwallMonitor(RelEnergyConfig cfg, const Potential& potential, double kappa, double dt);
    /// Throws GridMismatch when the two states disagree in grid or time.
    void push(const State& state, const State& ref);
    const GronwallSeries& series() const { return series_; }

private:
    RelEnergyConfig cfg_;
    const Potential* potential_;
    double kappa_;
    GronwallSeries series_;
};

GronwallSeries gronwall_series(const Trajectory& traj, const Trajectory& ref, const RelEnergyConfig& cfg,
                               const Potential& potential);
GronwallReport gronwall_check(const Trajectory& traj, const Trajectory& ref, const RelEnergyConfig& cfg,
                              const Potential& potential, double multiplier);

/// 1/2 (||phi_t||_H1^2 + kappa ||theta||_H1^2 + ||phi||_L2^2 + ||Delta phi||_L2^2).
double xi_monitor(const State& state, double kappa);

/// First index whose xi exceeds the ceiling, if any.
std::optional<std::size_t> xi_blowup(const Trajectory& traj, double kappa, double ceiling = 1e3);

/// ||log theta - log theta_ref||_L1^2 and the bound c int Lambda with c = 2 |Omega| / min(theta, theta_ref).
struct LogDistanceBound {
    double lhs = 0.0;
    double rhs = 0.0;
    bool holds() const { return lhs <= rhs; }
};
LogDistanceBound log_distance_bound(const Field& theta, const Field& theta_ref);

} // namespace fremond
