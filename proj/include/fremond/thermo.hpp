#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fremond/stepper.hpp"

namespace fremond {

struct EnergyReport {
    double t = 0.0;
    double E_total = 0.0;
    double E_gradient = 0.0;
    double E_potential = 0.0;
    double E_thermal = 0.0;
    /// integral of log theta + phi.
    double entropy_S = 0.0;
    /// integral of theta log theta.
    double orlicz = 0.0;
    double theta_min = 0.0;
    double phi_min = 0.0;
};

/// Total energy split into its parts plus the entropy and Orlicz scalars. Throws NonpositiveTemperature.
EnergyReport energy(const State& state, const Potential& potential);

/// integral of (theta)^p over the domain.
double lp_power(const Field& theta, double p);

/**
 * Energy balance along a run:
 *   margin(n) = E(t0) - E(tn) - eps sum_{k=1..n} dt int (theta^k)^p,
 * and the per-step increase E(t_k) - E(t_{k-1}) + eps dt int (theta^k)^p.
 * Both are zero at n = 0.
 */
struct EnergyCheck {
    std::vector<double> times;
    std::vector<double> energy;
    std::vector<double> margin;
    std::vector<double> increase;
    /// sum of eps dt int theta^p, i.e. eps ||theta||_{L^p(Omega x (0,T))}^p.
    double dissipated = 0.0;
};

/// Streaming form of energy_inequality_check.
class EnergyMonitor {
public:
    EnergyMonitor(const Potential& potential, double epsilon, double p, double dt);
    void push(const State& s);
    const EnergyCheck& result() const { return check_; }

private:
    const Potential* potential_;
    double epsilon_, p_, dt_;
    EnergyCheck check_;
};

EnergyCheck energy_inequality_check(const Trajectory& traj, const Potential& potential);

/// Analytic nonnegative test functions for the entropy inequality.
class TestFunction {
public:
    enum class Kind { One, Cosine, DampedCosine };

    static TestFunction one() { return TestFunction(Kind::One); }
    /// 1 + cos(pi x / L1)/2 (times cos(pi y / L2) in 2D).
    static TestFunction cosine() { return TestFunction(Kind::Cosine); }
    /// e^{-t} (1 + cos(pi x / L1)/2 ...).
    static TestFunction damped_cosine() { return TestFunction(Kind::DampedCosine); }
    /// "one", "cosine" or "damped_cosine"; throws ConfigError otherwise.
    static TestFunction parse(const std::string& name);

    Field at(const Grid& grid, double t) const;
    /// Centered difference (v(t + dt/2) - v(t - dt/2)) / dt.
    Field time_derivative(const Grid& grid, double t, double dt) const;
    std::string name() const;

private:
    explicit TestFunction(Kind k) : kind_(k) {}
    Kind kind_;
};

struct EntropyCheckReport {
    std::string test_function;
    std::vector<double> times;
    std::vector<double> lhs;
    /// RHS - LHS of the discrete entropy balance; margin[0] = 0.
    std::vector<double> margins;
    double min_margin = 0.0;
};

/**
 * Discrete transcription of the weak entropy inequality against a test function v:
 *   LHS(n) = -int v(tn)(log theta^n + phi^n) + int v(t0)(log theta^0 + phi^0)
 *            + sum_{k=1..n} dt int v(tk)(kappa |grad log theta^k|^2 + (phi_t^k)^2/theta^k - eps (theta^k)^{p-1})
 *   RHS(n) = sum_{k=1..n} dt int (kappa grad log theta^k . grad v(tk) - d_t v(tk)(log theta^k + phi^k))
 * Time sums use the right endpoint of each interval, matching the implicit step
 * and the backward-difference phi_t. The eps term is the regularization's
 * entropy sink; with eps = 0 this is the limit-system inequality.
 */
class EntropyMonitor {
public:
    EntropyMonitor(TestFunction fn, double kappa, double epsilon, double p, double dt);
    /// Throws NonpositiveTemperature.
    void push(const State& s);
    const EntropyCheckReport& result() const { return report_; }

private:
    TestFunction fn_;
    double kappa_, epsilon_, p_, dt_;
    double boundary0_ = 0.0;
    double lhs_sum_ = 0.0;
    double rhs_sum_ = 0.0;
    EntropyCheckReport report_;
};

EntropyCheckReport entropy_inequality_check(const Trajectory& traj, const TestFunction& fn, double kappa);

struct FloorsReport {
    std::vector<double> times;
    std::vector<double> theta_min, theta_floor;
    std::vector<double> phi_min, phi_floor;
    std::vector<bool> theta_pass, phi_pass;
    double K = 0.0;
    double tolerance = 0.0;

    bool all_pass() const;
    /// Index of the first failing row, if any.
    std::optional<std::size_t> first_failure() const;
};

/// Streaming floors check; the first pushed state fixes min theta_0 and K = max(0, -min phi_0).
class FloorsMonitor {
public:
    FloorsMonitor(double p, double lambda, double tolerance = 1e-10);
    void push(const State& s);
    const FloorsReport& result() const { return report_; }

private:
    double p_, lambda_;
    std::optional<PositivityFloorTrack> track_;
    double t0_ = 0.0;
    FloorsReport report_;
};

FloorsReport floors_check(const Trajectory& traj, double p, double lambda, double tolerance = 1e-10);

} // namespace fremond
