#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "fremond/grid.hpp"
#include "fremond/potential.hpp"

namespace fremond {

struct SchemeConfig {
    double kappa = 1.0;
    double epsilon = 1e-3;
    double p = 4.0;
    double dt = 1e-3;
    double fp_tol = 1e-10;
    int fp_max_iter = 50;
    double newton_tol = 1e-11;
    int newton_max_iter = 30;
    double linear_tol = 1e-13;
    int linear_max_iter = 5000;
    /// Hold phi fixed (phi_t = 0) and advance only the heat equation.
    bool freeze_phase = false;

    /// Throws ConfigError when a field is out of range.
    void validate() const;
};

struct State {
    double t = 0.0;
    Field theta;
    Field phi;
    /// Backward difference (phi^n - phi^{n-1}) / dt; zero at the initial instant by default.
    Field phi_t;
};

/// Checks shared grid, finiteness and theta > 0 at every cell. Throws on violation.
void validate_state(const State& s);

/// Initial state with phi_t = 0.
State make_initial_state(double t0, Field theta, Field phi);
/// phi_1 = Delta phi_0 - F'(phi_0) + theta_0, the rate implied by the phase equation at t0.
Field initial_phase_rate(const Field& theta0, const Field& phi0, const Potential& potential);

struct Trajectory {
    std::vector<State> states;
    SchemeConfig config;

    bool empty() const { return states.empty(); }
    std::size_t size() const { return states.size(); }
    const State& front() const { return states.front(); }
    const State& back() const { return states.back(); }
};

/**
 * Convex-concave backward-Euler phase update
 *   (phi - phi^n)/dt - Delta phi + G'(phi) - 2 lambda phi^n = theta_bar,
 * solved by Newton on the dt-scaled residual
 *   r = phi - phi^n + dt (-Delta phi + G'(phi) - 2 lambda phi^n - theta_bar),
 * converged when ||r||_L2 <= newton_tol. Throws NewtonDiverged.
 */
Field phase_step(const State& prev, const Field& theta_bar, const SchemeConfig& cfg, const Potential& potential,
                 int* iterations = nullptr);

/**
 * Implicit heat update with d = (phi_new - phi^n)/dt:
 *   (theta - theta^n)/dt - kappa Delta theta + eps (theta)^p + theta d = d^2,
 * where (theta)^p = |theta|^{p-1} theta. Same dt-scaled residual convention as
 * phase_step. Throws NewtonDiverged, or PositivityLost if any cell ends <= 0.
 */
Field heat_step(const State& prev, const Field& phi_new, const SchemeConfig& cfg, int* iterations = nullptr);

struct StepStats {
    int fp_iterations = 0;
    int phase_newton = 0;
    int heat_newton = 0;
    double fp_residual = 0.0;
};

/// One time step: Picard iteration of theta_bar -> phase_step -> heat_step until the
/// relative L2 change of theta drops below fp_tol. Throws FixedPointDiverged.
State step(const State& prev, const SchemeConfig& cfg, const Potential& potential, StepStats* stats = nullptr);

struct StepFailure {
    std::size_t step_index = 0;
    std::string kind;
    std::string message;
};

struct SimulationResult {
    Trajectory trajectory;
    std::optional<StepFailure> failure;

    bool ok() const { return !failure.has_value(); }
};

using StateObserver = std::function<void(const State&)>;

struct RunSummary {
    std::size_t states = 0;
    std::optional<StepFailure> failure;
};

/// Number of steps from t0 to t_end; throws ConfigError unless (t_end - t0)/dt is integral within round-off.
std::size_t step_count(double t0, double t_end, double dt);

/// Streams every state (including the initial one) to the observer; stops on the first step error.
RunSummary run(const State& init, const SchemeConfig& cfg, const Potential& potential, double t_end,
               const StateObserver& observer);

SimulationResult simulate(const State& init, const SchemeConfig& cfg, const Potential& potential, double t_end);

/// Lower envelope h(t) of the temperature: h' = -(h)^p - h^2/2, h(0) = theta_min0,
/// classical RK4 with step t/10^4.
double positivity_floor(double t, double theta_min0, double p);

/// Lower bound -K e^{2 lambda t} on the order parameter.
double phase_floor(double t, double K, double lambda);

/// Incremental evaluation of positivity_floor along increasing times (RK4 substeps <= 2.5e-4).
class PositivityFloorTrack {
public:
    PositivityFloorTrack(double theta_min0, double p, double t0 = 0.0);
    double at(double t);

private:
    double t_;
    double h_;
    double p_;
};

/// Name of the concrete error class, e.g. "NewtonDiverged".
std::string error_kind(const std::exception& e);

} // namespace fremond
