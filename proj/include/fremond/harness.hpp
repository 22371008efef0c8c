#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "fremond/config.hpp"
#include "fremond/io.hpp"
#include "fremond/relenergy.hpp"
#include "fremond/thermo.hpp"

namespace fremond {

enum class ExperimentKind { EpsSweep, Refine, WeakStrong, Manufactured };

std::string to_string(ExperimentKind kind);

struct ExperimentConfig {
    RunConfig base;
    ExperimentKind kind = ExperimentKind::EpsSweep;
    /// Nothing is written when empty.
    std::filesystem::path outdir;

    /// Throws ConfigError when the parameter lists do not suit the kind.
    void validate() const;
};

// ---------------------------------------------------------------------------
// Thermodynamic checks on one run

struct CheckFailure {
    std::string check;
    std::size_t step = 0;
    double t = 0.0;
    std::string detail;
};

struct ThermoSuite {
    EnergyCheck energy;
    std::vector<EntropyCheckReport> entropy;
    FloorsReport floors;
    /// energy_tol * |E(t0)|.
    double energy_tol = 0.0;
    double entropy_tol = 0.0;
    std::optional<CheckFailure> first_failure;

    bool ok() const { return !first_failure.has_value(); }
};

/// Energy, entropy (one report per configured test function) and floors, fed one state at a time.
/// A state with theta <= 0 is recorded as a NonpositiveTemperature failure and ends the monitoring.
class ThermoSuiteMonitor {
public:
    explicit ThermoSuiteMonitor(const RunConfig& cfg);
    void push(const State& s);
    /// Resolves the first failing row; call once the run is over.
    ThermoSuite finish() const;

private:
    const RunConfig* cfg_;
    EnergyMonitor energy_;
    std::vector<EntropyMonitor> entropy_;
    FloorsMonitor floors_;
    std::size_t pushed_ = 0;
    std::optional<CheckFailure> fatal_;
};

/// Throws ValidationFailed unless consecutive states are exactly one dt apart (a subsampled run cannot be checked).
void require_contiguous(const Trajectory& traj);

/// Requires a contiguous trajectory; its scheme overrides cfg.scheme.
ThermoSuite thermo_suite(const Trajectory& traj, const RunConfig& cfg);

/// Check tables in the `step,t,value,margin,pass` layout.
CsvTable energy_csv(const ThermoSuite& suite);
CsvTable entropy_csv(const ThermoSuite& suite, std::size_t which);
CsvTable theta_floor_csv(const ThermoSuite& suite);
CsvTable phi_floor_csv(const ThermoSuite& suite);
/// energy.csv, entropy_<fn>.csv, theta_floor.csv, phi_floor.csv.
void write_thermo_csvs(const std::filesystem::path& dir, const ThermoSuite& suite);

/// step,t,E_total,E_gradient,E_potential,E_thermal,entropy_S,orlicz,theta_min,phi_min
CsvTable energy_series_csv(const std::vector<EnergyReport>& series);

// ---------------------------------------------------------------------------
// Relative energy between a run and a reference run

struct RelEnergySuite {
    GronwallReport gronwall;
    /// Fitted multiplier before the safety factor, when the config asked for calibration.
    std::optional<double> fitted;
    bool ok() const { return gronwall.min_margin >= 0.0; }
};

/// Multiplier from experiment.multiplier, or fitted on this pair and scaled by multiplier_safety.
/// Both trajectories must be contiguous.
RelEnergySuite relenergy_suite(const Trajectory& traj, const Trajectory& ref, const RunConfig& cfg);

/// step,t,E_rel,W,K,lhs,rhs,margin preceded by a `# multiplier=<c>` line.
CsvTable relenergy_csv(const GronwallReport& report);

// ---------------------------------------------------------------------------
// Experiments

struct SimulateReport {
    RunSummary summary;
    std::vector<EnergyReport> energy;
};

/// Runs cfg from its initial state. With a non-empty dir, writes the trajectory (every state, or
/// every experiment.snapshot_every-th) and energy_series.csv there.
SimulateReport simulate_run(const RunConfig& cfg, const std::filesystem::path& dir);

struct EpsSweepEntry {
    double epsilon = 0.0;
    std::optional<StepFailure> failure;
    double final_energy = 0.0;
    /// Smallest entropy margin over the configured test functions.
    double entropy_min_margin = 0.0;
    /// eps ||theta||^p over the space-time cylinder.
    double dissipated = 0.0;
    /// L1 distance of the final fields to those of the previous epsilon; NaN for the first.
    double theta_l1_prev = 0.0;
    double phi_l1_prev = 0.0;
    ThermoSuite checks;
};

struct EpsSweepReport {
    std::vector<EpsSweepEntry> entries;

    bool all_completed() const;
    bool dissipation_decreasing() const;
    bool distances_decreasing() const;
};

/// One run per experiment.eps_values entry; a failing run is recorded and the sweep continues.
EpsSweepReport eps_sweep(const ExperimentConfig& cfg);

struct ManufacturedResult {
    std::size_t n = 0;
    double h = 0.0;
    double dt = 0.0;
    double l2_error = 0.0;
    double linf_error = 0.0;
};

/// theta = mean + amp e^{-kappa (pi/L)^2 t} cos(pi x / L), phi frozen at 0, eps = 0.
double manufactured_theta(double x, double t, double mean, double amp, double kappa, double length);

/// Runs the frozen-phase heat problem on cfg's grid and time step; error at t_end.
ManufacturedResult manufactured_heat_test(const RunConfig& cfg);

struct RefinementLevel {
    std::size_t n = 0;
    double h = 0.0;
    double dt = 0.0;
    double value = 0.0;
};

struct RefinementReport {
    std::string monitor;
    /// "h" for manufactured, "dt" for the margin monitors.
    std::string variable;
    std::vector<RefinementLevel> levels;
    /// Order between consecutive levels, taking the exact value as zero.
    std::vector<double> orders;
    /// Richardson order from each consecutive triple.
    std::vector<double> richardson;
    double expected_lo = 0.0;
    double expected_hi = 0.0;

    /// Every consecutive order inside [expected_lo, expected_hi].
    bool within_expected() const;
};

/// Levels from experiment.levels with dt = dt_factor h^2. Monitors:
///   manufactured   L2 error of the manufactured heat solution, order in h, expected [1.8, 2.2]
///   energy_margin  cumulative energy margin at t_end, order in dt, expected [0.8, 1.5]
///   entropy_defect max |entropy margin| over the run and test functions, order in dt, expected >= 0.8
RefinementReport refinement_study(const ExperimentConfig& cfg);

/// log(v1/v2)/log(x1/x2) and log((v1-v2)/(v2-v3))/log(x1/x2).
double observed_order(double v1, double v2, double x1, double x2);
double richardson_order(double v1, double v2, double v3, double x1, double x2);

struct WeakStrongRun {
    double delta = 0.0;
    GronwallSeries series;
    GronwallReport gronwall;
    double max_E_rel = 0.0;
};

struct WeakStrongLevel {
    std::size_t n = 0;
    double dt = 0.0;
    std::vector<WeakStrongRun> runs;
    /// max_t xi of the reference run and the step where it first crossed the ceiling.
    double max_xi = 0.0;
    std::optional<std::size_t> xi_blowup;
    /// Reference energy scale max(1, |E(t0)|) for the delta = 0 regression.
    double scale = 1.0;
};

struct WeakStrongReport {
    double multiplier = 0.0;
    bool calibrated = false;
    std::vector<WeakStrongLevel> levels;

    /// max over levels of max_t E_rel / scale for the delta = 0 runs.
    double zero_delta_max() const;
    /// E_rel(T)/delta^2 for each nonzero delta on one level.
    std::vector<double> scaling_ratios(std::size_t level) const;
    /// Largest max/min of the scaling ratios over the levels; 1 when no level has two.
    double scaling_spread() const;
    double min_gronwall_margin() const;
    bool strong_ok() const;
};

/// Reference and perturbed runs advanced in lockstep on each level. The perturbation adds
/// delta * bump to phi0 or theta0 (experiment.perturb); a theta perturbation that leaves
/// theta0 <= 0 somewhere throws ValidationFailed before any run starts. Solver errors are
/// rethrown as SolverFailure.
WeakStrongReport weak_strong_experiment(const ExperimentConfig& cfg);

// ---------------------------------------------------------------------------
// Persistence

/// Writes every k-th state (and the final one) plus index.csv and manifest.txt into a run directory.
class SnapshotWriter {
public:
    SnapshotWriter(std::filesystem::path dir, const RunConfig& cfg, std::size_t every);
    void push(const State& s);
    /// Writes the final state if it was skipped, and index.csv.
    void finish();

private:
    std::filesystem::path dir_;
    std::size_t every_;
    std::size_t count_ = 0;
    std::optional<State> last_;
    bool last_written_ = false;
    CsvTable index_{{"step", "t", "file"}};
};

/// experiment.snapshot_every, or the stride leaving about 100 snapshots of the run.
std::size_t snapshot_stride(const RunConfig& cfg);

/// Resolved config with a leading `# experiment: <kind>` line.
std::string experiment_manifest(const ExperimentConfig& cfg);

CsvTable eps_sweep_summary(const EpsSweepReport& report);
CsvTable refinement_summary(const RefinementReport& report);
CsvTable weak_strong_summary(const WeakStrongReport& report);

} // namespace fremond
