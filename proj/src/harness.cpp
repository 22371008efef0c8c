#include "fremond/harness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "fremond/errors.hpp"
#include "fremond/initial.hpp"

namespace fs = std::filesystem;

namespace fremond {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string pass_flag(bool ok) { return ok ? "1" : "0"; }

std::string status_of(const std::optional<StepFailure>& f)
{
    return f ? f->kind + "@" + std::to_string(f->step_index) : "ok";
}

double l1_distance(const Field& a, const Field& b)
{
    require_same_grid(a, b);
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k)
        s += std::abs(a[k] - b[k]);
    return s * a.grid().cell_volume();
}

double h_of(const Grid& g)
{
    return g.dim() == 1 ? g.h(0) : std::min(g.h(0), g.h(1));
}

fs::path run_dir(const fs::path& outdir, std::size_t k) { return outdir / ("run_" + std::to_string(k)); }

} // namespace

std::string to_string(ExperimentKind kind)
{
    switch (kind) {
    case ExperimentKind::EpsSweep:
        return "eps_sweep";
    case ExperimentKind::Refine:
        return "refine";
    case ExperimentKind::WeakStrong:
        return "weak_strong";
    case ExperimentKind::Manufactured:
        return "manufactured";
    }
    return "unknown";
}

void ExperimentConfig::validate() const
{
    const ExperimentSpec& x = base.experiment;
    switch (kind) {
    case ExperimentKind::EpsSweep:
        if (x.eps_values.size() < 2)
            throw ConfigError("eps sweep needs at least two epsilon values");
        for (std::size_t k = 0; k < x.eps_values.size(); ++k) {
            if (!(x.eps_values[k] > 0.0))
                throw ConfigError("eps sweep: epsilon values must be positive");
            if (k > 0 && !(x.eps_values[k] < x.eps_values[k - 1]))
                throw ConfigError("eps sweep: epsilon values must be strictly decreasing");
        }
        break;
    case ExperimentKind::Refine:
        if (x.levels.size() < 3)
            throw ConfigError("refinement study needs at least three levels");
        for (std::size_t k = 1; k < x.levels.size(); ++k)
            if (!(x.levels[k] > x.levels[k - 1]))
                throw ConfigError("refinement levels must be strictly increasing");
        if (x.monitor != "manufactured" && x.monitor != "energy_margin" && x.monitor != "entropy_defect")
            throw ConfigError("unknown refinement monitor '" + x.monitor + "'");
        if (x.monitor == "manufactured" && (base.grid.dim != 1 || !(x.mms_mean > x.mms_amp) || x.mms_amp < 0.0))
            throw ConfigError("manufactured monitor needs a 1D grid and mms_mean > mms_amp >= 0");
        break;
    case ExperimentKind::WeakStrong:
        if (x.levels.empty())
            throw ConfigError("weak-strong experiment needs at least one level");
        for (std::size_t k = 1; k < x.levels.size(); ++k)
            if (!(x.levels[k] > x.levels[k - 1]))
                throw ConfigError("levels must be strictly increasing");
        if (x.deltas.empty())
            throw ConfigError("weak-strong experiment needs at least one delta");
        for (double d : x.deltas)
            if (!std::isfinite(d))
                throw ConfigError("deltas must be finite");
        if (!(x.bump_width > 0.0))
            throw ConfigError("bump_width must be positive");
        break;
    case ExperimentKind::Manufactured:
        if (base.grid.dim != 1 || !(x.mms_mean > x.mms_amp) || x.mms_amp < 0.0)
            throw ConfigError("manufactured test needs a 1D grid and mms_mean > mms_amp >= 0");
        break;
    }
}

// ---------------------------------------------------------------------------

ThermoSuiteMonitor::ThermoSuiteMonitor(const RunConfig& cfg)
    : cfg_(&cfg),
      energy_(cfg.potential, cfg.scheme.epsilon, cfg.scheme.p, cfg.scheme.dt),
      floors_(cfg.scheme.p, cfg.potential.lambda(), cfg.checks.floor_tol)
{
    for (const auto& name : cfg.checks.test_functions)
        entropy_.emplace_back(TestFunction::parse(name), cfg.scheme.kappa, cfg.scheme.epsilon, cfg.scheme.p,
                              cfg.scheme.dt);
}

void ThermoSuiteMonitor::push(const State& s)
{
    if (fatal_)
        return;
    const std::size_t step = pushed_++;
    if (!s.theta.all_finite() || !s.phi.all_finite() || !s.phi_t.all_finite()) {
        fatal_ = CheckFailure{"NonfiniteState", step, s.t, "state holds non-finite values"};
        return;
    }
    if (!(s.theta.min() > 0.0)) {
        fatal_ = CheckFailure{"NonpositiveTemperature", step, s.t, "min theta = " + format_double(s.theta.min())};
        return;
    }
    energy_.push(s);
    for (auto& m : entropy_)
        m.push(s);
    floors_.push(s);
}

ThermoSuite ThermoSuiteMonitor::finish() const
{
    ThermoSuite out;
    out.energy = energy_.result();
    for (const auto& m : entropy_)
        out.entropy.push_back(m.result());
    out.floors = floors_.result();
    out.energy_tol = out.energy.energy.empty() ? 0.0 : cfg_->checks.energy_tol * std::abs(out.energy.energy.front());
    out.entropy_tol = cfg_->checks.entropy_tol;

    std::optional<CheckFailure> best;
    auto offer = [&best](CheckFailure f) {
        if (!best || f.step < best->step)
            best = std::move(f);
    };
    const EnergyCheck& e = out.energy;
    for (std::size_t n = 0; n < e.margin.size(); ++n)
        if (e.margin[n] < -out.energy_tol) {
            offer({"energy", n, e.times[n],
                   "margin " + format_double(e.margin[n]) + " < -" + format_double(out.energy_tol)});
            break;
        }
    for (const auto& r : out.entropy)
        for (std::size_t n = 0; n < r.margins.size(); ++n)
            if (r.margins[n] < -out.entropy_tol) {
                offer({"entropy_" + r.test_function, n, r.times[n],
                       "margin " + format_double(r.margins[n]) + " < -" + format_double(out.entropy_tol)});
                break;
            }
    const FloorsReport& f = out.floors;
    for (std::size_t n = 0; n < f.times.size(); ++n) {
        if (!f.theta_pass[n]) {
            offer({"theta_floor", n, f.times[n],
                   "min theta " + format_double(f.theta_min[n]) + " < floor " + format_double(f.theta_floor[n])});
            break;
        }
        if (!f.phi_pass[n]) {
            offer({"phi_floor", n, f.times[n],
                   "min phi " + format_double(f.phi_min[n]) + " < floor " + format_double(f.phi_floor[n])});
            break;
        }
    }
    if (fatal_)
        offer(*fatal_);
    out.first_failure = best;
    return out;
}

void require_contiguous(const Trajectory& traj)
{
    const double dt = traj.config.dt;
    for (std::size_t n = 1; n < traj.size(); ++n) {
        const double gap = traj.states[n].t - traj.states[n - 1].t;
        if (std::abs(gap - dt) > 1e-9 * dt)
            throw ValidationFailed("states " + std::to_string(n - 1) + " and " + std::to_string(n) + " are " +
                                   format_double(gap) + " apart, expected dt = " + format_double(dt));
    }
}

ThermoSuite thermo_suite(const Trajectory& traj, const RunConfig& cfg)
{
    require_contiguous(traj);
    RunConfig c = cfg;
    c.scheme = traj.config;
    ThermoSuiteMonitor m(c);
    for (const auto& s : traj.states)
        m.push(s);
    return m.finish();
}

namespace {

const std::vector<std::string> kCheckHeader{"step", "t", "value", "margin", "pass"};

} // namespace

CsvTable energy_csv(const ThermoSuite& suite)
{
    CsvTable t(kCheckHeader);
    t.add_comment("energy: value=E(t), margin=E(t0)-E(t)-eps*sum dt*int theta^p, tol=" +
                  format_double(suite.energy_tol));
    const EnergyCheck& e = suite.energy;
    for (std::size_t n = 0; n < e.times.size(); ++n)
        t.add_row({std::to_string(n), format_double(e.times[n]), format_double(e.energy[n]),
                   format_double(e.margin[n]), pass_flag(e.margin[n] >= -suite.energy_tol)});
    return t;
}

CsvTable entropy_csv(const ThermoSuite& suite, std::size_t which)
{
    const EntropyCheckReport& r = suite.entropy.at(which);
    CsvTable t(kCheckHeader);
    t.add_comment("entropy(" + r.test_function + "): value=lhs, margin=rhs-lhs, tol=" +
                  format_double(suite.entropy_tol));
    for (std::size_t n = 0; n < r.times.size(); ++n)
        t.add_row({std::to_string(n), format_double(r.times[n]), format_double(r.lhs[n]),
                   format_double(r.margins[n]), pass_flag(r.margins[n] >= -suite.entropy_tol)});
    return t;
}

CsvTable theta_floor_csv(const ThermoSuite& suite)
{
    const FloorsReport& f = suite.floors;
    CsvTable t(kCheckHeader);
    t.add_comment("theta_floor: value=min theta, margin=min theta-h(t), tol=" + format_double(f.tolerance));
    for (std::size_t n = 0; n < f.times.size(); ++n)
        t.add_row({std::to_string(n), format_double(f.times[n]), format_double(f.theta_min[n]),
                   format_double(f.theta_min[n] - f.theta_floor[n]), pass_flag(f.theta_pass[n])});
    return t;
}

CsvTable phi_floor_csv(const ThermoSuite& suite)
{
    const FloorsReport& f = suite.floors;
    CsvTable t(kCheckHeader);
    t.add_comment("phi_floor: value=min phi, margin=min phi+K*exp(2*lambda*t), K=" + format_double(f.K) +
                  ", tol=" + format_double(f.tolerance));
    for (std::size_t n = 0; n < f.times.size(); ++n)
        t.add_row({std::to_string(n), format_double(f.times[n]), format_double(f.phi_min[n]),
                   format_double(f.phi_min[n] - f.phi_floor[n]), pass_flag(f.phi_pass[n])});
    return t;
}

void write_thermo_csvs(const fs::path& dir, const ThermoSuite& suite)
{
    energy_csv(suite).save(dir / "energy.csv");
    for (std::size_t k = 0; k < suite.entropy.size(); ++k)
        entropy_csv(suite, k).save(dir / ("entropy_" + suite.entropy[k].test_function + ".csv"));
    theta_floor_csv(suite).save(dir / "theta_floor.csv");
    phi_floor_csv(suite).save(dir / "phi_floor.csv");
}

CsvTable energy_series_csv(const std::vector<EnergyReport>& series)
{
    CsvTable t({"step", "t", "E_total", "E_gradient", "E_potential", "E_thermal", "entropy_S", "orlicz", "theta_min",
                "phi_min"});
    for (std::size_t n = 0; n < series.size(); ++n) {
        const EnergyReport& r = series[n];
        t.add_row({std::to_string(n), format_double(r.t), format_double(r.E_total), format_double(r.E_gradient),
                   format_double(r.E_potential), format_double(r.E_thermal), format_double(r.entropy_S),
                   format_double(r.orlicz), format_double(r.theta_min), format_double(r.phi_min)});
    }
    return t;
}

// ---------------------------------------------------------------------------

namespace {

double resolve_multiplier(const RunConfig& cfg, const std::vector<const GronwallSeries*>& series,
                          std::optional<double>& fitted)
{
    const ExperimentSpec& x = cfg.experiment;
    if (x.multiplier >= 0.0)
        return x.multiplier;
    constexpr double c_max = 100.0;
    double worst = 0.0;
    for (const GronwallSeries* s : series) {
        const auto c = fit_gronwall_multiplier(*s, c_max);
        if (!c) {
            fitted.reset();
            return c_max * x.multiplier_safety;
        }
        worst = std::max(worst, *c);
    }
    fitted = worst;
    return worst * x.multiplier_safety;
}

} // namespace

RelEnergySuite relenergy_suite(const Trajectory& traj, const Trajectory& ref, const RunConfig& cfg)
{
    require_contiguous(traj);
    require_contiguous(ref);
    RelEnergySuite out;
    const GronwallSeries series = gronwall_series(traj, ref, cfg.relenergy, cfg.potential);
    const double c = resolve_multiplier(cfg, {&series}, out.fitted);
    out.gronwall = evaluate_gronwall(series, c);
    return out;
}

CsvTable relenergy_csv(const GronwallReport& r)
{
    CsvTable t({"step", "t", "E_rel", "W", "K", "lhs", "rhs", "margin"});
    t.add_comment("multiplier=" + format_double(r.multiplier));
    for (std::size_t n = 0; n < r.times.size(); ++n)
        t.add_row({std::to_string(n), format_double(r.times[n]), format_double(r.E_rel[n]), format_double(r.W[n]),
                   format_double(r.K[n]), format_double(r.lhs[n]), format_double(r.rhs[n]),
                   format_double(r.margin[n])});
    return t;
}

// ---------------------------------------------------------------------------

SimulateReport simulate_run(const RunConfig& cfg, const fs::path& dir)
{
    const State init = build_initial_state(cfg);
    std::optional<SnapshotWriter> writer;
    if (!dir.empty())
        writer.emplace(dir, cfg, cfg.experiment.snapshot_every > 0 ? cfg.experiment.snapshot_every : 1);
    SimulateReport out;
    out.summary = run(init, cfg.scheme, cfg.potential, cfg.t_end, [&](const State& s) {
        if (writer)
            writer->push(s);
        out.energy.push_back(energy(s, cfg.potential));
    });
    if (writer) {
        writer->finish();
        energy_series_csv(out.energy).save(dir / "energy_series.csv");
    }
    return out;
}

bool EpsSweepReport::all_completed() const
{
    return std::all_of(entries.begin(), entries.end(), [](const EpsSweepEntry& e) { return !e.failure; });
}

bool EpsSweepReport::dissipation_decreasing() const
{
    if (!all_completed())
        return false;
    for (std::size_t k = 1; k < entries.size(); ++k)
        if (!(entries[k].dissipated < entries[k - 1].dissipated))
            return false;
    return true;
}

bool EpsSweepReport::distances_decreasing() const
{
    if (!all_completed())
        return false;
    for (std::size_t k = 2; k < entries.size(); ++k)
        if (!(entries[k].theta_l1_prev < entries[k - 1].theta_l1_prev) ||
            !(entries[k].phi_l1_prev < entries[k - 1].phi_l1_prev))
            return false;
    return true;
}

EpsSweepReport eps_sweep(const ExperimentConfig& cfg)
{
    cfg.validate();
    const bool persist = !cfg.outdir.empty();
    EpsSweepReport report;
    std::optional<State> prev_final;

    for (std::size_t k = 0; k < cfg.base.experiment.eps_values.size(); ++k) {
        RunConfig c = cfg.base;
        c.scheme.epsilon = cfg.base.experiment.eps_values[k];
        const State init = build_initial_state(c);

        ThermoSuiteMonitor monitor(c);
        std::optional<SnapshotWriter> writer;
        if (persist)
            writer.emplace(run_dir(cfg.outdir, k), c, snapshot_stride(c));
        std::optional<State> last;
        const RunSummary rs = run(init, c.scheme, c.potential, c.t_end, [&](const State& s) {
            monitor.push(s);
            if (writer)
                writer->push(s);
            last = s;
        });
        if (writer)
            writer->finish();

        EpsSweepEntry e;
        e.epsilon = c.scheme.epsilon;
        e.failure = rs.failure;
        e.checks = monitor.finish();
        e.final_energy = e.checks.energy.energy.empty() ? kNaN : e.checks.energy.energy.back();
        e.dissipated = e.checks.energy.dissipated;
        e.entropy_min_margin = std::numeric_limits<double>::infinity();
        for (const auto& r : e.checks.entropy)
            e.entropy_min_margin = std::min(e.entropy_min_margin, r.min_margin);
        e.theta_l1_prev = e.phi_l1_prev = kNaN;
        if (!rs.failure && prev_final) {
            e.theta_l1_prev = l1_distance(last->theta, prev_final->theta);
            e.phi_l1_prev = l1_distance(last->phi, prev_final->phi);
        }
        if (persist)
            write_thermo_csvs(run_dir(cfg.outdir, k), e.checks);
        prev_final = rs.failure ? std::nullopt : last;
        report.entries.push_back(std::move(e));
    }

    if (persist) {
        write_text(cfg.outdir / "manifest.txt", experiment_manifest(cfg));
        eps_sweep_summary(report).save(cfg.outdir / "summary.csv");
    }
    return report;
}

// ---------------------------------------------------------------------------

double manufactured_theta(double x, double t, double mean, double amp, double kappa, double length)
{
    const double k = std::numbers::pi / length;
    return mean + amp * std::exp(-kappa * k * k * t) * std::cos(k * x);
}

namespace {

RunConfig manufactured_config(const RunConfig& cfg)
{
    RunConfig c = cfg;
    c.scheme.epsilon = 0.0;
    c.scheme.freeze_phase = true;
    c.initial.preset = "cosine_bump";
    c.initial.theta_mean = cfg.experiment.mms_mean;
    c.initial.theta_amp = cfg.experiment.mms_amp;
    c.initial.phi_mean = 0.0;
    c.initial.phi_amp = 0.0;
    c.initial.phi_t0 = "zero";
    return c;
}

ManufacturedResult manufactured_run(const RunConfig& mc, const StateObserver& observer)
{
    const State init = build_initial_state(mc);
    const Grid& g = init.theta.grid();
    std::optional<State> last;
    const RunSummary rs = run(init, mc.scheme, mc.potential, mc.t_end, [&](const State& s) {
        if (observer)
            observer(s);
        last = s;
    });
    if (rs.failure)
        throw SolverFailure(rs.failure->step_index, rs.failure->kind, rs.failure->message);

    ManufacturedResult r;
    r.n = g.n(0);
    r.h = g.h(0);
    r.dt = mc.scheme.dt;
    const Field exact = Field::sample(g, [&](double x, double) {
        return manufactured_theta(x, last->t, mc.experiment.mms_mean, mc.experiment.mms_amp, mc.scheme.kappa,
                                  g.extent(0));
    });
    double sq = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k) {
        const double d = last->theta[k] - exact[k];
        sq += d * d;
        r.linf_error = std::max(r.linf_error, std::abs(d));
    }
    r.l2_error = std::sqrt(sq * g.cell_volume());
    return r;
}

} // namespace

ManufacturedResult manufactured_heat_test(const RunConfig& cfg)
{
    ExperimentConfig ec{cfg, ExperimentKind::Manufactured, {}};
    ec.validate();
    return manufactured_run(manufactured_config(cfg), {});
}

double observed_order(double v1, double v2, double x1, double x2)
{
    return std::log(std::abs(v1) / std::abs(v2)) / std::log(x1 / x2);
}

double richardson_order(double v1, double v2, double v3, double x1, double x2)
{
    return std::log(std::abs((v1 - v2) / (v2 - v3))) / std::log(x1 / x2);
}

bool RefinementReport::within_expected() const
{
    if (orders.empty())
        return false;
    return std::all_of(orders.begin(), orders.end(),
                       [&](double o) { return o >= expected_lo && o <= expected_hi; });
}

RefinementReport refinement_study(const ExperimentConfig& cfg)
{
    cfg.validate();
    const ExperimentSpec& x = cfg.base.experiment;
    const bool persist = !cfg.outdir.empty();

    RefinementReport report;
    report.monitor = x.monitor;
    if (x.monitor == "manufactured") {
        report.variable = "h";
        report.expected_lo = 1.8;
        report.expected_hi = 2.2;
    } else if (x.monitor == "energy_margin") {
        report.variable = "dt";
        report.expected_lo = 0.8;
        report.expected_hi = 1.5;
    } else {
        report.variable = "dt";
        report.expected_lo = 0.8;
        report.expected_hi = std::numeric_limits<double>::infinity();
    }

    for (std::size_t k = 0; k < x.levels.size(); ++k) {
        RunConfig c = at_level(cfg.base, x.levels[k], x.dt_factor);
        RefinementLevel lvl;
        lvl.n = x.levels[k];
        lvl.h = h_of(c.grid.make());
        lvl.dt = c.scheme.dt;

        if (x.monitor == "manufactured") {
            const RunConfig mc = manufactured_config(c);
            std::optional<SnapshotWriter> writer;
            if (persist)
                writer.emplace(run_dir(cfg.outdir, k), mc, snapshot_stride(mc));
            const ManufacturedResult r = manufactured_run(mc, [&](const State& s) {
                if (writer)
                    writer->push(s);
            });
            if (writer)
                writer->finish();
            lvl.value = r.l2_error;
        } else {
            const State init = build_initial_state(c);
            ThermoSuiteMonitor monitor(c);
            std::optional<SnapshotWriter> writer;
            if (persist)
                writer.emplace(run_dir(cfg.outdir, k), c, snapshot_stride(c));
            const RunSummary rs = run(init, c.scheme, c.potential, c.t_end, [&](const State& s) {
                monitor.push(s);
                if (writer)
                    writer->push(s);
            });
            if (writer)
                writer->finish();
            if (rs.failure)
                throw SolverFailure(rs.failure->step_index, rs.failure->kind, rs.failure->message);
            const ThermoSuite suite = monitor.finish();
            if (persist)
                write_thermo_csvs(run_dir(cfg.outdir, k), suite);
            if (x.monitor == "energy_margin") {
                lvl.value = suite.energy.margin.back();
            } else {
                for (const auto& r : suite.entropy)
                    for (double m : r.margins)
                        lvl.value = std::max(lvl.value, std::abs(m));
            }
        }
        report.levels.push_back(lvl);
    }

    auto var = [&](const RefinementLevel& l) { return report.variable == "h" ? l.h : l.dt; };
    const auto& L = report.levels;
    for (std::size_t k = 0; k + 1 < L.size(); ++k)
        report.orders.push_back(observed_order(L[k].value, L[k + 1].value, var(L[k]), var(L[k + 1])));
    for (std::size_t k = 0; k + 2 < L.size(); ++k)
        report.richardson.push_back(
            richardson_order(L[k].value, L[k + 1].value, L[k + 2].value, var(L[k]), var(L[k + 1])));

    if (persist) {
        write_text(cfg.outdir / "manifest.txt", experiment_manifest(cfg));
        refinement_summary(report).save(cfg.outdir / "summary.csv");
    }
    return report;
}

// ---------------------------------------------------------------------------

double WeakStrongReport::zero_delta_max() const
{
    double worst = 0.0;
    for (const auto& lvl : levels)
        for (const auto& r : lvl.runs)
            if (r.delta == 0.0)
                worst = std::max(worst, r.max_E_rel / lvl.scale);
    return worst;
}

std::vector<double> WeakStrongReport::scaling_ratios(std::size_t level) const
{
    std::vector<double> out;
    for (const auto& r : levels.at(level).runs)
        if (r.delta != 0.0)
            out.push_back(r.series.E_rel.back() / (r.delta * r.delta));
    return out;
}

double WeakStrongReport::scaling_spread() const
{
    double worst = 1.0;
    for (std::size_t l = 0; l < levels.size(); ++l) {
        const auto ratios = scaling_ratios(l);
        if (ratios.size() < 2)
            continue;
        const auto [lo, hi] = std::minmax_element(ratios.begin(), ratios.end());
        worst = std::max(worst, *hi / *lo);
    }
    return worst;
}

double WeakStrongReport::min_gronwall_margin() const
{
    double worst = std::numeric_limits<double>::infinity();
    for (const auto& lvl : levels)
        for (const auto& r : lvl.runs)
            worst = std::min(worst, r.gronwall.min_margin);
    return worst;
}

bool WeakStrongReport::strong_ok() const
{
    return std::none_of(levels.begin(), levels.end(), [](const WeakStrongLevel& l) { return l.xi_blowup.has_value(); });
}

namespace {

State perturbed_state(const State& ref, const Field& bump, double delta, const RunConfig& c)
{
    State s = ref;
    Field& target = c.experiment.perturb == "theta" ? s.theta : s.phi;
    for (std::size_t k = 0; k < target.size(); ++k)
        target[k] += delta * bump[k];
    if (c.experiment.perturb == "theta" && !(s.theta.min() > 0.0))
        throw ValidationFailed("perturbation delta=" + format_double(delta) + " makes theta0 nonpositive (min " +
                               format_double(s.theta.min()) + ")");
    if (c.initial.phi_t0 == "equation")
        s.phi_t = initial_phase_rate(s.theta, s.phi, c.potential);
    return s;
}

State advance(const State& s, const RunConfig& c, std::size_t n, double t0)
{
    try {
        State next = step(s, c.scheme, c.potential);
        next.t = t0 + static_cast<double>(n) * c.scheme.dt;
        return next;
    } catch (const Error& e) {
        throw SolverFailure(n, error_kind(e), e.what());
    }
}

} // namespace

WeakStrongReport weak_strong_experiment(const ExperimentConfig& cfg)
{
    cfg.validate();
    const ExperimentSpec& x = cfg.base.experiment;
    const bool persist = !cfg.outdir.empty();

    std::vector<RunConfig> configs;
    std::vector<State> refs;
    std::vector<std::vector<State>> members;
    for (std::size_t lv : x.levels) {
        RunConfig c = at_level(cfg.base, lv, x.dt_factor);
        State ref = build_initial_state(c);
        const Field bump = gaussian_bump(ref.phi.grid(), x.bump_center, x.bump_width);
        std::vector<State> m;
        for (double d : x.deltas)
            m.push_back(perturbed_state(ref, bump, d, c));
        configs.push_back(std::move(c));
        refs.push_back(std::move(ref));
        members.push_back(std::move(m));
    }

    WeakStrongReport report;
    std::size_t run_index = 0;
    for (std::size_t l = 0; l < configs.size(); ++l) {
        const RunConfig& c = configs[l];
        State ref = refs[l];
        std::vector<State>& runs = members[l];

        WeakStrongLevel level;
        level.n = x.levels[l];
        level.dt = c.scheme.dt;
        level.scale = std::max(1.0, std::abs(energy(ref, c.potential).E_total));

        std::vector<GronwallMonitor> monitors;
        std::vector<std::optional<SnapshotWriter>> writers(runs.size() + 1);
        const std::size_t stride = snapshot_stride(c);
        if (persist)
            for (std::size_t i = 0; i <= runs.size(); ++i)
                writers[i].emplace(run_dir(cfg.outdir, run_index + i), c, stride);

        std::size_t observed = 0;
        auto observe = [&](const State& r, const std::vector<State>& ms) {
            const double xi = xi_monitor(r, c.scheme.kappa);
            level.max_xi = std::max(level.max_xi, xi);
            if (!level.xi_blowup && xi > c.checks.xi_ceiling)
                level.xi_blowup = observed;
            ++observed;
            if (writers[0])
                writers[0]->push(r);
            for (std::size_t i = 0; i < ms.size(); ++i) {
                monitors[i].push(ms[i], r);
                if (writers[i + 1])
                    writers[i + 1]->push(ms[i]);
            }
        };

        for (std::size_t i = 0; i < runs.size(); ++i)
            monitors.emplace_back(c.relenergy, c.potential, c.scheme.kappa, c.scheme.dt);
        observe(ref, runs);

        const double t0 = ref.t;
        const std::size_t steps = step_count(t0, c.t_end, c.scheme.dt);
        for (std::size_t n = 1; n <= steps; ++n) {
            ref = advance(ref, c, n, t0);
            for (auto& s : runs)
                s = advance(s, c, n, t0);
            observe(ref, runs);
        }
        for (auto& w : writers)
            if (w)
                w->finish();

        for (std::size_t i = 0; i < runs.size(); ++i) {
            WeakStrongRun r;
            r.delta = x.deltas[i];
            r.series = monitors[i].series();
            r.max_E_rel = *std::max_element(r.series.E_rel.begin(), r.series.E_rel.end());
            level.runs.push_back(std::move(r));
        }
        run_index += runs.size() + 1;
        report.levels.push_back(std::move(level));
    }

    std::optional<double> fitted;
    std::vector<const GronwallSeries*> calib;
    for (const auto& r : report.levels.front().runs)
        if (r.delta != 0.0)
            calib.push_back(&r.series);
    report.multiplier = resolve_multiplier(cfg.base, calib, fitted);
    report.calibrated = x.multiplier < 0.0;

    run_index = 0;
    for (auto& level : report.levels) {
        for (std::size_t i = 0; i < level.runs.size(); ++i) {
            WeakStrongRun& r = level.runs[i];
            r.gronwall = evaluate_gronwall(r.series, report.multiplier);
            if (persist)
                relenergy_csv(r.gronwall).save(run_dir(cfg.outdir, run_index + 1 + i) / "relenergy.csv");
        }
        run_index += level.runs.size() + 1;
    }

    if (persist) {
        write_text(cfg.outdir / "manifest.txt", experiment_manifest(cfg));
        weak_strong_summary(report).save(cfg.outdir / "summary.csv");
    }
    return report;
}

// ---------------------------------------------------------------------------

SnapshotWriter::SnapshotWriter(fs::path dir, const RunConfig& cfg, std::size_t every)
    : dir_(std::move(dir)), every_(std::max<std::size_t>(1, every))
{
    write_text(dir_ / "manifest.txt", render_config(cfg));
}

void SnapshotWriter::push(const State& s)
{
    const std::size_t n = count_++;
    if (n % every_ == 0) {
        const std::string name = "state_" + std::to_string(n) + ".field";
        save_state(dir_ / name, s);
        index_.add_row({std::to_string(n), format_double(s.t), name});
        last_written_ = true;
        last_.reset();
    } else {
        last_ = s;
        last_written_ = false;
    }
}

void SnapshotWriter::finish()
{
    if (!last_written_ && last_) {
        const std::size_t n = count_ - 1;
        const std::string name = "state_" + std::to_string(n) + ".field";
        save_state(dir_ / name, *last_);
        index_.add_row({std::to_string(n), format_double(last_->t), name});
        last_written_ = true;
    }
    index_.save(dir_ / "index.csv");
}

std::size_t snapshot_stride(const RunConfig& cfg)
{
    if (cfg.experiment.snapshot_every > 0)
        return static_cast<std::size_t>(cfg.experiment.snapshot_every);
    const std::size_t steps = step_count(cfg.t0, cfg.t_end, cfg.scheme.dt);
    return std::max<std::size_t>(1, (steps + 99) / 100);
}

std::string experiment_manifest(const ExperimentConfig& cfg)
{
    return "# experiment: " + to_string(cfg.kind) + "\n" + render_config(cfg.base);
}

CsvTable eps_sweep_summary(const EpsSweepReport& report)
{
    CsvTable t({"run", "epsilon", "status", "final_energy", "entropy_min_margin", "dissipated", "theta_l1_prev",
                "phi_l1_prev", "checks"});
    t.add_comment("dissipated=eps*||theta||_p^p over the run; *_l1_prev = L1 distance of final fields to the previous run");
    for (std::size_t k = 0; k < report.entries.size(); ++k) {
        const EpsSweepEntry& e = report.entries[k];
        t.add_row({std::to_string(k), format_double(e.epsilon), status_of(e.failure), format_double(e.final_energy),
                   format_double(e.entropy_min_margin), format_double(e.dissipated), format_double(e.theta_l1_prev),
                   format_double(e.phi_l1_prev), e.checks.ok() ? "pass" : "fail:" + e.checks.first_failure->check});
    }
    return t;
}

CsvTable refinement_summary(const RefinementReport& report)
{
    CsvTable t({"level", "n", "h", "dt", "value", "order", "richardson"});
    t.add_comment("monitor=" + report.monitor + " variable=" + report.variable + " expected=[" +
                  format_double(report.expected_lo) + "," + format_double(report.expected_hi) + "]");
    for (std::size_t k = 0; k < report.levels.size(); ++k) {
        const RefinementLevel& l = report.levels[k];
        t.add_row({std::to_string(k), std::to_string(l.n), format_double(l.h), format_double(l.dt),
                   format_double(l.value), k > 0 ? format_double(report.orders[k - 1]) : "",
                   k > 1 ? format_double(report.richardson[k - 2]) : ""});
    }
    return t;
}

CsvTable weak_strong_summary(const WeakStrongReport& report)
{
    CsvTable t({"run", "level", "n", "dt", "delta", "E0", "E_T", "E_T_over_delta2", "max_E_rel", "min_margin"});
    t.add_comment("multiplier=" + format_double(report.multiplier) +
                  (report.calibrated ? " (calibrated on the coarsest level)" : " (given)"));
    std::size_t run_index = 0;
    for (std::size_t l = 0; l < report.levels.size(); ++l) {
        const WeakStrongLevel& lvl = report.levels[l];
        t.add_comment("level " + std::to_string(l) + ": reference run_" + std::to_string(run_index) +
                      ", max xi=" + format_double(lvl.max_xi) +
                      (lvl.xi_blowup ? ", xi ceiling crossed at step " + std::to_string(*lvl.xi_blowup) : ""));
        for (std::size_t i = 0; i < lvl.runs.size(); ++i) {
            const WeakStrongRun& r = lvl.runs[i];
            const double eT = r.series.E_rel.back();
            t.add_row({std::to_string(run_index + 1 + i), std::to_string(l), std::to_string(lvl.n),
                       format_double(lvl.dt), format_double(r.delta), format_double(r.series.E_rel.front()),
                       format_double(eT), r.delta != 0.0 ? format_double(eT / (r.delta * r.delta)) : "",
                       format_double(r.max_E_rel), format_double(r.gronwall.min_margin)});
        }
        run_index += lvl.runs.size() + 1;
    }
    return t;
}

} // namespace fremond
