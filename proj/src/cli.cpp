#include "fremond/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <ostream>

#include "fremond/errors.hpp"
#include "fremond/harness.hpp"
#include "fremond/plot.hpp"

namespace fs = std::filesystem;

namespace fremond::cli {

namespace {

const std::vector<std::string> kVerbs{"simulate", "check", "relenergy", "sweep", "refine", "weakstrong", "plot"};

struct Options {
    std::string verb;
    std::string config;
    std::vector<std::string> overrides;
    std::string out;
    std::vector<std::string> paths;
};

std::size_t positional_count(const std::string& verb)
{
    if (verb == "check" || verb == "plot")
        return 1;
    if (verb == "relenergy")
        return 2;
    return 0;
}

bool takes_config(const std::string& verb) { return positional_count(verb) == 0; }

fs::path output_dir(const Options& o)
{
    if (!o.out.empty())
        return o.out;
    const char* root = std::getenv("FREMOND_OUTDIR");
    return fs::path(root && *root ? root : "fremond_out") / o.verb;
}

RunConfig load(const Options& o)
{
    if (!o.config.empty())
        return load_config(o.config, o.overrides);
    ConfigDocument doc = ConfigDocument::parse("", "<defaults>");
    for (const auto& ov : o.overrides)
        doc.apply_override(ov);
    return build_config(doc);
}

int solver_exit(const StepFailure& f, std::ostream& err)
{
    err << "solver error at step " << f.step_index << ": " << f.kind << ": " << f.message << '\n';
    return kSolverError;
}

int do_simulate(const Options& o, std::ostream& out, std::ostream& err)
{
    const RunConfig cfg = load(o);
    const fs::path dir = output_dir(o);
    const SimulateReport r = simulate_run(cfg, dir);
    out << "simulate: " << r.summary.states << " states written to " << dir.string() << '\n';
    if (!r.energy.empty())
        out << "  E(t0) = " << format_double(r.energy.front().E_total)
            << "  E(end) = " << format_double(r.energy.back().E_total) << '\n';
    if (r.summary.failure)
        return solver_exit(*r.summary.failure, err);
    return kOk;
}

int do_check(const Options& o, std::ostream& out, std::ostream& err)
{
    const LoadedTrajectory lt = load_trajectory(o.paths[0], o.overrides);
    const ThermoSuite suite = thermo_suite(lt.trajectory, lt.config);
    const fs::path dir = output_dir(o);
    write_thermo_csvs(dir, suite);
    out << "check: " << lt.trajectory.size() << " states, results in " << dir.string() << '\n';
    if (!suite.energy.margin.empty())
        out << "  energy: min margin " << format_double(*std::min_element(suite.energy.margin.begin(),
                                                                            suite.energy.margin.end()))
            << " (tol " << format_double(suite.energy_tol) << ")\n";
    for (const auto& e : suite.entropy)
        out << "  entropy(" << e.test_function << "): min margin " << format_double(e.min_margin) << " (tol "
            << format_double(suite.entropy_tol) << ")\n";
    out << "  floors: " << (suite.floors.all_pass() ? "pass" : "fail") << '\n';
    if (!suite.ok()) {
        const CheckFailure& f = *suite.first_failure;
        err << "check failed: " << f.check << " at step " << f.step << " (t = " << format_double(f.t)
            << "): " << f.detail << '\n';
        return kCheckFailed;
    }
    out << "check: pass\n";
    return kOk;
}

int do_relenergy(const Options& o, std::ostream& out, std::ostream& err)
{
    const LoadedTrajectory run = load_trajectory(o.paths[0], o.overrides);
    const LoadedTrajectory ref = load_trajectory(o.paths[1]);
    const RelEnergySuite suite = relenergy_suite(run.trajectory, ref.trajectory, run.config);
    const fs::path dir = output_dir(o);
    relenergy_csv(suite.gronwall).save(dir / "relenergy.csv");
    const GronwallReport& g = suite.gronwall;
    out << "relenergy: multiplier " << format_double(g.multiplier);
    if (suite.fitted)
        out << " (fitted " << format_double(*suite.fitted) << ")";
    out << ", E_rel(t0) = " << format_double(g.E_rel.front()) << ", E_rel(end) = " << format_double(g.E_rel.back())
        << ", min margin " << format_double(g.min_margin) << '\n';
    if (!suite.ok()) {
        for (std::size_t n = 0; n < g.margin.size(); ++n)
            if (g.margin[n] < 0.0) {
                err << "relenergy failed at step " << n << " (t = " << format_double(g.times[n])
                    << "): lhs " << format_double(g.lhs[n]) << " > rhs " << format_double(g.rhs[n]) << '\n';
                break;
            }
        return kCheckFailed;
    }
    out << "relenergy: pass\n";
    return kOk;
}

int do_sweep(const Options& o, std::ostream& out, std::ostream& err)
{
    const ExperimentConfig ec{load(o), ExperimentKind::EpsSweep, output_dir(o)};
    const EpsSweepReport r = eps_sweep(ec);
    out << eps_sweep_summary(r).str();
    for (std::size_t k = 0; k < r.entries.size(); ++k)
        if (r.entries[k].failure) {
            err << "run " << k << " (eps = " << format_double(r.entries[k].epsilon) << "): ";
            return solver_exit(*r.entries[k].failure, err);
        }
    for (std::size_t k = 0; k < r.entries.size(); ++k)
        if (!r.entries[k].checks.ok()) {
            const CheckFailure& f = *r.entries[k].checks.first_failure;
            err << "run " << k << ": check " << f.check << " failed at step " << f.step << ": " << f.detail << '\n';
            return kCheckFailed;
        }
    if (!r.dissipation_decreasing()) {
        err << "sweep: eps * ||theta||_p^p is not strictly decreasing\n";
        return kCheckFailed;
    }
    if (!r.distances_decreasing()) {
        err << "sweep: successive L1 distances are not decreasing\n";
        return kCheckFailed;
    }
    out << "sweep: pass\n";
    return kOk;
}

int do_refine(const Options& o, std::ostream& out, std::ostream& err)
{
    const ExperimentConfig ec{load(o), ExperimentKind::Refine, output_dir(o)};
    const RefinementReport r = refinement_study(ec);
    out << refinement_summary(r).str();
    if (!r.within_expected()) {
        for (std::size_t k = 0; k < r.orders.size(); ++k)
            if (!(r.orders[k] >= r.expected_lo && r.orders[k] <= r.expected_hi)) {
                err << "refine: order " << format_double(r.orders[k]) << " between levels " << k << " and " << k + 1
                    << " outside [" << format_double(r.expected_lo) << ", " << format_double(r.expected_hi)
                    << "]\n";
                break;
            }
        return kCheckFailed;
    }
    out << "refine: pass\n";
    return kOk;
}

int do_weakstrong(const Options& o, std::ostream& out, std::ostream& err)
{
    const ExperimentConfig ec{load(o), ExperimentKind::WeakStrong, output_dir(o)};
    const WeakStrongReport r = weak_strong_experiment(ec);
    out << weak_strong_summary(r).str();
    out << "weakstrong: delta=0 max E_rel/scale " << format_double(r.zero_delta_max()) << ", scaling spread "
        << format_double(r.scaling_spread()) << ", min envelope margin " << format_double(r.min_gronwall_margin())
        << '\n';
    if (!r.strong_ok()) {
        err << "weakstrong: reference run crossed the xi ceiling\n";
        return kCheckFailed;
    }
    if (r.zero_delta_max() > 1e-12) {
        err << "weakstrong: delta=0 relative energy exceeds 1e-12 * scale\n";
        return kCheckFailed;
    }
    if (r.scaling_spread() > 2.0) {
        err << "weakstrong: E_rel(T)/delta^2 varies by more than a factor 2\n";
        return kCheckFailed;
    }
    if (r.min_gronwall_margin() < 0.0) {
        std::size_t run = 0;
        for (const auto& lvl : r.levels) {
            for (std::size_t i = 0; i < lvl.runs.size(); ++i) {
                const GronwallReport& g = lvl.runs[i].gronwall;
                for (std::size_t n = 0; n < g.margin.size(); ++n)
                    if (g.margin[n] < 0.0) {
                        err << "weakstrong: envelope violated in run_" << run + 1 + i << " at step " << n
                            << ": lhs " << format_double(g.lhs[n]) << " > rhs " << format_double(g.rhs[n]) << '\n';
                        return kCheckFailed;
                    }
            }
            run += lvl.runs.size() + 1;
        }
    }
    out << "weakstrong: pass\n";
    return kOk;
}

int do_plot(const Options& o, std::ostream& out, std::ostream& err)
{
    const auto files = plot_csvs(o.paths[0], output_dir(o));
    if (files.empty()) {
        err << "plot: no energy.csv, energy_series.csv, theta_floor.csv or relenergy.csv under " << o.paths[0] << '\n';
        return kConfigError;
    }
    for (const auto& f : files)
        out << f.string() << '\n';
    return kOk;
}

int dispatch(const Options& o, std::ostream& out, std::ostream& err)
{
    if (o.verb == "simulate")
        return do_simulate(o, out, err);
    if (o.verb == "check")
        return do_check(o, out, err);
    if (o.verb == "relenergy")
        return do_relenergy(o, out, err);
    if (o.verb == "sweep")
        return do_sweep(o, out, err);
    if (o.verb == "refine")
        return do_refine(o, out, err);
    if (o.verb == "weakstrong")
        return do_weakstrong(o, out, err);
    return do_plot(o, out, err);
}

} // namespace

std::string usage()
{
    return R"(usage: fremond <verb> [options]

verbs:
  simulate    [--config FILE]  run one simulation; writes the trajectory and energy_series.csv
  check       TRAJ_DIR         energy, entropy and floor checks on a saved trajectory
  relenergy   RUN_DIR REF_DIR  relative energy of RUN against REF and its Gronwall envelope
  sweep       [--config FILE]  epsilon sweep over experiment.eps_values
  refine      [--config FILE]  refinement study over experiment.levels (experiment.monitor)
  weakstrong  [--config FILE]  perturbed runs against a reference run, delta in experiment.deltas
  plot        CSV_OR_DIR       SVG charts from energy, theta_floor and relenergy CSVs

options:
  --config FILE             configuration file (defaults apply without one)
  --override SECTION.KEY=V  override one config value; repeatable. For check and
                            relenergy it applies to the trajectory's manifest.
  --out DIR                 output directory (default $FREMOND_OUTDIR/<verb>, else fremond_out/<verb>)

config files hold [section] headers and `key = value` lines; `#` starts a comment.
Values are numbers, strings (bare or double-quoted) or lists [a, b, c].
Sections: grid, scheme, potential, initial, run, relenergy, checks, experiment.
See docs/config.md for every key.

exit status: 0 ok, 1 a check failed, 2 bad config or input, 3 solver error.
)";
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    if (args.empty()) {
        err << usage();
        return kConfigError;
    }
    Options o;
    o.verb = args[0];
    if (o.verb == "--help" || o.verb == "-h" || o.verb == "help") {
        out << usage();
        return kOk;
    }
    if (std::find(kVerbs.begin(), kVerbs.end(), o.verb) == kVerbs.end()) {
        err << "unknown verb '" << o.verb << "'\n\n" << usage();
        return kConfigError;
    }

    CLI::App app("fremond " + o.verb, "fremond " + o.verb);
    if (takes_config(o.verb))
        app.add_option("--config", o.config, "configuration file")->check(CLI::ExistingFile);
    app.add_option("--override", o.overrides, "section.key=value")
        ->expected(1)
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
    app.add_option("--out", o.out, "output directory");
    const std::size_t npos = positional_count(o.verb);
    if (npos > 0)
        app.add_option("paths", o.paths, "input paths")->required()->expected(static_cast<int>(npos));

    std::vector<std::string> rest(args.rbegin(), args.rend() - 1);
    try {
        app.parse(rest);
    } catch (const CLI::CallForHelp&) {
        out << app.help() << '\n' << usage();
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "fremond " << o.verb << ": " << e.what() << "\n\n" << usage();
        return kConfigError;
    }

    try {
        return dispatch(o, out, err);
    } catch (const SolverFailure& e) {
        err << "solver error at " << e.what() << '\n';
        return kSolverError;
    } catch (const NewtonDiverged& e) {
        err << "solver error: NewtonDiverged: " << e.what() << '\n';
        return kSolverError;
    } catch (const PositivityLost& e) {
        err << "solver error: PositivityLost: " << e.what() << '\n';
        return kSolverError;
    } catch (const FixedPointDiverged& e) {
        err << "solver error: FixedPointDiverged: " << e.what() << '\n';
        return kSolverError;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kConfigError;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << '\n';
        return kConfigError;
    }
}

} // namespace fremond::cli
