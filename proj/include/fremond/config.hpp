#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "fremond/grid.hpp"
#include "fremond/potential.hpp"
#include "fremond/relenergy.hpp"
#include "fremond/stepper.hpp"

namespace fremond {

/**
 * Flat INI-style document: `[section]` headers followed by `key = value` lines.
 * `#` starts a comment. Values are numbers, bare or double-quoted strings, or
 * bracketed lists `[a, b, c]`. Keys are addressed as "section.key".
 */
class ConfigDocument {
public:
    static ConfigDocument parse(const std::string& text, const std::string& origin = "<config>");
    static ConfigDocument load(const std::string& path);

    /// Applies "section.key=value"; throws ConfigError on malformed input.
    void apply_override(const std::string& assignment);

    bool has(const std::string& key) const { return values_.count(key) != 0; }
    /// Raw value text with surrounding quotes removed.
    std::string get_string(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key, double fallback) const;
    long long get_int(const std::string& key, long long fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    std::vector<double> get_list(const std::string& key, const std::vector<double>& fallback) const;
    std::vector<std::string> get_string_list(const std::string& key, const std::vector<std::string>& fallback) const;

    /// Keys that were present but never read; used to reject typos.
    std::vector<std::string> unread_keys() const;

private:
    const std::string* find(const std::string& key) const;

    std::map<std::string, std::string> values_;
    mutable std::map<std::string, bool> read_;
    std::string origin_;
};

struct GridSpec {
    int dim = 1;
    std::vector<std::size_t> n{64};
    std::vector<double> extent{1.0};

    Grid make() const;
};

struct InitialSpec {
    /// uniform, cosine_bump, random_smooth, steady, or file.
    std::string preset = "cosine_bump";
    double theta_mean = 1.0;
    double theta_amp = 0.5;
    double phi_mean = 0.0;
    double phi_amp = 0.5;
    /// steady preset: phi = phi_star, theta = F'(phi_star).
    double phi_star = 1.1;
    std::uint64_t seed = 1;
    int modes = 4;
    std::string theta_file;
    std::string phi_file;
    /// zero, or equation (phi_1 = Delta phi_0 - F'(phi_0) + theta_0).
    std::string phi_t0 = "zero";
};

struct CheckSpec {
    /// Cumulative energy tolerance relative to E(0).
    double energy_tol = 1e-4;
    /// Absolute tolerance on negative entropy margins.
    double entropy_tol = 1e-3;
    double floor_tol = 1e-10;
    std::vector<std::string> test_functions{"one", "cosine"};
    double xi_ceiling = 1e3;
};

struct ExperimentSpec {
    std::vector<double> eps_values{1e-2, 1e-3, 1e-4};
    /// Cells per axis for refinement-type experiments.
    std::vector<std::size_t> levels{32, 64, 128};
    /// dt = dt_factor * h^2 on refinement levels.
    double dt_factor = 0.5;
    /// refine monitor: manufactured, energy_margin, entropy_defect.
    std::string monitor = "manufactured";
    std::vector<double> deltas{0.0, 0.1, 0.05, 0.025};
    /// Perturbed field in weakstrong: phi or theta.
    std::string perturb = "phi";
    double bump_center = 0.25;
    double bump_width = 0.2;
    /// Gronwall multiplier; negative means calibrate on the coarsest level.
    double multiplier = -1.0;
    /// Safety factor applied to the fitted multiplier.
    double multiplier_safety = 2.0;
    double mms_mean = 2.0;
    double mms_amp = 0.5;
    /// Experiment runs keep every k-th state on disk (the final state always); 0 picks k so that about 100 remain.
    int snapshot_every = 0;
};

struct RunConfig {
    GridSpec grid;
    SchemeConfig scheme;
    /// Set when the scheme gives dt as a multiple of h_min^2; dt is then shrunk to the
    /// nearest value that divides [t0, t_end] into whole steps.
    double dt_over_h2 = 0.0;
    Potential potential = Potential::double_well(4.0);
    InitialSpec initial;
    double t0 = 0.0;
    double t_end = 0.1;
    RelEnergyConfig relenergy;
    CheckSpec checks;
    ExperimentSpec experiment;
};

/// Builds a RunConfig; throws ConfigError on invalid or unknown keys.
RunConfig build_config(const ConfigDocument& doc);
RunConfig load_config(const std::string& path, const std::vector<std::string>& overrides = {});

/// Resolved configuration in the same grammar (manifest form); parse(render(c)) reproduces c.
std::string render_config(const RunConfig& cfg);

/// Returns a copy with grid resolution n (every axis) and dt = dt_factor * h_min^2, shrunk to divide the run.
RunConfig at_level(const RunConfig& cfg, std::size_t n, double dt_factor);

} // namespace fremond
