#include "fremond/config.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "fremond/errors.hpp"

namespace fremond {

namespace {

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::string unquote(const std::string& s)
{
    if (s.size() >= 2 && s.front() == '"' && s.back() == '"')
        return s.substr(1, s.size() - 2);
    return s;
}

// Drops a trailing comment that is not inside quotes.
std::string strip_comment(const std::string& line)
{
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"')
            quoted = !quoted;
        else if (line[i] == '#' && !quoted)
            return line.substr(0, i);
    }
    return line;
}

double parse_number(const std::string& text, const std::string& key)
{
    const std::string t = trim(text);
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(t.c_str(), &end);
    if (t.empty() || end != t.c_str() + t.size() || errno == ERANGE || !std::isfinite(v))
        throw ConfigError("'" + key + "': expected a number, got '" + text + "'");
    return v;
}

std::vector<std::string> split_list(const std::string& raw, const std::string& key)
{
    const std::string t = trim(raw);
    if (t.size() < 2 || t.front() != '[' || t.back() != ']')
        throw ConfigError("'" + key + "': expected a list [a, b, ...], got '" + raw + "'");
    std::vector<std::string> items;
    std::stringstream ss(t.substr(1, t.size() - 2));
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty())
            items.push_back(unquote(item));
    }
    return items;
}

std::string fmt(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

template <class T>
std::string fmt_list(const std::vector<T>& v)
{
    std::string s = "[";
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i)
            s += ", ";
        if constexpr (std::is_same_v<T, std::string>)
            s += "\"" + v[i] + "\"";
        else
            s += fmt(static_cast<double>(v[i]));
    }
    return s + "]";
}

} // namespace

ConfigDocument ConfigDocument::parse(const std::string& text, const std::string& origin)
{
    ConfigDocument doc;
    doc.origin_ = origin;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        line = trim(strip_comment(line));
        if (line.empty())
            continue;
        const std::string where = origin + ":" + std::to_string(lineno);
        if (line.front() == '[' && line.find('=') == std::string::npos) {
            if (line.back() != ']')
                throw ConfigError(where + ": unterminated section header");
            section = trim(line.substr(1, line.size() - 2));
            if (section.empty())
                throw ConfigError(where + ": empty section name");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(where + ": expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty())
            throw ConfigError(where + ": empty key or value");
        if (section.empty())
            throw ConfigError(where + ": key '" + key + "' outside of any [section]");
        doc.values_[section + "." + key] = value;
    }
    return doc;
}

ConfigDocument ConfigDocument::load(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str(), path);
}

void ConfigDocument::apply_override(const std::string& assignment)
{
    const auto eq = assignment.find('=');
    if (eq == std::string::npos)
        throw ConfigError("override '" + assignment + "' is not of the form section.key=value");
    const std::string key = trim(assignment.substr(0, eq));
    const std::string value = trim(assignment.substr(eq + 1));
    if (key.find('.') == std::string::npos || value.empty())
        throw ConfigError("override '" + assignment + "' is not of the form section.key=value");
    values_[key] = value;
}

const std::string* ConfigDocument::find(const std::string& key) const
{
    const auto it = values_.find(key);
    if (it == values_.end())
        return nullptr;
    read_[key] = true;
    return &it->second;
}

std::string ConfigDocument::get_string(const std::string& key, const std::string& fallback) const
{
    const std::string* v = find(key);
    return v ? unquote(*v) : fallback;
}

double ConfigDocument::get_double(const std::string& key, double fallback) const
{
    const std::string* v = find(key);
    return v ? parse_number(*v, key) : fallback;
}

long long ConfigDocument::get_int(const std::string& key, long long fallback) const
{
    const std::string* v = find(key);
    if (!v)
        return fallback;
    const double d = parse_number(*v, key);
    if (d != std::floor(d))
        throw ConfigError("'" + key + "': expected an integer, got '" + *v + "'");
    return static_cast<long long>(d);
}

bool ConfigDocument::get_bool(const std::string& key, bool fallback) const
{
    const std::string* v = find(key);
    if (!v)
        return fallback;
    const std::string s = unquote(*v);
    if (s == "true" || s == "1")
        return true;
    if (s == "false" || s == "0")
        return false;
    throw ConfigError("'" + key + "': expected true or false, got '" + *v + "'");
}

std::vector<double> ConfigDocument::get_list(const std::string& key, const std::vector<double>& fallback) const
{
    const std::string* v = find(key);
    if (!v)
        return fallback;
    std::vector<double> out;
    for (const auto& item : split_list(*v, key))
        out.push_back(parse_number(item, key));
    return out;
}

std::vector<std::string> ConfigDocument::get_string_list(const std::string& key,
                                                         const std::vector<std::string>& fallback) const
{
    const std::string* v = find(key);
    return v ? split_list(*v, key) : fallback;
}

std::vector<std::string> ConfigDocument::unread_keys() const
{
    std::vector<std::string> out;
    for (const auto& [k, v] : values_)
        if (!read_.count(k))
            out.push_back(k);
    return out;
}

Grid GridSpec::make() const
{
    if (dim == 1) {
        if (n.size() != 1 || extent.size() != 1)
            throw ConfigError("grid: 1D grids take one n and one extent");
        return Grid::line(n[0], extent[0]);
    }
    if (dim == 2) {
        if (n.size() != 2 || extent.size() != 2)
            throw ConfigError("grid: 2D grids take two n and two extent values");
        return Grid::box(n[0], n[1], extent[0], extent[1]);
    }
    throw ConfigError("grid: dim must be 1 or 2");
}

namespace {

std::vector<std::size_t> to_sizes(const std::vector<double>& v, const std::string& key)
{
    std::vector<std::size_t> out;
    for (double d : v) {
        if (d < 1 || d != std::floor(d))
            throw ConfigError("'" + key + "': expected positive integers");
        out.push_back(static_cast<std::size_t>(d));
    }
    return out;
}

// Largest dt <= target that divides the run into whole steps.
double fitted_dt(double target, double span)
{
    if (!(span > 0.0))
        return target;
    const double steps = std::ceil(span / target - 1e-9);
    return span / std::max(1.0, steps);
}

double min_h(const Grid& g)
{
    return g.dim() == 1 ? g.h(0) : std::min(g.h(0), g.h(1));
}

} // namespace

RunConfig build_config(const ConfigDocument& doc)
{
    RunConfig c;

    c.grid.dim = static_cast<int>(doc.get_int("grid.dim", 1));
    const std::vector<double> default_n(c.grid.dim == 2 ? 2 : 1, 64.0);
    const std::vector<double> default_extent(c.grid.dim == 2 ? 2 : 1, 1.0);
    c.grid.n = to_sizes(doc.get_list("grid.n", default_n), "grid.n");
    c.grid.extent = doc.get_list("grid.extent", default_extent);
    if (c.grid.dim == 2 && c.grid.n.size() == 1)
        c.grid.n.push_back(c.grid.n[0]);
    if (c.grid.dim == 2 && c.grid.extent.size() == 1)
        c.grid.extent.push_back(c.grid.extent[0]);
    Grid grid = [&] {
        try {
            return c.grid.make();
        } catch (const std::invalid_argument& e) {
            throw ConfigError(std::string("grid: ") + e.what());
        }
    }();

    SchemeConfig& s = c.scheme;
    s.kappa = doc.get_double("scheme.kappa", s.kappa);
    s.epsilon = doc.get_double("scheme.epsilon", s.epsilon);
    s.p = doc.get_double("scheme.p", s.p);
    c.dt_over_h2 = doc.get_double("scheme.dt_over_h2", 0.0);
    if (doc.has("scheme.dt") && c.dt_over_h2 > 0.0)
        throw ConfigError("scheme: give either dt or dt_over_h2, not both");
    s.dt = c.dt_over_h2 > 0.0 ? c.dt_over_h2 * min_h(grid) * min_h(grid) : doc.get_double("scheme.dt", s.dt);
    s.fp_tol = doc.get_double("scheme.fp_tol", s.fp_tol);
    s.fp_max_iter = static_cast<int>(doc.get_int("scheme.fp_max_iter", s.fp_max_iter));
    s.newton_tol = doc.get_double("scheme.newton_tol", s.newton_tol);
    s.newton_max_iter = static_cast<int>(doc.get_int("scheme.newton_max_iter", s.newton_max_iter));
    s.linear_tol = doc.get_double("scheme.linear_tol", s.linear_tol);
    s.linear_max_iter = static_cast<int>(doc.get_int("scheme.linear_max_iter", s.linear_max_iter));
    s.freeze_phase = doc.get_bool("scheme.freeze_phase", s.freeze_phase);
    s.validate();

    const double lambda = doc.get_double("potential.lambda", 4.0);
    const std::string pot = doc.get_string("potential.potential", "double_well");
    try {
        if (!pot.empty() && pot.front() == '[')
            c.potential = Potential::polynomial(doc.get_list("potential.potential", {}), lambda);
        else if (pot == "double_well")
            c.potential = Potential::double_well(lambda);
        else
            throw ConfigError("potential: expected \"double_well\" or a coefficient list, got '" + pot + "'");
        if (c.potential.degree() >= 2)
            validate_hypotheses(c.potential, -10.0, 10.0, 4001);
    } catch (const ValidationFailed& e) {
        throw ConfigError(std::string("potential: ") + e.what());
    }

    InitialSpec& i = c.initial;
    i.preset = doc.get_string("initial.preset", i.preset);
    i.theta_mean = doc.get_double("initial.theta_mean", i.theta_mean);
    i.theta_amp = doc.get_double("initial.theta_amp", i.theta_amp);
    i.phi_mean = doc.get_double("initial.phi_mean", i.phi_mean);
    i.phi_amp = doc.get_double("initial.phi_amp", i.phi_amp);
    i.phi_star = doc.get_double("initial.phi_star", i.phi_star);
    i.seed = static_cast<std::uint64_t>(doc.get_int("initial.seed", static_cast<long long>(i.seed)));
    i.modes = static_cast<int>(doc.get_int("initial.modes", i.modes));
    i.theta_file = doc.get_string("initial.theta_file", i.theta_file);
    i.phi_file = doc.get_string("initial.phi_file", i.phi_file);
    i.phi_t0 = doc.get_string("initial.phi_t0", i.phi_t0);
    static const std::vector<std::string> presets{"uniform", "cosine_bump", "random_smooth", "steady", "file"};
    if (std::find(presets.begin(), presets.end(), i.preset) == presets.end())
        throw ConfigError("initial: unknown preset '" + i.preset + "'");
    if (i.phi_t0 != "zero" && i.phi_t0 != "equation")
        throw ConfigError("initial: phi_t0 must be zero or equation");
    if (i.modes < 1)
        throw ConfigError("initial: modes must be positive");

    c.t0 = doc.get_double("run.t0", c.t0);
    c.t_end = doc.get_double("run.t_end", c.t_end);
    if (c.dt_over_h2 > 0.0)
        s.dt = fitted_dt(s.dt, c.t_end - c.t0);
    step_count(c.t0, c.t_end, s.dt);

    c.relenergy.M = doc.get_double("relenergy.M", c.relenergy.M);
    if (!(c.relenergy.M > 0.0))
        throw ConfigError("relenergy: M must be positive");

    CheckSpec& k = c.checks;
    k.energy_tol = doc.get_double("checks.energy_tol", k.energy_tol);
    k.entropy_tol = doc.get_double("checks.entropy_tol", k.entropy_tol);
    k.floor_tol = doc.get_double("checks.floor_tol", k.floor_tol);
    k.test_functions = doc.get_string_list("checks.test_functions", k.test_functions);
    k.xi_ceiling = doc.get_double("checks.xi_ceiling", k.xi_ceiling);
    static const std::vector<std::string> fns{"one", "cosine", "damped_cosine"};
    for (const auto& name : k.test_functions)
        if (std::find(fns.begin(), fns.end(), name) == fns.end())
            throw ConfigError("checks: unknown test function '" + name + "'");

    ExperimentSpec& x = c.experiment;
    x.eps_values = doc.get_list("experiment.eps_values", x.eps_values);
    x.levels = to_sizes(doc.get_list("experiment.levels", std::vector<double>(x.levels.begin(), x.levels.end())),
                        "experiment.levels");
    x.dt_factor = doc.get_double("experiment.dt_factor", x.dt_factor);
    x.monitor = doc.get_string("experiment.monitor", x.monitor);
    x.deltas = doc.get_list("experiment.deltas", x.deltas);
    x.perturb = doc.get_string("experiment.perturb", x.perturb);
    x.bump_center = doc.get_double("experiment.bump_center", x.bump_center);
    x.bump_width = doc.get_double("experiment.bump_width", x.bump_width);
    x.multiplier = doc.get_double("experiment.multiplier", x.multiplier);
    x.multiplier_safety = doc.get_double("experiment.multiplier_safety", x.multiplier_safety);
    x.mms_mean = doc.get_double("experiment.mms_mean", x.mms_mean);
    x.mms_amp = doc.get_double("experiment.mms_amp", x.mms_amp);
    x.snapshot_every = static_cast<int>(doc.get_int("experiment.snapshot_every", x.snapshot_every));
    if (x.snapshot_every < 0)
        throw ConfigError("experiment: snapshot_every must be >= 0");
    if (x.perturb != "phi" && x.perturb != "theta")
        throw ConfigError("experiment: perturb must be phi or theta");
    if (!(x.dt_factor > 0.0))
        throw ConfigError("experiment: dt_factor must be positive");

    const auto unread = doc.unread_keys();
    if (!unread.empty()) {
        std::string msg = "unknown config keys:";
        for (const auto& key : unread)
            msg += " " + key;
        throw ConfigError(msg);
    }
    return c;
}

RunConfig load_config(const std::string& path, const std::vector<std::string>& overrides)
{
    ConfigDocument doc = ConfigDocument::load(path);
    for (const auto& o : overrides)
        doc.apply_override(o);
    return build_config(doc);
}

std::string render_config(const RunConfig& c)
{
    std::ostringstream os;
    auto kv = [&os](const std::string& k, const std::string& v) { os << k << " = " << v << '\n'; };
    auto q = [](const std::string& s) { return "\"" + s + "\""; };

    os << "[grid]\n";
    kv("dim", std::to_string(c.grid.dim));
    kv("n", fmt_list(c.grid.n));
    kv("extent", fmt_list(c.grid.extent));

    const SchemeConfig& s = c.scheme;
    os << "\n[scheme]\n";
    kv("kappa", fmt(s.kappa));
    kv("epsilon", fmt(s.epsilon));
    kv("p", fmt(s.p));
    kv("dt", fmt(s.dt));
    kv("fp_tol", fmt(s.fp_tol));
    kv("fp_max_iter", std::to_string(s.fp_max_iter));
    kv("newton_tol", fmt(s.newton_tol));
    kv("newton_max_iter", std::to_string(s.newton_max_iter));
    kv("linear_tol", fmt(s.linear_tol));
    kv("linear_max_iter", std::to_string(s.linear_max_iter));
    kv("freeze_phase", s.freeze_phase ? "true" : "false");

    os << "\n[potential]\n";
    kv("potential", c.potential.is_double_well() ? q("double_well") : fmt_list(c.potential.coefficients()));
    kv("lambda", fmt(c.potential.lambda()));

    const InitialSpec& i = c.initial;
    os << "\n[initial]\n";
    kv("preset", q(i.preset));
    kv("theta_mean", fmt(i.theta_mean));
    kv("theta_amp", fmt(i.theta_amp));
    kv("phi_mean", fmt(i.phi_mean));
    kv("phi_amp", fmt(i.phi_amp));
    kv("phi_star", fmt(i.phi_star));
    kv("seed", std::to_string(i.seed));
    kv("modes", std::to_string(i.modes));
    if (!i.theta_file.empty())
        kv("theta_file", q(i.theta_file));
    if (!i.phi_file.empty())
        kv("phi_file", q(i.phi_file));
    kv("phi_t0", q(i.phi_t0));

    os << "\n[run]\n";
    kv("t0", fmt(c.t0));
    kv("t_end", fmt(c.t_end));

    os << "\n[relenergy]\n";
    kv("M", fmt(c.relenergy.M));

    const CheckSpec& k = c.checks;
    os << "\n[checks]\n";
    kv("energy_tol", fmt(k.energy_tol));
    kv("entropy_tol", fmt(k.entropy_tol));
    kv("floor_tol", fmt(k.floor_tol));
    kv("test_functions", fmt_list(k.test_functions));
    kv("xi_ceiling", fmt(k.xi_ceiling));

    const ExperimentSpec& x = c.experiment;
    os << "\n[experiment]\n";
    kv("eps_values", fmt_list(x.eps_values));
    kv("levels", fmt_list(x.levels));
    kv("dt_factor", fmt(x.dt_factor));
    kv("monitor", q(x.monitor));
    kv("deltas", fmt_list(x.deltas));
    kv("perturb", q(x.perturb));
    kv("bump_center", fmt(x.bump_center));
    kv("bump_width", fmt(x.bump_width));
    kv("multiplier", fmt(x.multiplier));
    kv("multiplier_safety", fmt(x.multiplier_safety));
    kv("mms_mean", fmt(x.mms_mean));
    kv("mms_amp", fmt(x.mms_amp));
    kv("snapshot_every", std::to_string(x.snapshot_every));
    return os.str();
}

RunConfig at_level(const RunConfig& cfg, std::size_t n, double dt_factor)
{
    RunConfig c = cfg;
    for (auto& v : c.grid.n)
        v = n;
    const Grid g = c.grid.make();
    const double h = min_h(g);
    c.scheme.dt = fitted_dt(dt_factor * h * h, c.t_end - c.t0);
    c.dt_over_h2 = dt_factor;
    return c;
}

} // namespace fremond
