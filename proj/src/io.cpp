#include "fremond/io.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "fremond/errors.hpp"

namespace fs = std::filesystem;

namespace fremond {

std::string format_double(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_field(std::ostream& out, const Field& f, double t)
{
    const Grid& g = f.grid();
    out << "FIELD dim=" << g.dim() << " n=" << g.n(0);
    if (g.dim() == 2)
        out << ',' << g.n(1);
    out << " h=" << format_double(g.h(0));
    if (g.dim() == 2)
        out << ',' << format_double(g.h(1));
    out << " t=" << format_double(t) << '\n';
    for (double v : f.values())
        out << format_double(v) << '\n';
}

namespace {

std::vector<std::string> split(const std::string& s, char sep)
{
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep))
        out.push_back(item);
    return out;
}

double to_double(const std::string& s, const std::string& origin)
{
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (s.empty() || end != s.c_str() + s.size())
        throw IoError(origin + ": malformed number '" + s + "'");
    return v;
}

} // namespace

FieldSnapshot read_field(std::istream& in, const std::string& origin)
{
    std::string line;
    while (std::getline(in, line) && line.find_first_not_of(" \t\r") == std::string::npos) {
    }
    if (line.rfind("FIELD", 0) != 0)
        throw IoError(origin + ": expected a FIELD header");

    int dim = 0;
    std::vector<std::size_t> n;
    std::vector<double> h;
    double t = 0.0;
    bool have_t = false;
    std::istringstream hs(line.substr(5));
    std::string tok;
    while (hs >> tok) {
        const auto eq = tok.find('=');
        if (eq == std::string::npos)
            throw IoError(origin + ": malformed header token '" + tok + "'");
        const std::string key = tok.substr(0, eq), val = tok.substr(eq + 1);
        if (key == "dim")
            dim = static_cast<int>(to_double(val, origin));
        else if (key == "n")
            for (const auto& part : split(val, ','))
                n.push_back(static_cast<std::size_t>(to_double(part, origin)));
        else if (key == "h")
            for (const auto& part : split(val, ','))
                h.push_back(to_double(part, origin));
        else if (key == "t") {
            t = to_double(val, origin);
            have_t = true;
        } else
            throw IoError(origin + ": unknown header key '" + key + "'");
    }
    if ((dim != 1 && dim != 2) || n.size() != static_cast<std::size_t>(dim) ||
        h.size() != static_cast<std::size_t>(dim) || !have_t)
        throw IoError(origin + ": incomplete FIELD header");

    Grid grid = [&] {
        try {
            return dim == 1 ? Grid::line(n[0], h[0] * static_cast<double>(n[0]))
                            : Grid::box(n[0], n[1], h[0] * static_cast<double>(n[0]), h[1] * static_cast<double>(n[1]));
        } catch (const std::invalid_argument& e) {
            throw IoError(origin + ": " + e.what());
        }
    }();
    std::vector<double> values(grid.size());
    for (auto& v : values) {
        std::string word;
        if (!(in >> word))
            throw IoError(origin + ": expected " + std::to_string(grid.size()) + " values");
        v = to_double(word, origin);
    }
    return {Field(grid, std::move(values)), t};
}

void save_field(const fs::path& path, const Field& f, double t)
{
    std::ostringstream os;
    write_field(os, f, t);
    write_text(path, os.str());
}

FieldSnapshot load_field(const fs::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open '" + path.string() + "'");
    return read_field(in, path.string());
}

void save_state(const fs::path& path, const State& s)
{
    std::ostringstream os;
    write_field(os, s.theta, s.t);
    write_field(os, s.phi, s.t);
    write_field(os, s.phi_t, s.t);
    write_text(path, os.str());
}

State load_state(const fs::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open '" + path.string() + "'");
    FieldSnapshot th = read_field(in, path.string());
    FieldSnapshot ph = read_field(in, path.string());
    FieldSnapshot rt = read_field(in, path.string());
    if (!(th.field.grid() == ph.field.grid()) || !(th.field.grid() == rt.field.grid()))
        throw IoError(path.string() + ": state blocks live on different grids");
    return State{th.t, std::move(th.field), std::move(ph.field), std::move(rt.field)};
}

void save_trajectory(const fs::path& dir, const Trajectory& traj, const RunConfig& cfg)
{
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec)
        throw IoError("cannot create '" + dir.string() + "': " + ec.message());
    RunConfig resolved = cfg;
    resolved.scheme = traj.config;
    write_text(dir / "manifest.txt", render_config(resolved));

    CsvTable index({"step", "t", "file"});
    for (std::size_t n = 0; n < traj.size(); ++n) {
        const std::string name = "state_" + std::to_string(n) + ".field";
        save_state(dir / name, traj.states[n]);
        index.add_row({std::to_string(n), format_double(traj.states[n].t), name});
    }
    index.save(dir / "index.csv");
}

LoadedTrajectory load_trajectory(const fs::path& dir, const std::vector<std::string>& overrides)
{
    LoadedTrajectory out;
    try {
        ConfigDocument doc = ConfigDocument::load((dir / "manifest.txt").string());
        for (const auto& o : overrides)
            doc.apply_override(o);
        out.config = build_config(doc);
    } catch (const ConfigError& e) {
        throw IoError(dir.string() + ": bad manifest: " + e.what());
    }
    out.trajectory.config = out.config.scheme;
    const CsvData index = load_csv(dir / "index.csv");
    const std::size_t file_col = index.column("file");
    for (const auto& row : index.rows)
        out.trajectory.states.push_back(load_state(dir / row.at(file_col)));
    return out;
}

void CsvTable::add_row(std::vector<std::string> row)
{
    if (row.size() != header_.size())
        throw IoError("csv row has " + std::to_string(row.size()) + " columns, header has " +
                      std::to_string(header_.size()));
    rows_.push_back(std::move(row));
}

std::string CsvTable::str() const
{
    std::ostringstream os;
    for (const auto& c : comments_)
        os << "# " << c << '\n';
    auto line = [&os](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i)
            os << (i ? "," : "") << cells[i];
        os << '\n';
    };
    line(header_);
    for (const auto& r : rows_)
        line(r);
    return os.str();
}

void CsvTable::save(const fs::path& path) const { write_text(path, str()); }

std::size_t CsvData::column(const std::string& name) const
{
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name)
            return i;
    throw IoError("csv column '" + name + "' not found");
}

std::vector<double> CsvData::numeric(const std::string& name) const
{
    const std::size_t c = column(name);
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& r : rows)
        out.push_back(to_double(r.at(c), name));
    return out;
}

CsvData load_csv(const fs::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open '" + path.string() + "'");
    CsvData data;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty())
            continue;
        if (line[0] == '#') {
            data.comments.push_back(line.size() > 2 ? line.substr(2) : "");
            continue;
        }
        auto cells = split(line, ',');
        if (data.header.empty())
            data.header = std::move(cells);
        else
            data.rows.push_back(std::move(cells));
    }
    if (data.header.empty())
        throw IoError(path.string() + ": empty csv");
    return data;
}

void write_text(const fs::path& path, const std::string& text)
{
    if (path.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(path.parent_path(), ec);
        if (ec)
            throw IoError("cannot create '" + path.parent_path().string() + "': " + ec.message());
    }
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw IoError("cannot write '" + path.string() + "'");
    out << text;
    if (!out)
        throw IoError("write failed for '" + path.string() + "'");
}

} // namespace fremond
