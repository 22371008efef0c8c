#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "fremond/config.hpp"
#include "fremond/stepper.hpp"

namespace fremond {

/// %.17g; round-trips every double.
std::string format_double(double v);

/**
 * Snapshot format:
 *   FIELD dim=<d> n=<n1[,n2]> h=<h1[,h2]> t=<time>
 * followed by the values in row-major order, one per line.
 */
void write_field(std::ostream& out, const Field& f, double t);

struct FieldSnapshot {
    Field field;
    double t = 0.0;
};

/// Reads one FIELD block; throws IoError on malformed input.
FieldSnapshot read_field(std::istream& in, const std::string& origin = "<stream>");

void save_field(const std::filesystem::path& path, const Field& f, double t);
FieldSnapshot load_field(const std::filesystem::path& path);

/// A state file holds three FIELD blocks: theta, phi, phi_t.
void save_state(const std::filesystem::path& path, const State& s);
State load_state(const std::filesystem::path& path);

/// Writes manifest.txt, index.csv (step,t,file) and state_<n>.field into dir.
void save_trajectory(const std::filesystem::path& dir, const Trajectory& traj, const RunConfig& cfg);

struct LoadedTrajectory {
    RunConfig config;
    Trajectory trajectory;
};
/// Overrides are applied to the manifest before it is rebuilt into a RunConfig.
LoadedTrajectory load_trajectory(const std::filesystem::path& dir, const std::vector<std::string>& overrides = {});

/// Small CSV writer; `#` comment lines precede the header.
class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

    void add_comment(std::string line) { comments_.push_back(std::move(line)); }
    void add_row(std::vector<std::string> row);
    std::size_t rows() const { return rows_.size(); }

    std::string str() const;
    void save(const std::filesystem::path& path) const;

private:
    std::vector<std::string> header_;
    std::vector<std::string> comments_;
    std::vector<std::vector<std::string>> rows_;
};

struct CsvData {
    std::vector<std::string> comments;
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    /// Column index by name; throws IoError if missing.
    std::size_t column(const std::string& name) const;
    std::vector<double> numeric(const std::string& name) const;
};
CsvData load_csv(const std::filesystem::path& path);

void write_text(const std::filesystem::path& path, const std::string& text);

} // namespace fremond
