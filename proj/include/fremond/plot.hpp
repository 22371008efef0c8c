#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace fremond {

struct PlotSeries {
    std::string name;
    std::vector<double> x;
    std::vector<double> y;
};

struct ChartSpec {
    std::string title;
    std::string xlabel;
    std::string ylabel;
    int width = 720;
    int height = 440;
    /// Longer series are thinned to about this many points (endpoints kept).
    std::size_t max_points = 2000;
};

/// Standalone SVG with axes, tick labels, one polyline per series and a legend.
/// Non-finite points break the polyline.
std::string line_chart(const ChartSpec& spec, const std::vector<PlotSeries>& series);

/**
 * Charts for the known CSVs under `input` (a CSV file or a directory searched
 * recursively), written below `outdir` with the relative path and .svg suffix:
 *   energy.csv / energy_series.csv   E(t)
 *   theta_floor.csv                  min theta(t) against h(t)
 *   relenergy.csv                    E_rel(t) against the Gronwall envelope
 * Returns the written files in sorted order.
 */
std::vector<std::filesystem::path> plot_csvs(const std::filesystem::path& input, const std::filesystem::path& outdir);

} // namespace fremond
