#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "fremond/errors.hpp"
#include "fremond/io.hpp"
#include "fremond/plot.hpp"
#include "support.hpp"

using namespace fremond;
namespace fs = std::filesystem;

namespace {

std::size_t count(const std::string& s, const std::string& needle)
{
    std::size_t n = 0;
    for (std::size_t pos = s.find(needle); pos != std::string::npos; pos = s.find(needle, pos + 1))
        ++n;
    return n;
}

} // namespace

TEST_CASE("line chart structure")
{
    ChartSpec spec;
    spec.title = "E <&> t";
    const std::string svg =
        line_chart(spec, {{"a", {0, 1, 2}, {1, 2, 3}}, {"b", {0, 1, 2, 3}, {3, NAN, 1, 0}}});
    CHECK(svg.rfind("<svg", 0) == 0);
    CHECK(svg.find("</svg>") != std::string::npos);
    CHECK(svg.find("E &lt;&amp;&gt; t") != std::string::npos);
    // One polyline for a, two for b split at the NaN.
    CHECK(count(svg, "<polyline") == 3);
    CHECK(line_chart(spec, {}).find("</svg>") != std::string::npos);

    PlotSeries big{"big", {}, {}};
    for (int i = 0; i < 10000; ++i) {
        big.x.push_back(i);
        big.y.push_back(std::sin(i * 1e-3));
    }
    spec.max_points = 100;
    CHECK(line_chart(spec, {big}).size() < 20000);
}

TEST_CASE("plot_csvs mirrors the input tree")
{
    const fs::path dir = testing::scratch_dir("plot");
    CsvTable e({"step", "t", "value", "margin", "pass"});
    e.add_row({"0", "0", "1", "0", "1"});
    e.add_row({"1", "0.1", "0.9", "0", "1"});
    e.save(dir / "in" / "run_1" / "energy.csv");
    CsvTable other({"x"});
    other.add_row({"1"});
    other.save(dir / "in" / "unrelated.csv");

    const auto files = plot_csvs(dir / "in", dir / "out");
    REQUIRE(files.size() == 1);
    CHECK(files[0] == dir / "out" / "run_1" / "energy.svg");
    CHECK(testing::slurp(files[0]).find("<polyline") != std::string::npos);

    CHECK_THROWS_AS(plot_csvs(dir / "nope", dir / "out"), IoError);
    CHECK_THROWS_AS(plot_csvs(dir / "in" / "unrelated.csv", dir / "out"), IoError);
    fs::remove_all(dir);
}
