#include "fremond/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "fremond/errors.hpp"
#include "fremond/io.hpp"

namespace fs = std::filesystem;

namespace fremond {

namespace {

const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

std::string num(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

std::string px(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string escape(const std::string& s)
{
    std::string out;
    for (char c : s) {
        switch (c) {
        case '&':
            out += "&amp;";
            break;
        case '<':
            out += "&lt;";
            break;
        case '>':
            out += "&gt;";
            break;
        case '"':
            out += "&quot;";
            break;
        default:
            out += c;
        }
    }
    return out;
}

struct Range {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();

    void add(double v)
    {
        if (std::isfinite(v)) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    }
    void settle()
    {
        if (!(lo <= hi)) {
            lo = 0.0;
            hi = 1.0;
        } else if (hi - lo <= 1e-12 * std::max(1.0, std::abs(hi))) {
            const double pad = std::max(1e-12, 0.05 * std::abs(hi));
            lo -= pad;
            hi += pad;
        }
    }
};

std::vector<std::size_t> thin(std::size_t n, std::size_t max_points)
{
    std::vector<std::size_t> idx;
    if (n == 0)
        return idx;
    const std::size_t stride = std::max<std::size_t>(1, (n + max_points - 1) / std::max<std::size_t>(1, max_points));
    for (std::size_t k = 0; k < n; k += stride)
        idx.push_back(k);
    if (idx.back() != n - 1)
        idx.push_back(n - 1);
    return idx;
}

} // namespace

std::string line_chart(const ChartSpec& spec, const std::vector<PlotSeries>& series)
{
    const double W = spec.width, H = spec.height;
    const double left = 80, right = 20, top = 40, bottom = 55;
    const double pw = W - left - right, ph = H - top - bottom;

    Range rx, ry;
    for (const auto& s : series) {
        if (s.x.size() != s.y.size())
            throw ValidationFailed("plot series '" + s.name + "' has mismatched x and y lengths");
        for (std::size_t k = 0; k < s.x.size(); ++k)
            if (std::isfinite(s.x[k]) && std::isfinite(s.y[k])) {
                rx.add(s.x[k]);
                ry.add(s.y[k]);
            }
    }
    rx.settle();
    ry.settle();
    auto X = [&](double x) { return left + (x - rx.lo) / (rx.hi - rx.lo) * pw; };
    auto Y = [&](double y) { return top + ph - (y - ry.lo) / (ry.hi - ry.lo) * ph; };

    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << spec.width << "\" height=\"" << spec.height
       << "\" viewBox=\"0 0 " << spec.width << ' ' << spec.height << "\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << px(W / 2) << "\" y=\"22\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"15\">"
       << escape(spec.title) << "</text>\n";
    os << "<rect x=\"" << px(left) << "\" y=\"" << px(top) << "\" width=\"" << px(pw) << "\" height=\"" << px(ph)
       << "\" fill=\"none\" stroke=\"#333\"/>\n";

    const int ticks = 5;
    for (int i = 0; i <= ticks; ++i) {
        const double fx = rx.lo + (rx.hi - rx.lo) * i / ticks;
        const double fy = ry.lo + (ry.hi - ry.lo) * i / ticks;
        os << "<line x1=\"" << px(X(fx)) << "\" y1=\"" << px(top + ph) << "\" x2=\"" << px(X(fx)) << "\" y2=\""
           << px(top + ph + 5) << "\" stroke=\"#333\"/>\n";
        os << "<text x=\"" << px(X(fx)) << "\" y=\"" << px(top + ph + 18)
           << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << num(fx) << "</text>\n";
        os << "<line x1=\"" << px(left - 5) << "\" y1=\"" << px(Y(fy)) << "\" x2=\"" << px(left) << "\" y2=\""
           << px(Y(fy)) << "\" stroke=\"#333\"/>\n";
        os << "<text x=\"" << px(left - 8) << "\" y=\"" << px(Y(fy) + 4)
           << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << num(fy) << "</text>\n";
    }
    os << "<text x=\"" << px(left + pw / 2) << "\" y=\"" << px(H - 12)
       << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" << escape(spec.xlabel)
       << "</text>\n";
    os << "<text x=\"16\" y=\"" << px(top + ph / 2) << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
       << "font-size=\"12\" transform=\"rotate(-90 16 " << px(top + ph / 2) << ")\">" << escape(spec.ylabel)
       << "</text>\n";

    for (std::size_t si = 0; si < series.size(); ++si) {
        const PlotSeries& s = series[si];
        const char* color = kPalette[si % std::size(kPalette)];
        std::string points;
        auto flush = [&] {
            if (!points.empty())
                os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"" << points
                   << "\"/>\n";
            points.clear();
        };
        for (std::size_t k : thin(s.x.size(), spec.max_points)) {
            if (!std::isfinite(s.x[k]) || !std::isfinite(s.y[k])) {
                flush();
                continue;
            }
            if (!points.empty())
                points += ' ';
            points += px(X(s.x[k])) + "," + px(Y(s.y[k]));
        }
        flush();

        const double ly = top + 14 + 16 * static_cast<double>(si);
        const double lx = left + pw - 150;
        os << "<line x1=\"" << px(lx) << "\" y1=\"" << px(ly) << "\" x2=\"" << px(lx + 24) << "\" y2=\"" << px(ly)
           << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
        os << "<text x=\"" << px(lx + 30) << "\" y=\"" << px(ly + 4)
           << "\" font-family=\"sans-serif\" font-size=\"11\">" << escape(s.name) << "</text>\n";
    }
    os << "</svg>\n";
    return os.str();
}

namespace {

bool plottable(const fs::path& p)
{
    const std::string name = p.filename().string();
    return name == "energy.csv" || name == "energy_series.csv" || name == "theta_floor.csv" ||
           name == "relenergy.csv";
}

std::string chart_for(const fs::path& csv)
{
    const CsvData d = load_csv(csv);
    const std::string name = csv.filename().string();
    const std::vector<double> t = d.numeric("t");
    ChartSpec spec;
    spec.xlabel = "t";
    std::vector<PlotSeries> series;
    if (name == "energy.csv") {
        spec.title = "Energy";
        spec.ylabel = "E";
        series.push_back({"E(t)", t, d.numeric("value")});
    } else if (name == "energy_series.csv") {
        spec.title = "Energy";
        spec.ylabel = "E";
        series.push_back({"E(t)", t, d.numeric("E_total")});
    } else if (name == "theta_floor.csv") {
        spec.title = "Minimum temperature";
        spec.ylabel = "theta";
        const auto v = d.numeric("value");
        const auto m = d.numeric("margin");
        std::vector<double> floor(v.size());
        for (std::size_t k = 0; k < v.size(); ++k)
            floor[k] = v[k] - m[k];
        series.push_back({"min theta", t, v});
        series.push_back({"floor h(t)", t, floor});
    } else {
        spec.title = "Relative energy";
        spec.ylabel = "E_rel";
        series.push_back({"E_rel", t, d.numeric("E_rel")});
        series.push_back({"E_rel + dissipation", t, d.numeric("lhs")});
        series.push_back({"Gronwall envelope", t, d.numeric("rhs")});
    }
    return line_chart(spec, series);
}

} // namespace

std::vector<fs::path> plot_csvs(const fs::path& input, const fs::path& outdir)
{
    std::vector<fs::path> sources;
    fs::path root;
    if (fs::is_regular_file(input)) {
        if (!plottable(input))
            throw IoError("'" + input.string() + "' is not a known chart source");
        sources.push_back(input);
        root = input.parent_path();
    } else if (fs::is_directory(input)) {
        root = input;
        for (const auto& entry : fs::recursive_directory_iterator(input))
            if (entry.is_regular_file() && plottable(entry.path()))
                sources.push_back(entry.path());
    } else {
        throw IoError("'" + input.string() + "' does not exist");
    }
    std::sort(sources.begin(), sources.end());

    std::vector<fs::path> written;
    for (const auto& src : sources) {
        fs::path target = outdir / fs::relative(src, root);
        target.replace_extension(".svg");
        write_text(target, chart_for(src));
        written.push_back(target);
    }
    return written;
}

} // namespace fremond
