#include "hysrl/svg_plot.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include "hysrl/csv.hpp"
#include "hysrl/experiment.hpp"
#include "hysrl/mdp_io.hpp"

namespace hysrl {

namespace {

constexpr std::array<const char*, 6> kPalette{"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"};

std::string fixed(double v, int digits = 2) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

std::string tick_label(double v) {
    if (v == 0.0) return "0";
    const double a = std::abs(v);
    char buf[64];
    if (a >= 1e4 || a < 1e-2) {
        std::snprintf(buf, sizeof buf, "%.1e", v);
    } else {
        std::snprintf(buf, sizeof buf, "%.6g", v);
    }
    return buf;
}

std::string escape(std::string_view s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out.push_back(c);
        }
    }
    return out;
}

/// Roughly five round tick positions covering [lo, hi].
std::vector<double> nice_ticks(double lo, double hi) {
    const double span = hi - lo;
    const double raw = span / 5.0;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = mag;
    for (double m : {1.0, 2.0, 2.5, 5.0, 10.0})
        if (m * mag >= raw) {
            step = m * mag;
            break;
        }
    std::vector<double> ticks;
    for (double t = std::ceil(lo / step) * step; t <= hi + 1e-9 * span; t += step)
        ticks.push_back(std::abs(t) < 1e-12 * span ? 0.0 : t);
    return ticks;
}

double parse_cell(const std::string& cell, const std::filesystem::path& file) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (ec != std::errc() || ptr != cell.data() + cell.size())
        throw FormatError(file.generic_string() + ": bad number '" + cell + "'");
    return v;
}

CsvTable read_table(const std::filesystem::path& file) {
    CsvTable table = parse_csv(read_file(file));
    if (table.header.empty() || table.rows.empty()) throw FormatError(file.generic_string() + ": no data rows");
    return table;
}

PlotSeries gap_series(const std::filesystem::path& file) {
    read_table(file);
    const auto rows = parse_metrics_csv(read_file(file));
    const bool has_exact = std::any_of(rows.begin(), rows.end(), [](const MetricsRow& r) { return r.exact_gap.has_value(); });
    const auto curve = aggregate_curve(rows, has_exact ? "exact_gap" : "mc_gap");
    if (curve.empty()) throw FormatError(file.generic_string() + ": no gap values");
    PlotSeries s{file.stem().string(), {}, {}, {}, {}};
    for (const auto& p : curve) {
        s.x.push_back(static_cast<double>(p.samples));
        s.mean.push_back(p.mean);
        s.lo.push_back(p.lo);
        s.hi.push_back(p.hi);
    }
    return s;
}

std::vector<PlotSeries> percentage_series(const std::filesystem::path& file, bool prefix) {
    const CsvTable table = read_table(file);
    const int cx = table.column("true_beta");
    const int ca = table.column("algorithm");
    const int cy = table.column("percentage_gap");
    if (cx < 0 || ca < 0 || cy < 0)
        throw FormatError(file.generic_string() + ": needs columns true_beta, algorithm, percentage_gap");
    // algorithm -> beta -> values, algorithms kept in first-seen order
    std::vector<std::string> order;
    std::map<std::string, std::map<double, std::vector<double>>> data;
    for (const auto& row : table.rows) {
        const auto need = static_cast<std::size_t>(std::max({cx, ca, cy}));
        if (row.size() <= need) throw FormatError(file.generic_string() + ": short row");
        const std::string& algo = row[static_cast<std::size_t>(ca)];
        if (!data.count(algo)) order.push_back(algo);
        data[algo][parse_cell(row[static_cast<std::size_t>(cx)], file)].push_back(
            parse_cell(row[static_cast<std::size_t>(cy)], file));
    }
    std::vector<PlotSeries> out;
    for (const auto& algo : order) {
        PlotSeries s{prefix ? file.stem().string() + ":" + algo : algo, {}, {}, {}, {}};
        for (const auto& [beta, values] : data[algo]) {
            const auto [mean, half] = mean_ci95(values);
            s.x.push_back(beta);
            s.mean.push_back(mean);
            s.lo.push_back(mean - half);
            s.hi.push_back(mean + half);
        }
        out.push_back(std::move(s));
    }
    return out;
}

}  // namespace

std::string render_svg(const std::vector<PlotSeries>& series, const PlotSpec& spec) {
    if (series.empty()) throw FormatError("plot: no series");
    double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
    for (const auto& s : series) {
        if (s.x.empty() || s.x.size() != s.mean.size() || s.x.size() != s.lo.size() || s.x.size() != s.hi.size())
            throw FormatError("plot: series '" + s.label + "' is empty or ragged");
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            for (double v : {s.x[i], s.mean[i], s.lo[i], s.hi[i]})
                if (!std::isfinite(v)) throw FormatError("plot: series '" + s.label + "' has non-finite values");
            x0 = std::min(x0, s.x[i]);
            x1 = std::max(x1, s.x[i]);
            y0 = std::min({y0, s.lo[i], s.mean[i]});
            y1 = std::max({y1, s.hi[i], s.mean[i]});
        }
    }
    if (!(std::isfinite(x0) && std::isfinite(x1) && std::isfinite(y0) && std::isfinite(y1)))
        throw FormatError("plot: non-finite values");
    if (x1 == x0) {
        x0 -= 0.5;
        x1 += 0.5;
    }
    y0 = std::min(y0, 0.0);
    if (y1 == y0) y1 = y0 + 1.0;
    const double ypad = 0.05 * (y1 - y0);
    y1 += ypad;

    const double left = 80, right = 170, top = 40, bottom = 60;
    const double pw = spec.width - left - right;
    const double ph = spec.height - top - bottom;
    auto X = [&](double v) { return left + (v - x0) / (x1 - x0) * pw; };
    auto Y = [&](double v) { return top + (1.0 - (v - y0) / (y1 - y0)) * ph; };

    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << spec.width << "\" height=\"" << spec.height
       << "\" viewBox=\"0 0 " << spec.width << ' ' << spec.height << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    if (!spec.title.empty())
        os << "<text x=\"" << fixed(left + pw / 2) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">"
           << escape(spec.title) << "</text>\n";

    for (double t : nice_ticks(x0, x1)) {
        const std::string x = fixed(X(t));
        os << "<line x1=\"" << x << "\" y1=\"" << fixed(top) << "\" x2=\"" << x << "\" y2=\"" << fixed(top + ph)
           << "\" stroke=\"#e0e0e0\"/>\n";
        os << "<text x=\"" << x << "\" y=\"" << fixed(top + ph + 18) << "\" text-anchor=\"middle\">" << tick_label(t)
           << "</text>\n";
    }
    for (double t : nice_ticks(y0, y1)) {
        const std::string y = fixed(Y(t));
        os << "<line x1=\"" << fixed(left) << "\" y1=\"" << y << "\" x2=\"" << fixed(left + pw) << "\" y2=\"" << y
           << "\" stroke=\"#e0e0e0\"/>\n";
        os << "<text x=\"" << fixed(left - 8) << "\" y=\"" << fixed(Y(t) + 4) << "\" text-anchor=\"end\">"
           << tick_label(t) << "</text>\n";
    }
    os << "<rect x=\"" << fixed(left) << "\" y=\"" << fixed(top) << "\" width=\"" << fixed(pw) << "\" height=\""
       << fixed(ph) << "\" fill=\"none\" stroke=\"black\"/>\n";
    os << "<text x=\"" << fixed(left + pw / 2) << "\" y=\"" << fixed(spec.height - 18.0)
       << "\" text-anchor=\"middle\">" << escape(spec.x_label) << "</text>\n";
    os << "<text transform=\"translate(22," << fixed(top + ph / 2) << ") rotate(-90)\" text-anchor=\"middle\">"
       << escape(spec.y_label) << "</text>\n";

    for (std::size_t k = 0; k < series.size(); ++k) {
        const auto& s = series[k];
        const char* color = kPalette[k % kPalette.size()];
        os << "<g class=\"series\" data-label=\"" << escape(s.label) << "\">\n";
        os << "<polygon fill=\"" << color << "\" fill-opacity=\"0.2\" stroke=\"none\" points=\"";
        for (std::size_t i = 0; i < s.x.size(); ++i) os << (i ? " " : "") << fixed(X(s.x[i])) << ',' << fixed(Y(s.hi[i]));
        for (std::size_t i = s.x.size(); i-- > 0;) os << ' ' << fixed(X(s.x[i])) << ',' << fixed(Y(s.lo[i]));
        os << "\"/>\n";
        os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.8\" points=\"";
        for (std::size_t i = 0; i < s.x.size(); ++i)
            os << (i ? " " : "") << fixed(X(s.x[i])) << ',' << fixed(Y(s.mean[i]));
        os << "\"/>\n</g>\n";
        const double ly = top + 14 + 20.0 * static_cast<double>(k);
        os << "<line x1=\"" << fixed(left + pw + 12) << "\" y1=\"" << fixed(ly) << "\" x2=\"" << fixed(left + pw + 36)
           << "\" y2=\"" << fixed(ly) << "\" stroke=\"" << color << "\" stroke-width=\"3\"/>\n";
        os << "<text x=\"" << fixed(left + pw + 42) << "\" y=\"" << fixed(ly + 4) << "\">" << escape(s.label)
           << "</text>\n";
    }
    os << "</svg>\n";
    return os.str();
}

PlotKind plot_kind_from_string(std::string_view name) {
    if (name == "gap") return PlotKind::Gap;
    if (name == "percentage") return PlotKind::Percentage;
    throw std::invalid_argument("unknown plot kind '" + std::string(name) + "' (expected gap or percentage)");
}

std::vector<PlotSeries> load_plot_series(const std::vector<std::filesystem::path>& inputs, PlotKind kind) {
    if (inputs.empty()) throw FormatError("plot: no input files");
    std::vector<PlotSeries> out;
    for (const auto& file : inputs) {
        if (kind == PlotKind::Gap) {
            out.push_back(gap_series(file));
        } else {
            auto more = percentage_series(file, inputs.size() > 1);
            out.insert(out.end(), more.begin(), more.end());
        }
    }
    return out;
}

void write_plot(const std::vector<std::filesystem::path>& inputs, PlotKind kind, const std::filesystem::path& out) {
    const auto series = load_plot_series(inputs, kind);
    PlotSpec spec;
    if (kind == PlotKind::Gap) {
        spec.title = "Optimality gap vs target samples";
        spec.x_label = "target samples (episodes x H)";
        spec.y_label = "optimality gap";
    } else {
        spec.title = "Final percentage gap vs true shift degree";
        spec.x_label = "true beta";
        spec.y_label = "percentage gap (%)";
    }
    const std::string svg = render_svg(series, spec);
    write_file(out, svg);
}

}  // namespace hysrl
