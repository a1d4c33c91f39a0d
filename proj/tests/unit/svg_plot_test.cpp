#include <filesystem>
#include <string>

#include <unistd.h>

#include <gtest/gtest.h>

#include "hysrl/experiment.hpp"
#include "hysrl/mdp_io.hpp"
#include "hysrl/svg_plot.hpp"

using namespace hysrl;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("hysrl_svg_" + std::to_string(::getpid()) + "_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::size_t count_of(const std::string& text, const std::string& needle) {
    std::size_t n = 0;
    for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1)) ++n;
    return n;
}

}  // namespace

TEST(RenderSvg, OneGroupPerSeriesWithLegend) {
    const std::vector<PlotSeries> series{{"hysrl", {0, 1, 2}, {3, 2, 1}, {2.5, 1.5, 0.5}, {3.5, 2.5, 1.5}},
                                         {"bpi<ucbvi>", {0, 2}, {3, 2}, {3, 2}, {3, 2}}};
    const auto svg = render_svg(series, {"t", "x", "y"});
    EXPECT_EQ(svg.rfind("<svg", 0), 0u);
    EXPECT_EQ(count_of(svg, "<g class=\"series\""), 2u);
    EXPECT_EQ(count_of(svg, "<polygon"), 2u);
    EXPECT_NE(svg.find("bpi&lt;ucbvi&gt;"), std::string::npos);
    EXPECT_EQ(svg.find("bpi<ucbvi>"), std::string::npos);
    EXPECT_EQ(svg, render_svg(series, {"t", "x", "y"}));
}

TEST(RenderSvg, DegenerateInputs) {
    EXPECT_THROW(render_svg({}, {}), FormatError);
    EXPECT_THROW(render_svg({{"a", {}, {}, {}, {}}}, {}), FormatError);
    EXPECT_THROW(render_svg({{"a", {1, 2}, {1}, {1}, {1}}}, {}), FormatError);
    EXPECT_THROW(render_svg({{"a", {1}, {NAN}, {1}, {1}}}, {}), FormatError);
    // a single point still draws
    EXPECT_NO_THROW(render_svg({{"a", {5}, {1}, {1}, {1}}}, {}));
}

TEST(LoadPlotSeries, GapCurveFromMetricsFile) {
    const auto dir = scratch("gap");
    const std::vector<MetricsRow> rows{{0, "vi", 1, 20, 0, 0.5, {}}, {1, "vi", 1, 20, 0, 0.3, {}},
                                       {0, "vi", 2, 40, 0, 0.2, {}}, {1, "vi", 2, 40, 0, 0.2, {}}};
    write_file(dir / "hysrl.csv", metrics_csv(rows));
    const auto series = load_plot_series({dir / "hysrl.csv"}, PlotKind::Gap);
    ASSERT_EQ(series.size(), 1u);
    EXPECT_EQ(series[0].label, "hysrl");
    EXPECT_EQ(series[0].x, (std::vector<double>{20, 40}));
    EXPECT_DOUBLE_EQ(series[0].mean[0], 0.4);
    // identical values across seeds collapse the band
    EXPECT_EQ(series[0].lo[1], series[0].hi[1]);
    fs::remove_all(dir);
}

TEST(LoadPlotSeries, SingleSeedBandCollapses) {
    const auto dir = scratch("single");
    write_file(dir / "a.csv", metrics_csv({{7, "vi", 1, 5, 0, 0.9, {}}, {7, "vi", 2, 10, 0, 0.1, {}}}));
    const auto s = load_plot_series({dir / "a.csv"}, PlotKind::Gap).front();
    EXPECT_EQ(s.lo, s.mean);
    EXPECT_EQ(s.hi, s.mean);
    fs::remove_all(dir);
}

TEST(LoadPlotSeries, PercentageSeriesPerAlgorithm) {
    const auto dir = scratch("pct");
    std::vector<SweepRecord> recs;
    for (double beta : {0.05, 0.15})
        for (auto algo : {Algorithm::HySRL, Algorithm::BpiUcbvi})
            for (std::uint64_t seed : {0u, 1u})
                recs.push_back({0.95 - beta, beta, beta, algo, seed, 10.0, 1.0, 10.0 + double(seed), 100});
    write_file(dir / "sweep.csv", sweep_csv(recs));
    const auto series = load_plot_series({dir / "sweep.csv"}, PlotKind::Percentage);
    ASSERT_EQ(series.size(), 2u);
    EXPECT_EQ(series[0].label, "hysrl");
    EXPECT_EQ(series[1].label, "bpi_ucbvi");
    EXPECT_EQ(series[0].x, (std::vector<double>{0.05, 0.15}));
    EXPECT_DOUBLE_EQ(series[0].mean[0], 10.5);
    fs::remove_all(dir);
}

TEST(WritePlot, UnusableInputWritesNothing) {
    const auto dir = scratch("empty");
    write_file(dir / "empty.csv", std::string(kMetricsHeader) + "\n");
    EXPECT_THROW(write_plot({dir / "empty.csv"}, PlotKind::Gap, dir / "out.svg"), FormatError);
    EXPECT_FALSE(fs::exists(dir / "out.svg"));
    write_file(dir / "bad.csv", "a,b\n1,2\n");
    EXPECT_THROW(write_plot({dir / "bad.csv"}, PlotKind::Percentage, dir / "out.svg"), FormatError);
    EXPECT_FALSE(fs::exists(dir / "out.svg"));
    EXPECT_THROW(plot_kind_from_string("pie"), std::invalid_argument);
    fs::remove_all(dir);
}

TEST(WritePlot, OutputBytesAreDeterministic) {
    const auto dir = scratch("bytes");
    write_file(dir / "a.csv", metrics_csv({{0, "vi", 1, 5, 0, 0.9, {}}, {1, "vi", 2, 10, 0, 0.1, 0.2}}));
    write_plot({dir / "a.csv"}, PlotKind::Gap, dir / "one.svg");
    write_plot({dir / "a.csv"}, PlotKind::Gap, dir / "two.svg");
    EXPECT_EQ(read_file(dir / "one.svg"), read_file(dir / "two.svg"));
    fs::remove_all(dir);
}
