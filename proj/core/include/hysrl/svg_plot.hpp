#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace hysrl {

struct PlotSeries {
    std::string label;
    std::vector<double> x;
    std::vector<double> mean;
    std::vector<double> lo;
    std::vector<double> hi;
};

struct PlotSpec {
    std::string title;
    std::string x_label;
    std::string y_label;
    int width = 720;
    int height = 440;
};

/// Mean line plus shaded band per series. Output bytes depend only on the inputs.
std::string render_svg(const std::vector<PlotSeries>& series, const PlotSpec& spec);

enum class PlotKind { Gap, Percentage };
PlotKind plot_kind_from_string(std::string_view name);

/**
Gap: one series per metrics CSV (label = file stem), samples vs exact gap (mc gap
when no exact values). Percentage: sweep CSVs, one series per algorithm,
true beta vs percentage gap. Throws FormatError on missing columns or no data.
*/
std::vector<PlotSeries> load_plot_series(const std::vector<std::filesystem::path>& inputs, PlotKind kind);

/// Renders first, so nothing is written when the inputs are unusable.
void write_plot(const std::vector<std::filesystem::path>& inputs, PlotKind kind, const std::filesystem::path& out);

}  // namespace hysrl
