#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace gammasort {

struct PlotSeries {
    std::string name;
    std::vector<double> x;
    std::vector<double> y;
};

struct LinePlot {
    std::string title;
    std::string x_label;
    std::string y_label;
    std::vector<PlotSeries> series;
};

/// Standalone SVG document. Deterministic: identical input gives identical bytes.
std::string render_svg(const LinePlot& plot);

/// A numeric CSV as read back from run artifacts. Lines starting with '#'
/// are skipped; the first remaining line is the header.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;

    std::vector<double> column(std::size_t index) const;
};

CsvTable read_numeric_csv(const std::filesystem::path& path);

/// Artifacts a run directory must hold for reporting that are absent.
std::vector<std::string> missing_run_artifacts(const std::filesystem::path& run_dir);

/// Writes `<run_dir>/report/`: loss, per-epoch accuracy, final per-class
/// accuracy and weight series as CSV plus one SVG per plot. A directory
/// holding per-architecture subdirectories gets one report per subdirectory.
/// Returns the files written.
std::vector<std::filesystem::path> write_report(const std::filesystem::path& run_dir);

}  // namespace gammasort
