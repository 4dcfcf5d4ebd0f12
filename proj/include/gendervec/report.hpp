#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace gendervec {

/// Minimal CSV reader: comma separated, double-quoted fields, first row is
/// the header.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(const std::string& name) const;  // DataError if absent
};

CsvTable read_csv(const std::filesystem::path& path);

struct Series {
  std::string label;
  std::string color;
  std::vector<double> x;
  std::vector<double> y;
};

struct PlotSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  double width = 640;
  double height = 420;
};

std::string svg_scatter(const PlotSpec& spec, const std::vector<Series>& series);
std::string svg_lines(const PlotSpec& spec, const std::vector<Series>& series);
/// Overlaid histograms over a shared range with `bins` equal bins.
std::string svg_histogram(const PlotSpec& spec, const std::vector<Series>& series, int bins,
                          double lo, double hi);
/// One box (quartiles, 1.5 IQR whiskers) per series, using series.y.
std::string svg_boxplot(const PlotSpec& spec, const std::vector<Series>& series);
/// Grouped bars: series[i].y[g] is the height of bar i in group g.
std::string svg_bars(const PlotSpec& spec, const std::vector<std::string>& groups,
                     const std::vector<Series>& series);

/// Renders every plot whose source artifact exists in `dir` and returns the
/// written file names.
std::vector<std::string> render_report(const std::filesystem::path& dir);

}  // namespace gendervec
