#pragma once

#include <string>
#include <vector>

namespace hedge::cli::svg {

struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

/// Shaded area between two curves sharing x.
struct Band {
  std::string name;
  std::vector<double> x;
  std::vector<double> lo;
  std::vector<double> hi;
};

struct LineChart {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<Band> bands;
  std::vector<Series> lines;
};

/// Grouped bars: values[g][i] is group g at category i.
struct BarChart {
  std::string title;
  std::string y_label;
  std::vector<std::string> categories;
  std::vector<std::string> groups;
  std::vector<std::vector<double>> values;
};

/// Row-major cells, row 0 drawn at the top.
struct Heatmap {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<std::vector<double>> cells;
};

std::string render(const LineChart& chart);
std::string render(const BarChart& chart);
std::string render(const Heatmap& chart);

}  // namespace hedge::cli::svg
