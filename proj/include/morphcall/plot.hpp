#pragma once

#include <string>
#include <vector>

namespace morphcall {

struct Series {
  std::string name;
  std::vector<double> values;  // y at x = 0, 1, ...
};

// Line chart, x = layer index.
std::string svg_line_plot(const std::string& title, const std::string& y_label, const std::vector<Series>& series,
                          double y_min = 0.0, double y_max = 1.0);
// Bar chart, one bar per layer.
std::string svg_bar_plot(const std::string& title, const std::string& y_label, const std::vector<double>& values);

}  // namespace morphcall
