#include "morphcall/plot.hpp"

#include <algorithm>
#include <cstdio>

namespace morphcall {

namespace {

constexpr double kWidth = 640, kHeight = 400, kLeft = 60, kRight = 150, kTop = 40, kBottom = 50;
const char* const kColors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2"};

std::string f(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Frame {
  double y_min, y_max;
  std::size_t n;
  double px(double x) const {
    const double w = kWidth - kLeft - kRight;
    return kLeft + (n > 1 ? x / static_cast<double>(n - 1) : 0.5) * w;
  }
  double py(double y) const {
    const double h = kHeight - kTop - kBottom;
    const double span = y_max > y_min ? y_max - y_min : 1.0;
    return kTop + (1.0 - (std::clamp(y, y_min, y_max) - y_min) / span) * h;
  }
};

std::string header(const std::string& title, const std::string& y_label) {
  std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + f(kWidth) + "\" height=\"" + f(kHeight) +
                  "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s += "<text x=\"" + f(kWidth / 2) + "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" + escape(title) +
       "</text>\n";
  s += "<text x=\"15\" y=\"" + f(kHeight / 2) + "\" transform=\"rotate(-90 15 " + f(kHeight / 2) +
       ")\" text-anchor=\"middle\">" + escape(y_label) + "</text>\n";
  s += "<text x=\"" + f((kLeft + kWidth - kRight) / 2) + "\" y=\"" + f(kHeight - 10) +
       "\" text-anchor=\"middle\">layer</text>\n";
  return s;
}

std::string axes(const Frame& fr, bool bars) {
  std::string s;
  const double x0 = kLeft, x1 = kWidth - kRight, y0 = kHeight - kBottom;
  s += "<line x1=\"" + f(x0) + "\" y1=\"" + f(y0) + "\" x2=\"" + f(x1) + "\" y2=\"" + f(y0) + "\" stroke=\"black\"/>\n";
  s += "<line x1=\"" + f(x0) + "\" y1=\"" + f(kTop) + "\" x2=\"" + f(x0) + "\" y2=\"" + f(y0) + "\" stroke=\"black\"/>\n";
  for (int t = 0; t <= 4; ++t) {
    const double v = fr.y_min + (fr.y_max - fr.y_min) * t / 4.0;
    s += "<text x=\"" + f(x0 - 5) + "\" y=\"" + f(fr.py(v) + 4) + "\" text-anchor=\"end\">" + f(v) + "</text>\n";
  }
  for (std::size_t i = 0; i < fr.n; ++i) {
    const double x = bars ? kLeft + (static_cast<double>(i) + 0.5) * (x1 - x0) / static_cast<double>(fr.n)
                          : fr.px(static_cast<double>(i));
    s += "<text x=\"" + f(x) + "\" y=\"" + f(y0 + 15) + "\" text-anchor=\"middle\">" + std::to_string(i) + "</text>\n";
  }
  return s;
}

}  // namespace

std::string svg_line_plot(const std::string& title, const std::string& y_label, const std::vector<Series>& series,
                          double y_min, double y_max) {
  std::size_t n = 0;
  for (const auto& s : series) n = std::max(n, s.values.size());
  const Frame fr{y_min, y_max, n};
  std::string out = header(title, y_label) + axes(fr, false);
  for (std::size_t k = 0; k < series.size(); ++k) {
    const char* color = kColors[k % std::size(kColors)];
    std::string pts;
    for (std::size_t i = 0; i < series[k].values.size(); ++i) {
      if (i) pts += ' ';
      pts += f(fr.px(static_cast<double>(i))) + "," + f(fr.py(series[k].values[i]));
    }
    out += "<polyline fill=\"none\" stroke=\"" + std::string(color) + "\" stroke-width=\"2\" points=\"" + pts + "\"/>\n";
    const double ly = kTop + 10 + 18.0 * static_cast<double>(k);
    out += "<rect x=\"" + f(kWidth - kRight + 10) + "\" y=\"" + f(ly - 8) + "\" width=\"10\" height=\"10\" fill=\"" +
           color + "\"/>\n";
    out += "<text x=\"" + f(kWidth - kRight + 25) + "\" y=\"" + f(ly + 1) + "\">" + escape(series[k].name) + "</text>\n";
  }
  return out + "</svg>\n";
}

std::string svg_bar_plot(const std::string& title, const std::string& y_label, const std::vector<double>& values) {
  double top = 1.0;
  for (double v : values) top = std::max(top, v);
  const Frame fr{0.0, top, values.size()};
  std::string out = header(title, y_label) + axes(fr, true);
  const double slot = (kWidth - kLeft - kRight) / static_cast<double>(std::max<std::size_t>(1, values.size()));
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double y = fr.py(values[i]);
    out += "<rect x=\"" + f(kLeft + slot * static_cast<double>(i) + slot * 0.1) + "\" y=\"" + f(y) + "\" width=\"" +
           f(slot * 0.8) + "\" height=\"" + f(kHeight - kBottom - y) + "\" fill=\"" + kColors[0] + "\"/>\n";
  }
  return out + "</svg>\n";
}

}  // namespace morphcall
