#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "salix/dataset.hpp"

namespace salix::svg {

struct BarSeries {
  std::string name;
  std::string color;
  std::vector<double> values;
  std::vector<double> lo;  // optional whisker bounds, same length as values
  std::vector<double> hi;
};

// Horizontal grouped bar chart, deterministic output bytes. Labels render
// one row per feature; series are drawn side by side with optional error
// whiskers.
inline std::string bar_chart(const std::string& title, const std::vector<std::string>& labels,
                             const std::vector<BarSeries>& series) {
  const double label_width = 190, bar_area = 420, row_height = 20;
  const double header = 34, legend = 18;
  const double width = label_width + bar_area + 60;
  const double height = header + legend +
                        row_height * static_cast<double>(labels.size()) *
                            static_cast<double>(series.size()) +
                        18;

  double max_value = 1e-12;
  for (const auto& s : series) {
    for (double v : s.values) max_value = std::max(max_value, std::fabs(v));
    for (double v : s.hi) max_value = std::max(max_value, std::fabs(v));
  }
  const double scale = bar_area / max_value;

  std::string out;
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + format_double(width) +
         "\" height=\"" + format_double(height) + "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  out += "<text x=\"8\" y=\"18\" font-size=\"14\" font-weight=\"bold\">" + title + "</text>\n";

  double lx = 8;
  for (const auto& s : series) {
    out += "<rect x=\"" + format_double(lx) + "\" y=\"" + format_double(header - 9) +
           "\" width=\"10\" height=\"10\" fill=\"" + s.color + "\"/>\n";
    out += "<text x=\"" + format_double(lx + 14) + "\" y=\"" + format_double(header) + "\">" +
           s.name + "</text>\n";
    lx += 20 + 7 * static_cast<double>(s.name.size()) + 18;
  }

  double y = header + legend;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    out += "<text x=\"" + format_double(label_width - 6) + "\" y=\"" +
           format_double(y + row_height * static_cast<double>(series.size()) / 2 + 4) +
           "\" text-anchor=\"end\">" + labels[i] + "</text>\n";
    for (const auto& s : series) {
      const double v = std::fabs(s.values[i]) * scale;
      out += "<rect x=\"" + format_double(label_width) + "\" y=\"" + format_double(y + 3) +
             "\" width=\"" + format_double(v) + "\" height=\"" + format_double(row_height - 6) +
             "\" fill=\"" + s.color + "\"/>\n";
      if (s.lo.size() == s.values.size() && s.hi.size() == s.values.size()) {
        const double x0 = label_width + std::fabs(s.lo[i]) * scale;
        const double x1 = label_width + std::fabs(s.hi[i]) * scale;
        const double ym = y + row_height / 2;
        out += "<line x1=\"" + format_double(x0) + "\" y1=\"" + format_double(ym) + "\" x2=\"" +
               format_double(x1) + "\" y2=\"" + format_double(ym) +
               "\" stroke=\"black\" stroke-width=\"1\"/>\n";
      }
      out += "<text x=\"" + format_double(label_width + v + 4) + "\" y=\"" +
             format_double(y + row_height - 6) + "\">" + format_double(s.values[i]) + "</text>\n";
      y += row_height;
    }
  }
  out += "</svg>\n";
  return out;
}

}  // namespace salix::svg
