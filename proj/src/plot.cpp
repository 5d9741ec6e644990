#include "holesim/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <vector>

namespace holesim {

namespace {

constexpr double kWidth = 640, kHeight = 420;
constexpr double kLeft = 80, kRight = 150, kTop = 40, kBottom = 60;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

std::string unit_of(std::string_view metric) {
  if (metric.ends_with("_j")) return "J";
  if (metric.ends_with("_s")) return "s";
  return "";
}

struct Series {
  std::vector<double> xs, mean, sd;
};

}  // namespace

std::string render_plot(const CsvTable& table, std::string_view metric, std::string_view x) {
  std::string x_col, x_label;
  if (x == "nodes") {
    x_col = "n_nodes";
    x_label = "number of nodes";
  } else if (x == "failures") {
    x_col = "failure_pct";
    x_label = "failed nodes (%)";
  } else {
    throw PlotError("--x must be 'nodes' or 'failures'");
  }
  const auto mcol = table.column(metric);
  if (!mcol) {
    std::string msg = "no column '" + std::string(metric) + "'; available:";
    for (const auto& c : table.columns) msg += " " + c;
    throw PlotError(msg);
  }
  const auto xcol = table.column(x_col);
  const auto pcol = table.column("protocol");
  if (!xcol || !pcol) throw PlotError("csv lacks the '" + x_col + "' or 'protocol' column");

  std::map<std::string, std::map<double, std::vector<double>>> groups;
  for (const auto& row : table.rows) {
    const std::string& cell = row[*mcol];
    if (cell == "NA" || cell.empty()) continue;
    groups[row[*pcol]][std::stod(row[*xcol])].push_back(std::stod(cell));
  }

  std::map<std::string, Series> series;
  double xmin = INFINITY, xmax = -INFINITY, ymin = INFINITY, ymax = -INFINITY;
  for (const auto& [proto, byx] : groups) {
    Series& s = series[proto];
    for (const auto& [xv, vals] : byx) {
      double sum = 0;
      for (double v : vals) sum += v;
      const double mean = sum / vals.size();
      double var = 0;
      for (double v : vals) var += (v - mean) * (v - mean);
      const double sd = vals.size() > 1 ? std::sqrt(var / (vals.size() - 1)) : 0.0;
      s.xs.push_back(xv);
      s.mean.push_back(mean);
      s.sd.push_back(sd);
      xmin = std::min(xmin, xv);
      xmax = std::max(xmax, xv);
      ymin = std::min(ymin, mean - sd);
      ymax = std::max(ymax, mean + sd);
    }
  }
  if (series.empty()) {
    xmin = 0, xmax = 1, ymin = 0, ymax = 1;
  }
  if (xmax == xmin) xmin -= 1, xmax += 1;
  if (ymax == ymin) ymin -= std::max(1.0, std::abs(ymin) * 0.1), ymax += std::max(1.0, std::abs(ymax) * 0.1);
  const double pad = (ymax - ymin) * 0.05;
  ymin -= pad;
  ymax += pad;

  const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
  auto sx = [&](double v) { return kLeft + (v - xmin) / (xmax - xmin) * pw; };
  auto sy = [&](double v) { return kTop + ph - (v - ymin) / (ymax - ymin) * ph; };

  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};
  std::string unit = unit_of(metric);
  std::string y_label = std::string(metric) + (unit.empty() ? "" : " (" + unit + ")");

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kWidth) + "\" height=\"" + num(kHeight) +
         "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg += "<text x=\"" + num(kLeft + pw / 2) + "\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">" + y_label +
         " vs " + x_label + "</text>\n";
  svg += "<line x1=\"" + num(kLeft) + "\" y1=\"" + num(kTop + ph) + "\" x2=\"" + num(kLeft + pw) + "\" y2=\"" +
         num(kTop + ph) + "\" stroke=\"black\"/>\n";
  svg += "<line x1=\"" + num(kLeft) + "\" y1=\"" + num(kTop) + "\" x2=\"" + num(kLeft) + "\" y2=\"" +
         num(kTop + ph) + "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double xv = xmin + (xmax - xmin) * i / 4.0, yv = ymin + (ymax - ymin) * i / 4.0;
    svg += "<text x=\"" + num(sx(xv)) + "\" y=\"" + num(kTop + ph + 18) + "\" text-anchor=\"middle\">" +
           tick_label(xv) + "</text>\n";
    svg += "<text x=\"" + num(kLeft - 6) + "\" y=\"" + num(sy(yv) + 4) + "\" text-anchor=\"end\">" +
           tick_label(yv) + "</text>\n";
  }
  svg += "<text x=\"" + num(kLeft + pw / 2) + "\" y=\"" + num(kHeight - 16) + "\" text-anchor=\"middle\">" +
         x_label + "</text>\n";
  svg += "<text x=\"18\" y=\"" + num(kTop + ph / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 18 " +
         num(kTop + ph / 2) + ")\">" + y_label + "</text>\n";

  int idx = 0;
  for (const auto& [proto, s] : series) {
    const std::string color = colors[idx % 5];
    bool band = false;
    for (double v : s.sd) band = band || v > 0;
    if (band && s.xs.size() > 1) {
      std::string pts;
      for (std::size_t i = 0; i < s.xs.size(); ++i) pts += num(sx(s.xs[i])) + "," + num(sy(s.mean[i] + s.sd[i])) + " ";
      for (std::size_t i = s.xs.size(); i-- > 0;) pts += num(sx(s.xs[i])) + "," + num(sy(s.mean[i] - s.sd[i])) + " ";
      pts.pop_back();
      svg += "<polygon points=\"" + pts + "\" fill=\"" + color + "\" fill-opacity=\"0.15\" stroke=\"none\"/>\n";
    } else if (band) {
      svg += "<line x1=\"" + num(sx(s.xs[0])) + "\" y1=\"" + num(sy(s.mean[0] - s.sd[0])) + "\" x2=\"" +
             num(sx(s.xs[0])) + "\" y2=\"" + num(sy(s.mean[0] + s.sd[0])) + "\" stroke=\"" + color + "\"/>\n";
    }
    if (s.xs.size() > 1) {
      std::string pts;
      for (std::size_t i = 0; i < s.xs.size(); ++i) pts += num(sx(s.xs[i])) + "," + num(sy(s.mean[i])) + " ";
      pts.pop_back();
      svg += "<polyline points=\"" + pts + "\" fill=\"none\" stroke=\"" + color + "\" stroke-width=\"2\"/>\n";
    }
    for (std::size_t i = 0; i < s.xs.size(); ++i)
      svg += "<circle cx=\"" + num(sx(s.xs[i])) + "\" cy=\"" + num(sy(s.mean[i])) + "\" r=\"3\" fill=\"" + color +
             "\"/>\n";
    const double ly = kTop + 10 + idx * 18;
    svg += "<line x1=\"" + num(kLeft + pw + 15) + "\" y1=\"" + num(ly) + "\" x2=\"" + num(kLeft + pw + 35) +
           "\" y2=\"" + num(ly) + "\" stroke=\"" + color + "\" stroke-width=\"2\"/>\n";
    svg += "<text x=\"" + num(kLeft + pw + 40) + "\" y=\"" + num(ly + 4) + "\">" + proto + "</text>\n";
    ++idx;
  }
  svg += "</svg>\n";
  return svg;
}

}  // namespace holesim
