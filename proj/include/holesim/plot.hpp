#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

#include "holesim/results.hpp"

namespace holesim {

class PlotError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// SVG line chart of `metric` against node count (`x` = "nodes") or failure
/// percentage (`x` = "failures"): one line per protocol through the mean
/// across seeds, with a +-1 stddev band where more than one value exists.
/// Output bytes depend only on the table contents.
std::string render_plot(const CsvTable& table, std::string_view metric, std::string_view x);

}  // namespace holesim
