#pragma once

#include "aew/dataset.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace aew {

/// Shortest round-trip form is not required; every float is written with 17
/// significant digits so that parsing it back yields the same double.
std::string format_double(double v);

/// "0;2;4" (empty string for the empty set).
std::string join_support(const Support& J);
Support parse_support(std::string_view text);

/// Splits one CSV line on commas; no quoting support.
std::vector<std::string> split_csv_line(std::string_view line);

/// Five-number summary with Tukey fences.
struct BoxStats {
    double min = 0.0;
    double q1 = 0.0;
    double median = 0.0;
    double q3 = 0.0;
    double max = 0.0;
    double whisker_low = 0.0;
    double whisker_high = 0.0;
    std::vector<double> outliers;
};

/// Quartiles use linear interpolation between order statistics. Whiskers
/// reach the most extreme samples within 1.5 IQR of the box.
BoxStats box_stats(std::vector<double> values);

struct BoxSeries {
    std::string label;
    std::vector<double> values;
};

/// Static SVG with one box per series; series with no values are drawn as
/// an empty slot.
std::string render_boxplot_svg(const std::vector<BoxSeries>& series, const std::string& title);

/// Dataset from CSV with header "y,x1,...,xp".
Dataset read_dataset_csv(const std::string& path);

}  // namespace aew
