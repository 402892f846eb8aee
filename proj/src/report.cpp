#include "aew/report.hpp"

#include "aew/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace aew {

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string join_support(const Support& J) {
    std::string out;
    for (std::size_t i = 0; i < J.size(); ++i) {
        if (i > 0) out += ';';
        out += std::to_string(J[i]);
    }
    return out;
}

Support parse_support(std::string_view text) {
    Support J;
    while (!text.empty()) {
        const auto cut = text.find(';');
        const auto token = text.substr(0, cut);
        std::size_t v = 0;
        const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
        if (ec != std::errc() || ptr != token.data() + token.size()) {
            throw DomainError("malformed support token '" + std::string(token) + "'");
        }
        J.push_back(v);
        if (cut == std::string_view::npos) break;
        text.remove_prefix(cut + 1);
    }
    return J;
}

std::vector<std::string> split_csv_line(std::string_view line) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    std::vector<std::string> cells;
    std::size_t start = 0;
    while (true) {
        const auto cut = line.find(',', start);
        cells.emplace_back(line.substr(start, cut == std::string_view::npos ? cut : cut - start));
        if (cut == std::string_view::npos) break;
        start = cut + 1;
    }
    return cells;
}

namespace {

double quantile_sorted(const std::vector<double>& v, double q) {
    const double pos = q * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, v.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return v[lo] + frac * (v[hi] - v[lo]);
}

}  // namespace

BoxStats box_stats(std::vector<double> values) {
    BoxStats b;
    if (values.empty()) return b;
    std::sort(values.begin(), values.end());
    b.min = values.front();
    b.max = values.back();
    b.q1 = quantile_sorted(values, 0.25);
    b.median = quantile_sorted(values, 0.5);
    b.q3 = quantile_sorted(values, 0.75);
    const double iqr = b.q3 - b.q1;
    const double lo_fence = b.q1 - 1.5 * iqr;
    const double hi_fence = b.q3 + 1.5 * iqr;
    b.whisker_low = b.q1;
    b.whisker_high = b.q3;
    for (const double v : values) {
        if (v < lo_fence || v > hi_fence) {
            b.outliers.push_back(v);
        } else {
            b.whisker_low = std::min(b.whisker_low, v);
            b.whisker_high = std::max(b.whisker_high, v);
        }
    }
    return b;
}

std::string render_boxplot_svg(const std::vector<BoxSeries>& series, const std::string& title) {
    constexpr double width = 480.0;
    constexpr double height = 360.0;
    constexpr double left = 60.0;
    constexpr double right = 20.0;
    constexpr double top = 40.0;
    constexpr double bottom = 50.0;

    double lo = 0.0;
    double hi = 0.0;
    bool any = false;
    for (const auto& s : series) {
        for (const double v : s.values) {
            lo = any ? std::min(lo, v) : v;
            hi = any ? std::max(hi, v) : v;
            any = true;
        }
    }
    if (!any) hi = 1.0;
    if (hi == lo) {
        lo -= 0.5;
        hi += 0.5;
    }
    const double pad = 0.05 * (hi - lo);
    lo -= pad;
    hi += pad;
    const double plot_h = height - top - bottom;
    auto ypix = [&](double v) { return top + plot_h * (hi - v) / (hi - lo); };

    std::ostringstream svg;
    auto num = [](double v) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.2f", v);
        return std::string(buf);
    };
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(width) << "\" height=\""
        << num(height) << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    svg << "<text x=\"" << num(width / 2) << "\" y=\"20\" text-anchor=\"middle\">" << title << "</text>\n";
    svg << "<line x1=\"" << num(left) << "\" y1=\"" << num(top) << "\" x2=\"" << num(left) << "\" y2=\""
        << num(top + plot_h) << "\" stroke=\"black\"/>\n";
    for (int t = 0; t <= 4; ++t) {
        const double v = lo + (hi - lo) * t / 4.0;
        svg << "<text x=\"" << num(left - 5) << "\" y=\"" << num(ypix(v) + 4)
            << "\" text-anchor=\"end\">" << format_double(v).substr(0, 6) << "</text>\n";
    }

    const double slot = (width - left - right) / static_cast<double>(std::max<std::size_t>(series.size(), 1));
    for (std::size_t i = 0; i < series.size(); ++i) {
        const double cx = left + slot * (static_cast<double>(i) + 0.5);
        const double half = std::min(slot * 0.3, 40.0);
        svg << "<text x=\"" << num(cx) << "\" y=\"" << num(height - bottom + 20)
            << "\" text-anchor=\"middle\">" << series[i].label << "</text>\n";
        if (series[i].values.empty()) continue;
        const BoxStats b = box_stats(series[i].values);
        svg << "<line x1=\"" << num(cx) << "\" y1=\"" << num(ypix(b.whisker_high)) << "\" x2=\"" << num(cx)
            << "\" y2=\"" << num(ypix(b.q3)) << "\" stroke=\"black\"/>\n";
        svg << "<line x1=\"" << num(cx) << "\" y1=\"" << num(ypix(b.q1)) << "\" x2=\"" << num(cx)
            << "\" y2=\"" << num(ypix(b.whisker_low)) << "\" stroke=\"black\"/>\n";
        svg << "<rect x=\"" << num(cx - half) << "\" y=\"" << num(ypix(b.q3)) << "\" width=\""
            << num(2 * half) << "\" height=\"" << num(ypix(b.q1) - ypix(b.q3))
            << "\" fill=\"#cfe0f3\" stroke=\"black\"/>\n";
        svg << "<line x1=\"" << num(cx - half) << "\" y1=\"" << num(ypix(b.median)) << "\" x2=\""
            << num(cx + half) << "\" y2=\"" << num(ypix(b.median)) << "\" stroke=\"black\" stroke-width=\"2\"/>\n";
        for (const double w : {b.whisker_low, b.whisker_high}) {
            svg << "<line x1=\"" << num(cx - half / 2) << "\" y1=\"" << num(ypix(w)) << "\" x2=\""
                << num(cx + half / 2) << "\" y2=\"" << num(ypix(w)) << "\" stroke=\"black\"/>\n";
        }
        for (const double o : b.outliers) {
            svg << "<circle cx=\"" << num(cx) << "\" cy=\"" << num(ypix(o))
                << "\" r=\"2.5\" fill=\"none\" stroke=\"black\"/>\n";
        }
    }
    svg << "</svg>\n";
    return svg.str();
}

Dataset read_dataset_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DomainError("cannot open data file '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) throw DomainError("data file '" + path + "' is empty");
    const auto header = split_csv_line(line);
    if (header.size() < 2 || header[0] != "y") {
        throw DomainError("data file header must be y,x1,...,xp");
    }
    const std::size_t p = header.size() - 1;
    std::vector<std::vector<double>> rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        const auto cells = split_csv_line(line);
        if (cells.size() != p + 1) {
            throw DomainError("line " + std::to_string(line_no) + ": expected " + std::to_string(p + 1) +
                              " fields, got " + std::to_string(cells.size()));
        }
        std::vector<double> row;
        row.reserve(cells.size());
        for (const auto& c : cells) {
            std::size_t used = 0;
            double v = 0.0;
            try {
                v = std::stod(c, &used);
            } catch (const std::exception&) {
                used = 0;
            }
            if (used == 0 || used != c.size()) {
                throw DomainError("line " + std::to_string(line_no) + ": cannot parse '" + c + "'");
            }
            row.push_back(v);
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw DomainError("data file '" + path + "' has no rows");
    MatrixXd X(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(p));
    VectorXd y(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto ii = static_cast<Eigen::Index>(i);
        y[ii] = rows[i][0];
        for (std::size_t j = 0; j < p; ++j) X(ii, static_cast<Eigen::Index>(j)) = rows[i][j + 1];
    }
    return Dataset(std::move(X), std::move(y));
}

}  // namespace aew
