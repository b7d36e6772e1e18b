#include "mfl/svg_plot.hpp"

#include "mfl/errors.hpp"
#include "mfl/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>

namespace mfl {

namespace {

struct CsvTable {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    std::size_t column_index(const std::string& name) const {
        for (std::size_t i = 0; i < columns.size(); ++i) {
            if (columns[i] == name) return i;
        }
        throw io_error("CSV is missing column " + name);
    }
};

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}

CsvTable read_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open " + path.string());
    CsvTable table;
    std::string line;
    if (!std::getline(in, line)) throw io_error(path.string() + ": empty file");
    table.columns = split_csv_line(line);
    if (table.columns != split_csv_line(kCsvHeader))
        throw io_error(path.string() + ": unexpected CSV header");
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto fields = split_csv_line(line);
        if (fields.size() != table.columns.size())
            throw io_error(path.string() + ": malformed CSV row");
        table.rows.push_back(std::move(fields));
    }
    return table;
}

double parse_number(const std::string& text) {
    try {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (used != text.size()) throw io_error("bad number in CSV: " + text);
        return v;
    } catch (const std::exception&) {
        throw io_error("bad number in CSV: " + text);
    }
}

std::string format_g(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

constexpr const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c",
                                    "#d62728", "#9467bd", "#8c564b"};

struct Series {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

void write_svg(const std::filesystem::path& file, const std::string& y_label,
               const std::vector<Series>& series) {
    constexpr double width = 760, height = 480;
    constexpr double left = 80, right = 600, top = 36, bottom = 430;

    double x_min = series[0].x[0], x_max = x_min, y_min = series[0].y[0], y_max = y_min;
    for (const auto& s : series) {
        for (double v : s.x) { x_min = std::min(x_min, v); x_max = std::max(x_max, v); }
        for (double v : s.y) { y_min = std::min(y_min, v); y_max = std::max(y_max, v); }
    }
    if (x_max == x_min) { x_min -= 1.0; x_max += 1.0; }
    if (y_max == y_min) {
        const double pad = y_min == 0.0 ? 1.0 : 0.1 * std::abs(y_min);
        y_min -= pad;
        y_max += pad;
    } else {
        const double pad = 0.05 * (y_max - y_min);
        y_min -= pad;
        y_max += pad;
    }

    const auto sx = [&](double v) { return left + (v - x_min) / (x_max - x_min) * (right - left); };
    const auto sy = [&](double v) { return bottom - (v - y_min) / (y_max - y_min) * (bottom - top); };

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
        << "\" viewBox=\"0 0 " << width << " " << height << "\">\n"
        << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

    // Axes and ticks.
    svg << "<line x1=\"" << left << "\" y1=\"" << bottom << "\" x2=\"" << right << "\" y2=\""
        << bottom << "\" stroke=\"black\"/>\n"
        << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << bottom
        << "\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 5; ++i) {
        const double fx = x_min + (x_max - x_min) * i / 5.0;
        const double fy = y_min + (y_max - y_min) * i / 5.0;
        svg << "<line x1=\"" << sx(fx) << "\" y1=\"" << bottom << "\" x2=\"" << sx(fx) << "\" y2=\""
            << bottom + 5 << "\" stroke=\"black\"/>\n"
            << "<text x=\"" << sx(fx) << "\" y=\"" << bottom + 20
            << "\" font-size=\"12\" text-anchor=\"middle\">" << format_g(fx) << "</text>\n"
            << "<line x1=\"" << left - 5 << "\" y1=\"" << sy(fy) << "\" x2=\"" << left << "\" y2=\""
            << sy(fy) << "\" stroke=\"black\"/>\n"
            << "<text x=\"" << left - 9 << "\" y=\"" << sy(fy) + 4
            << "\" font-size=\"12\" text-anchor=\"end\">" << format_g(fy) << "</text>\n";
    }
    svg << "<text x=\"" << (left + right) / 2 << "\" y=\"" << height - 12
        << "\" font-size=\"14\" text-anchor=\"middle\">step</text>\n"
        << "<text x=\"20\" y=\"" << (top + bottom) / 2
        << "\" font-size=\"14\" text-anchor=\"middle\" transform=\"rotate(-90 20 "
        << (top + bottom) / 2 << ")\">" << y_label << "</text>\n";

    // Series with markers so single-point series stay visible.
    for (std::size_t k = 0; k < series.size(); ++k) {
        const char* color = kPalette[k % std::size(kPalette)];
        svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < series[k].x.size(); ++i) {
            svg << sx(series[k].x[i]) << ',' << sy(series[k].y[i]) << ' ';
        }
        svg << "\"/>\n";
        for (std::size_t i = 0; i < series[k].x.size(); ++i) {
            svg << "<circle cx=\"" << sx(series[k].x[i]) << "\" cy=\"" << sy(series[k].y[i])
                << "\" r=\"2.5\" fill=\"" << color << "\"/>\n";
        }
        const double ly = top + 18.0 * static_cast<double>(k);
        svg << "<line x1=\"" << right + 16 << "\" y1=\"" << ly << "\" x2=\"" << right + 40
            << "\" y2=\"" << ly << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n"
            << "<text x=\"" << right + 46 << "\" y=\"" << ly + 4 << "\" font-size=\"12\">"
            << series[k].label << "</text>\n";
    }
    svg << "</svg>\n";

    std::ofstream out(file);
    if (!out) throw io_error("cannot open " + file.string() + " for writing");
    out << svg.str();
    if (!out) throw io_error("failed writing " + file.string());
}

std::vector<Series> build_series(const CsvTable& table, const std::string& key_column,
                                 const std::string& metric) {
    const std::size_t key_col = table.column_index(key_column);
    const std::size_t step_col = table.column_index("step");
    const std::size_t metric_col = table.column_index(metric);

    // (key, step) -> running mean across seeds.
    std::map<double, std::map<double, std::pair<double, int>>> grouped;
    for (const auto& row : table.rows) {
        const double key = parse_number(row[key_col]);
        const double step = parse_number(row[step_col]);
        auto& cell = grouped[key][step];
        cell.first += parse_number(row[metric_col]);
        cell.second += 1;
    }

    std::vector<Series> series;
    for (const auto& [key, points] : grouped) {
        Series s;
        s.label = key_column + "=" + format_g(key);
        for (const auto& [step, acc] : points) {
            s.x.push_back(step);
            s.y.push_back(acc.first / acc.second);
        }
        series.push_back(std::move(s));
    }
    return series;
}

} // namespace

std::vector<std::filesystem::path> emit_plots(const std::filesystem::path& csv_path,
                                              const std::filesystem::path& out_dir) {
    const CsvTable table = read_csv(csv_path);
    if (table.rows.empty()) throw io_error(csv_path.string() + ": no data rows");

    std::set<std::string> tilde_values;
    const std::size_t ts_col = table.column_index("tilde_sigma");
    for (const auto& row : table.rows) tilde_values.insert(row[ts_col]);

    const bool label_noise_sweep = tilde_values.size() > 1;
    const std::string key = label_noise_sweep ? "tilde_sigma" : "sigma";
    const std::vector<std::string> metrics =
        label_noise_sweep ? std::vector<std::string>{"dof", "test_mse"}
                          : std::vector<std::string>{"align_emp", "dof"};

    std::filesystem::create_directories(out_dir);
    std::vector<std::filesystem::path> written;
    for (const auto& metric : metrics) {
        const auto file = out_dir / (metric + ".svg");
        write_svg(file, metric, build_series(table, key, metric));
        written.push_back(file);
    }
    return written;
}

} // namespace mfl
