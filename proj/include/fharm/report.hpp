#pragma once

#include "fharm/core.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace fharm {

/// Shortest round-trip-safe text for CSV output: 17 significant digits.
inline std::string format_double(double x)
{
    if (std::isnan(x))
        return "nan";
    if (std::isinf(x))
        return x > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

/// Comma-separated table with a fixed header, written as UTF-8 with '\n' line ends.
class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

    CsvTable& row() { rows_.emplace_back(); return *this; }
    CsvTable& add(const std::string& cell) { rows_.back().push_back(cell); return *this; }
    CsvTable& add(double x) { return add(format_double(x)); }
    CsvTable& add(int x) { return add(std::to_string(x)); }
    CsvTable& add(std::size_t x) { return add(std::to_string(x)); }
    CsvTable& add(bool b) { return add(std::string(b ? "true" : "false")); }

    std::size_t size() const { return rows_.size(); }

    std::string str() const
    {
        std::ostringstream os;
        write_line(os, header_);
        for (const auto& r : rows_) {
            if (r.size() != header_.size())
                throw ContractViolation("CsvTable: row width does not match the header");
            write_line(os, r);
        }
        return os.str();
    }

    void save(const std::filesystem::path& path) const { write_text_file(path, str()); }

    static void write_text_file(const std::filesystem::path& path, const std::string& text)
    {
        if (path.has_parent_path())
            std::filesystem::create_directories(path.parent_path());
        std::ofstream out(path, std::ios::binary);
        if (!out)
            throw ConfigError("cannot write " + path.string());
        out << text;
        if (!out)
            throw ConfigError("failed writing " + path.string());
    }

private:
    static void write_line(std::ostream& os, const std::vector<std::string>& cells)
    {
        for (std::size_t k = 0; k < cells.size(); ++k) {
            if (k)
                os << ',';
            os << cells[k];
        }
        os << '\n';
    }

    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

struct CsvData {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::size_t column(const std::string& name) const
    {
        for (std::size_t k = 0; k < header.size(); ++k)
            if (header[k] == name)
                return k;
        throw ConfigError("CSV has no column '" + name + "'");
    }
};

inline std::vector<std::string> split_csv_line(const std::string& line)
{
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream is(line);
    while (std::getline(is, cell, ','))
        cells.push_back(cell);
    if (!line.empty() && line.back() == ',')
        cells.emplace_back();
    return cells;
}

inline CsvData read_csv(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ConfigError("cannot read " + path.string());
    CsvData data;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty())
            continue;
        auto cells = split_csv_line(line);
        if (data.header.empty()) {
            data.header = std::move(cells);
            continue;
        }
        if (cells.size() != data.header.size())
            throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": expected "
                              + std::to_string(data.header.size()) + " cells, found " + std::to_string(cells.size()));
        data.rows.push_back(std::move(cells));
    }
    return data;
}

inline double parse_csv_double(const std::string& cell)
{
    char* end = nullptr;
    const double v = std::strtod(cell.c_str(), &end);
    if (cell.empty() || end != cell.c_str() + cell.size())
        throw ConfigError("not a number in CSV: '" + cell + "'");
    return v;
}

/// E(t) against t as a standalone SVG, with a dashed reference line at E(0).
inline std::string sweep_plot_svg(const std::vector<double>& t, const std::vector<double>& E, const std::string& title)
{
    if (t.empty() || t.size() != E.size())
        throw ConfigError("plot: no data rows");
    constexpr double W = 640, H = 400, L = 80, R = 20, T = 40, B = 50;
    const double e0 = E.front();
    double tmin = *std::min_element(t.begin(), t.end());
    double tmax = *std::max_element(t.begin(), t.end());
    double emin = std::min(e0, *std::min_element(E.begin(), E.end()));
    double emax = std::max(e0, *std::max_element(E.begin(), E.end()));
    if (tmax == tmin)
        tmax = tmin + 1.0;
    if (emax - emin < 1e-12 * (1.0 + std::abs(emax))) {
        const double pad = 0.05 * (1.0 + std::abs(emax));
        emin -= pad;
        emax += pad;
    }
    auto px = [&](double x) { return L + (x - tmin) / (tmax - tmin) * (W - L - R); };
    auto py = [&](double y) { return H - B - (y - emin) / (emax - emin) * (H - T - B); };
    auto num = [](double x) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.6g", x);
        return std::string(buf);
    };
    auto esc = [](const std::string& s) {
        std::string o;
        for (char c : s) {
            if (c == '<')
                o += "&lt;";
            else if (c == '>')
                o += "&gt;";
            else if (c == '&')
                o += "&amp;";
            else
                o += c;
        }
        return o;
    };

    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 " << W
       << ' ' << H << "\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">"
       << esc(title) << "</text>\n";
    os << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B
       << "\" stroke=\"black\"/>\n";
    os << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
    for (int k = 0; k <= 4; ++k) {
        const double tv = tmin + (tmax - tmin) * k / 4.0;
        const double ev = emin + (emax - emin) * k / 4.0;
        os << "<text x=\"" << num(px(tv)) << "\" y=\"" << H - B + 18
           << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << num(tv) << "</text>\n";
        os << "<text x=\"" << L - 6 << "\" y=\"" << num(py(ev) + 4)
           << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << num(ev) << "</text>\n";
    }
    os << "<text x=\"" << W / 2 << "\" y=\"" << H - 10
       << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">t</text>\n";
    os << "<text x=\"16\" y=\"" << H / 2 << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\""
       << " transform=\"rotate(-90 16 " << H / 2 << ")\">E(t)</text>\n";
    os << "<line id=\"reference\" x1=\"" << L << "\" y1=\"" << num(py(e0)) << "\" x2=\"" << W - R << "\" y2=\""
       << num(py(e0)) << "\" stroke=\"gray\" stroke-dasharray=\"6 4\"/>\n";
    os << "<polyline id=\"energy\" fill=\"none\" stroke=\"steelblue\" stroke-width=\"2\" points=\"";
    for (std::size_t k = 0; k < t.size(); ++k)
        os << (k ? " " : "") << num(px(t[k])) << ',' << num(py(E[k]));
    os << "\"/>\n</svg>\n";
    return os.str();
}

/// Reads a sweep CSV and writes its E(t) plot.
inline void emit_plot(const std::filesystem::path& csv, const std::filesystem::path& svg)
{
    const CsvData data = read_csv(csv);
    if (data.header.empty() || data.rows.empty())
        throw ConfigError("plot: " + csv.string() + " has no data rows");
    const std::size_t ct = data.column("t");
    const std::size_t ce = data.column("E");
    std::vector<double> t;
    std::vector<double> E;
    for (const auto& r : data.rows) {
        t.push_back(parse_csv_double(r[ct]));
        E.push_back(parse_csv_double(r[ce]));
    }
    CsvTable::write_text_file(svg, sweep_plot_svg(t, E, csv.filename().string()));
}

} // namespace fharm
