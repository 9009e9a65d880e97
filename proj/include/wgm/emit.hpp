#pragma once

// Result serialization: CSV, versioned JSON and self-contained SVG plots.
// Every file is written to a sibling temporary and renamed into place.

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "wgm/errors.hpp"
#include "wgm/scan.hpp"

namespace wgm {

inline constexpr std::string_view kResultSchema = "wgmsim.result/1";

/// Shortest round-trip text for a double; "nan", "inf", "-inf" for non-finite values.
inline std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    std::array<char, 32> buf{};
    const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), ec == std::errc() ? ptr : buf.data());
}

inline void write_atomically(const std::filesystem::path& path, const std::string& content) {
    namespace fs = std::filesystem;
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorCode::IoFailure, "cannot open '" + tmp.string() + "' for writing");
        out << content;
        out.flush();
        if (!out) throw Error(ErrorCode::IoFailure, "write to '" + tmp.string() + "' failed");
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw Error(ErrorCode::IoFailure, "cannot rename into '" + path.string() + "'");
    }
}

/// First line: '#' metadata (timestamp included). Then header and one line per cell.
/// Failed cells carry NaN values and their error in the trailing `error` column.
inline std::string to_csv(const ResultTable& t) {
    std::ostringstream os;
    os << "# wgmsim " << t.version << " preset=" << t.preset << " method=" << method_name(t.method)
       << " timestamp=" << t.timestamp << '\n';
    std::vector<std::string> header;
    for (const auto& a : t.axes) header.push_back(a.name);
    header.insert(header.end(), t.columns.begin(), t.columns.end());
    header.push_back("residual");
    header.push_back("error");
    for (std::size_t k = 0; k < header.size(); ++k) os << (k ? "," : "") << header[k];
    os << '\n';
    for (const auto& r : t.rows) {
        for (double x : r.axis) os << format_number(x) << ',';
        for (double v : r.values) os << format_number(v) << ',';
        os << format_number(r.residual) << ',';
        if (r.error) os << to_string(r.error->code);
        os << '\n';
    }
    return os.str();
}

inline nlohmann::json to_json(const ResultTable& t) {
    using nlohmann::json;
    auto num = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
    json axes = json::array();
    for (const auto& a : t.axes) axes.push_back({{"name", a.name}, {"min", a.min}, {"max", a.max}, {"step", a.step}});
    json rows = json::array();
    for (const auto& r : t.rows) {
        json row{{"axis", r.axis}, {"residual", num(r.residual)}};
        json values = json::object();
        for (std::size_t k = 0; k < t.columns.size() && k < r.values.size(); ++k) values[t.columns[k]] = num(r.values[k]);
        row["values"] = std::move(values);
        if (r.error) row["error"] = {{"code", to_string(r.error->code)}, {"message", r.error->message}};
        if (!r.warnings.empty()) row["warnings"] = r.warnings;
        rows.push_back(std::move(row));
    }
    return {{"schema", kResultSchema},
            {"metadata",
             {{"version", t.version},
              {"preset", t.preset},
              {"method", method_name(t.method)},
              {"timestamp", t.timestamp},
              {"elapsed_seconds", t.elapsed_seconds},
              {"cells", t.rows.size()},
              {"errors", t.error_count()},
              {"max_residual", t.max_residual()}}},
            {"axes", std::move(axes)},
            {"columns", t.columns},
            {"rows", std::move(rows)}};
}

namespace detail {

struct Range {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    void add(double v) {
        if (!std::isfinite(v)) return;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    bool empty() const { return !(hi >= lo); }
    Range padded() const {
        if (empty()) return {0.0, 1.0};
        if (hi - lo < 1e-300) return {lo - 0.5, hi + 0.5};
        return *this;
    }
};

inline constexpr std::array<const char*, 8> kPalette{"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                                     "#9467bd", "#8c564b", "#e377c2", "#17becf"};

// Viridis control points.
inline std::string colormap(double u) {
    static constexpr std::array<std::array<double, 3>, 5> stops{{{68, 1, 84},
                                                                 {59, 82, 139},
                                                                 {33, 145, 140},
                                                                 {94, 201, 98},
                                                                 {253, 231, 37}}};
    u = std::clamp(u, 0.0, 1.0) * (stops.size() - 1);
    const auto i = std::min<std::size_t>(static_cast<std::size_t>(u), stops.size() - 2);
    const double f = u - static_cast<double>(i);
    char buf[8];
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x", static_cast<int>(stops[i][0] + f * (stops[i + 1][0] - stops[i][0])),
                  static_cast<int>(stops[i][1] + f * (stops[i + 1][1] - stops[i][1])),
                  static_cast<int>(stops[i][2] + f * (stops[i + 1][2] - stops[i][2])));
    return buf;
}

inline std::string short_number(double v) {
    std::ostringstream os;
    os.precision(4);
    os << v;
    return os.str();
}

struct Frame {
    double width = 820, height = 520, left = 80, right = 170, top = 40, bottom = 60;
    double x0() const { return left; }
    double x1() const { return width - right; }
    double y0() const { return height - bottom; }
    double y1() const { return top; }
};

inline void svg_axes(std::ostringstream& os, const Frame& f, const Range& xr, const Range& yr,
                     const std::string& xlabel, const std::string& ylabel, const std::string& title) {
    os << "<rect x=\"" << f.x0() << "\" y=\"" << f.y1() << "\" width=\"" << f.x1() - f.x0() << "\" height=\""
       << f.y0() - f.y1() << "\" fill=\"none\" stroke=\"#000\"/>\n";
    for (int k = 0; k <= 5; ++k) {
        const double u = k / 5.0;
        const double x = f.x0() + u * (f.x1() - f.x0());
        const double y = f.y0() - u * (f.y0() - f.y1());
        os << "<line x1=\"" << x << "\" y1=\"" << f.y0() << "\" x2=\"" << x << "\" y2=\"" << f.y0() + 5
           << "\" stroke=\"#000\"/>\n<text x=\"" << x << "\" y=\"" << f.y0() + 20
           << "\" text-anchor=\"middle\" font-size=\"12\">" << short_number(xr.lo + u * (xr.hi - xr.lo))
           << "</text>\n";
        os << "<line x1=\"" << f.x0() - 5 << "\" y1=\"" << y << "\" x2=\"" << f.x0() << "\" y2=\"" << y
           << "\" stroke=\"#000\"/>\n<text x=\"" << f.x0() - 8 << "\" y=\"" << y + 4
           << "\" text-anchor=\"end\" font-size=\"12\">" << short_number(yr.lo + u * (yr.hi - yr.lo))
           << "</text>\n";
    }
    os << "<text x=\"" << (f.x0() + f.x1()) / 2 << "\" y=\"" << f.height - 15
       << "\" text-anchor=\"middle\" font-size=\"14\">" << xlabel << "</text>\n";
    os << "<text x=\"18\" y=\"" << (f.y0() + f.y1()) / 2 << "\" text-anchor=\"middle\" font-size=\"14\" transform=\"rotate(-90 18 "
       << (f.y0() + f.y1()) / 2 << ")\">" << ylabel << "</text>\n";
    os << "<text x=\"" << (f.x0() + f.x1()) / 2 << "\" y=\"25\" text-anchor=\"middle\" font-size=\"15\">" << title
       << "</text>\n";
}

inline std::string svg_open(const Frame& f) {
    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << f.width << "\" height=\"" << f.height
       << "\" viewBox=\"0 0 " << f.width << ' ' << f.height << "\" font-family=\"sans-serif\">\n"
       << "<rect width=\"100%\" height=\"100%\" fill=\"#fff\"/>\n";
    return os.str();
}

} // namespace detail

/// Line plot of the named columns against the first axis. Non-finite values break the line.
inline std::string to_svg_lines(const ResultTable& t, const std::vector<std::string>& columns) {
    if (t.axes.size() != 1) throw Error(ErrorCode::InvalidAxis, "line plots need a 1D table");
    std::vector<int> idx;
    for (const auto& c : columns) {
        const int k = t.column_index(c);
        if (k < 0) throw Error(ErrorCode::BadValue, "no column '" + c + "' in table");
        idx.push_back(k);
    }
    detail::Range xr, yr;
    for (const auto& r : t.rows) {
        xr.add(r.axis[0]);
        for (int k : idx) yr.add(r.values[k]);
    }
    xr = xr.padded();
    yr = yr.padded();
    const detail::Frame f;
    auto px = [&](double x) { return f.x0() + (x - xr.lo) / (xr.hi - xr.lo) * (f.x1() - f.x0()); };
    auto py = [&](double y) { return f.y0() - (y - yr.lo) / (yr.hi - yr.lo) * (f.y0() - f.y1()); };

    std::ostringstream os;
    os << detail::svg_open(f);
    detail::svg_axes(os, f, xr, yr, t.axes[0].name, "value", std::string("method ") + method_name(t.method));
    for (std::size_t s = 0; s < idx.size(); ++s) {
        const char* color = detail::kPalette[s % detail::kPalette.size()];
        std::string path;
        bool pen_down = false;
        for (const auto& r : t.rows) {
            const double v = r.values[idx[s]];
            if (!std::isfinite(v)) {
                pen_down = false;
                continue;
            }
            path += (pen_down ? " L" : " M") + detail::short_number(px(r.axis[0])) + ' ' + detail::short_number(py(v));
            pen_down = true;
        }
        if (!path.empty())
            os << "<path d=\"" << path.substr(1) << "\" fill=\"none\" stroke=\"" << color
               << "\" stroke-width=\"1.5\"/>\n";
        const double ly = f.y1() + 15 + 20 * static_cast<double>(s);
        os << "<line x1=\"" << f.x1() + 15 << "\" y1=\"" << ly << "\" x2=\"" << f.x1() + 40 << "\" y2=\"" << ly
           << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n<text x=\"" << f.x1() + 45 << "\" y=\"" << ly + 4
           << "\" font-size=\"12\">" << columns[s] << "</text>\n";
    }
    os << "</svg>\n";
    return os.str();
}

/// Heatmap of one column over a 2D table; non-finite cells are grey.
inline std::string to_svg_heatmap(const ResultTable& t, const std::string& column) {
    if (t.axes.size() != 2) throw Error(ErrorCode::InvalidAxis, "heatmaps need a 2D table");
    const int k = t.column_index(column);
    if (k < 0) throw Error(ErrorCode::BadValue, "no column '" + column + "' in table");
    const auto xs = t.axes[0].values();
    const auto ys = t.axes[1].values();
    detail::Range xr{xs.front(), xs.back()}, yr{ys.front(), ys.back()}, vr;
    for (const auto& r : t.rows) vr.add(r.values[k]);
    xr = xr.padded();
    yr = yr.padded();
    vr = vr.padded();
    const detail::Frame f;
    const double cw = (f.x1() - f.x0()) / static_cast<double>(xs.size());
    const double ch = (f.y0() - f.y1()) / static_cast<double>(ys.size());
    // Axis labels refer to cell centres.
    const detail::Range xl{xs.front(), xs.back()}, yl{ys.front(), ys.back()};

    std::ostringstream os;
    os << detail::svg_open(f);
    for (std::size_t n = 0; n < t.rows.size(); ++n) {
        const std::size_t ix = n / ys.size(), iy = n % ys.size();
        const double v = t.rows[n].values[k];
        const std::string fill = std::isfinite(v) ? detail::colormap((v - vr.lo) / (vr.hi - vr.lo)) : "#bbbbbb";
        os << "<rect x=\"" << detail::short_number(f.x0() + static_cast<double>(ix) * cw) << "\" y=\""
           << detail::short_number(f.y0() - static_cast<double>(iy + 1) * ch) << "\" width=\""
           << detail::short_number(cw + 0.02) << "\" height=\"" << detail::short_number(ch + 0.02) << "\" fill=\""
           << fill << "\"/>\n";
    }
    detail::svg_axes(os, f, xl.padded(), yl.padded(), t.axes[0].name, t.axes[1].name, column);
    const double bx = f.x1() + 30, bw = 20;
    for (int s = 0; s < 64; ++s) {
        const double u = (s + 0.5) / 64.0;
        const double y = f.y0() - (s + 1) * (f.y0() - f.y1()) / 64.0;
        os << "<rect x=\"" << bx << "\" y=\"" << detail::short_number(y) << "\" width=\"" << bw << "\" height=\""
           << detail::short_number((f.y0() - f.y1()) / 64.0 + 0.5) << "\" fill=\"" << detail::colormap(u) << "\"/>\n";
    }
    os << "<text x=\"" << bx + bw + 5 << "\" y=\"" << f.y0() << "\" font-size=\"12\">" << detail::short_number(vr.lo)
       << "</text>\n<text x=\"" << bx + bw + 5 << "\" y=\"" << f.y1() + 10 << "\" font-size=\"12\">"
       << detail::short_number(vr.hi) << "</text>\n</svg>\n";
    return os.str();
}

struct EmittedFiles {
    std::vector<std::filesystem::path> paths;
};

/// Writes stem.csv, stem.json and SVG plots: one line plot for 1D, one heatmap per column for 2D.
inline EmittedFiles emit(const ResultTable& t, const std::string& stem) {
    EmittedFiles out;
    auto put = [&](const std::string& path, const std::string& content) {
        write_atomically(path, content);
        out.paths.emplace_back(path);
    };
    put(stem + ".csv", to_csv(t));
    put(stem + ".json", to_json(t).dump(2) + "\n");
    if (t.columns.empty()) return out;
    if (t.axes.size() == 1) {
        put(stem + ".svg", to_svg_lines(t, t.columns));
    } else {
        for (const auto& c : t.columns) put(stem + "_" + c + ".svg", to_svg_heatmap(t, c));
    }
    return out;
}

} // namespace wgm
