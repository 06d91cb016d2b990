#pragma once

#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "garden/dates.hpp"
#include "garden/error.hpp"
#include "garden/forecast.hpp"
#include "garden/rng.hpp"
#include "garden/version.hpp"

namespace garden::report {

// ---------------------------------------------------------------------------
// Deterministic JSON formatting
// ---------------------------------------------------------------------------

namespace detail {

inline std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

inline void dump_value(const nlohmann::ordered_json& j, std::string& out, int depth) {
    const std::string pad(static_cast<std::size_t>(depth) * 2, ' ');
    const std::string pad_in(static_cast<std::size_t>(depth + 1) * 2, ' ');
    switch (j.type()) {
    case nlohmann::ordered_json::value_t::object: {
        if (j.empty()) {
            out += "{}";
            return;
        }
        out += "{\n";
        bool first = true;
        for (const auto& [key, value] : j.items()) {
            if (!first) {
                out += ",\n";
            }
            first = false;
            out += pad_in;
            out += nlohmann::ordered_json(key).dump();
            out += ": ";
            dump_value(value, out, depth + 1);
        }
        out += "\n";
        out += pad;
        out += "}";
        return;
    }
    case nlohmann::ordered_json::value_t::array: {
        if (j.empty()) {
            out += "[]";
            return;
        }
        out += "[\n";
        bool first = true;
        for (const auto& value : j) {
            if (!first) {
                out += ",\n";
            }
            first = false;
            out += pad_in;
            dump_value(value, out, depth + 1);
        }
        out += "\n";
        out += pad;
        out += "]";
        return;
    }
    case nlohmann::ordered_json::value_t::number_float:
        out += format_double(j.get<double>());
        return;
    default:
        out += j.dump();
        return;
    }
}

} // namespace detail

/// Serializes a report tree with insertion-ordered keys, two-space indent,
/// and every floating-point number rendered as fixed six decimals, so equal
/// inputs produce byte-identical documents.
inline std::string fixed_json_dump(const nlohmann::ordered_json& j) {
    std::string out;
    detail::dump_value(j, out, 0);
    out += "\n";
    return out;
}

/// 16-hex-digit FNV-1a content hash used for input provenance.
inline std::string fnv1a_hex(std::string_view bytes) {
    const std::uint64_t h = fnv1a64(bytes);
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

inline nlohmann::ordered_json provenance_entry(const std::string& path,
                                               std::string_view bytes) {
    nlohmann::ordered_json j;
    j["path"] = path;
    j["fnv1a64"] = fnv1a_hex(bytes);
    j["bytes"] = bytes.size();
    return j;
}

/// Common header for every JSON document the tool writes.
inline nlohmann::ordered_json report_header(const std::string& kind) {
    nlohmann::ordered_json j;
    j["schema_version"] = kSchemaVersion;
    j["kind"] = kind;
    j["tool"] = {{"name", "garden-trends"}, {"version", kVersion}};
    return j;
}

// ---------------------------------------------------------------------------
// Forecast CSV
// ---------------------------------------------------------------------------

struct ForecastRow {
    std::int64_t period_start = 0; // epoch days
    std::optional<double> actual;
    std::optional<double> predicted;
    std::optional<double> lower95;
    std::optional<double> upper95;
    std::string model;
};

/// `period_start,actual,predicted,lower95,upper95,model` with ISO dates,
/// fixed six decimals, and empty cells for absent values.
inline std::string render_forecast_csv(const std::vector<ForecastRow>& rows) {
    std::string out = "period_start,actual,predicted,lower95,upper95,model\n";
    const auto cell = [](const std::optional<double>& v) {
        return v ? detail::format_double(*v) : std::string();
    };
    for (const auto& r : rows) {
        out += dates::format_date(r.period_start);
        out += ',';
        out += cell(r.actual);
        out += ',';
        out += cell(r.predicted);
        out += ',';
        out += cell(r.lower95);
        out += ',';
        out += cell(r.upper95);
        out += ',';
        out += r.model;
        out += '\n';
    }
    return out;
}

/// History plus forecast path as CSV rows: observed periods carry only the
/// actual column, future periods carry the prediction and interval.
inline std::vector<ForecastRow> forecast_rows(const forecast::TimeSeries& history,
                                              const forecast::ForecastPath& path) {
    std::vector<ForecastRow> rows;
    rows.reserve(history.values.size() + path.point.size());
    for (std::size_t i = 0; i < history.values.size(); ++i) {
        ForecastRow r;
        r.period_start = history.starts[i];
        r.actual = history.values[i];
        r.model = path.label;
        rows.push_back(std::move(r));
    }
    std::int64_t at = history.starts.back();
    for (std::size_t h = 0; h < path.point.size(); ++h) {
        at = forecast::detail::next_period(at, history.freq);
        ForecastRow r;
        r.period_start = at;
        r.predicted = path.point[h];
        r.lower95 = path.lower[h];
        r.upper95 = path.upper[h];
        r.model = path.label;
        rows.push_back(std::move(r));
    }
    return rows;
}

// ---------------------------------------------------------------------------
// SVG chart
// ---------------------------------------------------------------------------

namespace detail {

inline std::string svg_num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

} // namespace detail

/// 800x400 line chart: observed series, forecast line, and a shaded 95%
/// interval band. Output depends only on the inputs (no timestamps or
/// random ids), so charts are byte-identical across runs.
inline std::string render_svg_chart(const std::string& title,
                                    const forecast::TimeSeries& history,
                                    const forecast::ForecastPath& path) {
    require(!history.values.empty(), "render_svg_chart: empty history");
    require(!path.point.empty(), "render_svg_chart: empty forecast");
    constexpr double kWidth = 800.0, kHeight = 400.0;
    constexpr double kLeft = 55.0, kRight = 20.0, kTop = 35.0, kBottom = 40.0;
    const double plot_w = kWidth - kLeft - kRight;
    const double plot_h = kHeight - kTop - kBottom;

    const std::size_t n_hist = history.values.size();
    const std::size_t n_total = n_hist + path.point.size();
    double lo = history.values[0], hi = history.values[0];
    for (double v : history.values) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    for (std::size_t h = 0; h < path.point.size(); ++h) {
        lo = std::min(lo, path.lower[h]);
        hi = std::max(hi, path.upper[h]);
    }
    if (hi - lo < 1e-9) {
        lo -= 1.0;
        hi += 1.0;
    }
    const auto x_at = [&](std::size_t i) {
        return kLeft + plot_w * static_cast<double>(i) / static_cast<double>(n_total - 1);
    };
    const auto y_at = [&](double v) { return kTop + plot_h * (hi - v) / (hi - lo); };

    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"400\" "
           "viewBox=\"0 0 800 400\">\n";
    svg += "  <rect x=\"0\" y=\"0\" width=\"800\" height=\"400\" fill=\"#ffffff\"/>\n";
    svg += "  <text x=\"400\" y=\"22\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"16\">" +
           title + "</text>\n";

    // 95% band polygon: upper path left-to-right, lower path back.
    svg += "  <polygon fill=\"#cfe3f5\" stroke=\"none\" points=\"";
    for (std::size_t h = 0; h < path.point.size(); ++h) {
        if (h) {
            svg += ' ';
        }
        svg += detail::svg_num(x_at(n_hist + h)) + "," + detail::svg_num(y_at(path.upper[h]));
    }
    for (std::size_t h = path.point.size(); h-- > 0;) {
        svg += ' ';
        svg += detail::svg_num(x_at(n_hist + h)) + "," + detail::svg_num(y_at(path.lower[h]));
    }
    svg += "\"/>\n";

    svg += "  <polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < n_hist; ++i) {
        if (i) {
            svg += ' ';
        }
        svg += detail::svg_num(x_at(i)) + "," + detail::svg_num(y_at(history.values[i]));
    }
    svg += "\"/>\n";

    svg += "  <polyline fill=\"none\" stroke=\"#d62728\" stroke-width=\"1.5\" "
           "stroke-dasharray=\"6 3\" points=\"";
    svg += detail::svg_num(x_at(n_hist - 1)) + "," +
           detail::svg_num(y_at(history.values[n_hist - 1]));
    for (std::size_t h = 0; h < path.point.size(); ++h) {
        svg += ' ';
        svg += detail::svg_num(x_at(n_hist + h)) + "," + detail::svg_num(y_at(path.point[h]));
    }
    svg += "\"/>\n";

    // Axes and range labels.
    svg += "  <line x1=\"" + detail::svg_num(kLeft) + "\" y1=\"" + detail::svg_num(kTop) +
           "\" x2=\"" + detail::svg_num(kLeft) + "\" y2=\"" +
           detail::svg_num(kHeight - kBottom) + "\" stroke=\"#333333\"/>\n";
    svg += "  <line x1=\"" + detail::svg_num(kLeft) + "\" y1=\"" +
           detail::svg_num(kHeight - kBottom) + "\" x2=\"" + detail::svg_num(kWidth - kRight) +
           "\" y2=\"" + detail::svg_num(kHeight - kBottom) + "\" stroke=\"#333333\"/>\n";
    for (std::size_t i = 0; i < n_total; ++i) {
        svg += "  <line x1=\"" + detail::svg_num(x_at(i)) + "\" y1=\"" +
               detail::svg_num(kHeight - kBottom) + "\" x2=\"" + detail::svg_num(x_at(i)) +
               "\" y2=\"" + detail::svg_num(kHeight - kBottom + 4) +
               "\" stroke=\"#333333\"/>\n";
    }
    svg += "  <text x=\"" + detail::svg_num(kLeft - 6) + "\" y=\"" +
           detail::svg_num(kTop + 5) +
           "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" +
           detail::format_double(hi) + "</text>\n";
    svg += "  <text x=\"" + detail::svg_num(kLeft - 6) + "\" y=\"" +
           detail::svg_num(kHeight - kBottom) +
           "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" +
           detail::format_double(lo) + "</text>\n";
    svg += "  <text x=\"" + detail::svg_num(kLeft) + "\" y=\"" +
           detail::svg_num(kHeight - kBottom + 16) +
           "\" text-anchor=\"start\" font-family=\"sans-serif\" font-size=\"11\">" +
           dates::format_date(history.starts.front()) + "</text>\n";
    svg += "  <text x=\"" + detail::svg_num(kWidth - kRight) + "\" y=\"" +
           detail::svg_num(kHeight - kBottom + 16) +
           "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">+" +
           std::to_string(path.point.size()) + " periods</text>\n";
    svg += "</svg>\n";
    return svg;
}

} // namespace garden::report
