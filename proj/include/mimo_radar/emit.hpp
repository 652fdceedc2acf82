#pragma once

// CSV and SVG writers for experiment results. Numbers are printed with
// %.10g so output bytes depend only on the values.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "mimo_radar/experiments.hpp"
#include "mimo_radar/special_cases.hpp"

namespace mimo_radar {

enum class OutputFormat { Csv, Svg };

inline OutputFormat output_format_from_string(const std::string& s) {
    if (s == "csv") return OutputFormat::Csv;
    if (s == "svg") return OutputFormat::Svg;
    throw InvalidArgumentError("unknown output format '" + s + "' (csv or svg)");
}

inline std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

inline void ensure_dir(const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec || !std::filesystem::is_directory(dir)) throw IoError("cannot create directory " + dir.string());
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) ensure_dir(path.parent_path());
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open " + path.string() + " for writing");
    f << text;
    f.close();
    if (!f) throw IoError("write failed for " + path.string());
}

/// File-name tag for an INR value, e.g. -10 -> "inr_m10".
inline std::string inr_tag(double inr_db) {
    std::string s = num(inr_db);
    if (!s.empty() && s[0] == '-') s = "m" + s.substr(1);
    std::replace(s.begin(), s.end(), '.', 'p');
    return "inr_" + s;
}

// ---------------------------------------------------------------------------
// CSV

inline std::string roc_csv(const std::vector<RocCurve>& curves) {
    std::ostringstream o;
    o << "detector,gamma,pfa_theory,pfa_empirical,pd_theory,pd_empirical,ci_halfwidth\n";
    for (const RocCurve& c : curves)
        for (std::size_t i = 0; i < c.gamma.size(); ++i)
            o << to_string(c.detector) << ',' << num(c.gamma[i]) << ',' << num(c.pfa_theory[i]) << ','
              << num(c.pfa_empirical[i]) << ',' << num(c.pd_theory[i]) << ',' << num(c.pd_empirical[i]) << ','
              << num(c.ci_halfwidth[i]) << '\n';
    return o.str();
}

/// Inverse of roc_csv (detector, inr and lambda are not stored per row).
inline std::vector<RocCurve> parse_roc_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != "detector,gamma,pfa_theory,pfa_empirical,pd_theory,pd_empirical,ci_halfwidth")
        throw IoError("not a ROC csv (bad header)");
    std::vector<RocCurve> out;
    long row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string cell;
        std::vector<std::string> cells;
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        if (cells.size() != 7) throw IoError("ROC csv row " + std::to_string(row) + ": expected 7 fields");
        const Detector d = detector_from_string(cells[0]);
        if (out.empty() || out.back().detector != d) {
            out.emplace_back();
            out.back().detector = d;
        }
        RocCurve& c = out.back();
        try {
            c.gamma.push_back(std::stod(cells[1]));
            c.pfa_theory.push_back(std::stod(cells[2]));
            c.pfa_empirical.push_back(std::stod(cells[3]));
            c.pd_theory.push_back(std::stod(cells[4]));
            c.pd_empirical.push_back(std::stod(cells[5]));
            c.ci_halfwidth.push_back(std::stod(cells[6]));
        } catch (const std::exception&) {
            throw IoError("ROC csv row " + std::to_string(row) + ": bad number");
        }
    }
    return out;
}

inline std::string theory_csv(const std::vector<std::pair<double, std::vector<DetectionCurve>>>& by_inr) {
    std::ostringstream o;
    o << "inr_db,detector,lambda,gamma,pfa,pd\n";
    for (const auto& [inr, curves] : by_inr)
        for (const DetectionCurve& c : curves)
            for (std::size_t i = 0; i < c.gamma_grid.size(); ++i)
                o << num(inr) << ',' << to_string(c.detector) << ',' << num(c.lambda) << ',' << num(c.gamma_grid[i])
                  << ',' << num(c.pfa[i]) << ',' << num(c.pd[i]) << '\n';
    return o.str();
}

/// Header row of angle-grid degrees, then one row per range bin.
inline std::string heatmap_csv(const HeatmapGrid& g) {
    std::ostringstream o;
    for (std::size_t a = 0; a < g.angles_deg.size(); ++a) o << (a ? "," : "") << num(g.angles_deg[a]);
    o << '\n';
    for (long l = 0; l < g.db.rows(); ++l) {
        for (long a = 0; a < g.db.cols(); ++a) o << (a ? "," : "") << num(g.db(l, a));
        o << '\n';
    }
    return o.str();
}

inline std::string oip_csv(const std::vector<OipSample>& samples) {
    std::ostringstream o;
    o << "detector,run,angle_deg,range_m,oip_db\n";
    for (const OipSample& s : samples)
        o << s.statistic << ',' << s.run << ',' << num(s.angle_deg) << ',' << num(s.range_m) << ',' << num(s.oip_db) << '\n';
    return o.str();
}

/// Empirical CDF per statistic: value and fraction of runs at or below it.
inline std::string oip_cdf_csv(const std::vector<OipSample>& samples, const std::vector<std::string>& labels) {
    std::ostringstream o;
    o << "detector,oip_db,cdf\n";
    for (const std::string& l : labels) {
        const std::vector<double> v = oip_values(samples, l);
        for (std::size_t i = 0; i < v.size(); ++i)
            o << l << ',' << num(v[i]) << ',' << num(static_cast<double>(i + 1) / static_cast<double>(v.size())) << '\n';
    }
    return o.str();
}

inline std::string oip_summary_csv(const std::vector<OipSample>& samples, const std::vector<std::string>& labels) {
    std::ostringstream o;
    o << "detector,median_db,p80_db\n";
    for (const std::string& l : labels) {
        const std::vector<double> v = oip_values(samples, l);
        if (v.empty()) continue;
        o << l << ',' << num(percentile(v, 50.0)) << ',' << num(percentile(v, 80.0)) << '\n';
    }
    return o.str();
}

inline std::string special_cases_csv(const std::vector<std::pair<long, SpecialCaseReport>>& reports) {
    std::ostringstream o;
    o << "mode,pulses,deviation,structure,tolerance,passed\n";
    for (const auto& [k, r] : reports)
        o << to_string(r.mode) << ',' << k << ',' << num(r.deviation) << ',' << num(r.structure) << ','
          << num(r.tolerance) << ',' << (r.passed ? 1 : 0) << '\n';
    return o.str();
}

// ---------------------------------------------------------------------------
// SVG

struct Series {
    std::string name;
    std::vector<double> x;
    std::vector<double> y;
};

struct LinePlot {
    std::string title;
    std::string x_label;
    std::string y_label;
    bool log_x = false;
    std::vector<Series> series;
};

namespace detail {

inline const char* palette(std::size_t i) {
    static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                   "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
    return colors[i % 10];
}

inline std::string escape(const std::string& s) {
    std::string o;
    for (char c : s) {
        if (c == '<') o += "&lt;";
        else if (c == '>') o += "&gt;";
        else if (c == '&') o += "&amp;";
        else o += c;
    }
    return o;
}

// "nice" tick positions covering [lo, hi]
inline std::vector<double> ticks(double lo, double hi, int target = 6) {
    const double span = hi - lo;
    if (!(span > 0.0)) return {lo};
    const double raw = span / target;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = mag;
    for (double m : {1.0, 2.0, 5.0, 10.0})
        if (m * mag >= raw) {
            step = m * mag;
            break;
        }
    std::vector<double> t;
    for (double v = std::ceil(lo / step) * step; v <= hi + 1e-9 * span; v += step) t.push_back(std::abs(v) < 1e-12 * step ? 0.0 : v);
    return t;
}

}  // namespace detail

inline std::string line_svg(const LinePlot& p) {
    const double w = 640, h = 440, ml = 70, mr = 150, mt = 40, mb = 55;
    double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
    auto tx = [&](double x) { return p.log_x ? std::log10(x) : x; };
    for (const Series& s : p.series)
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (p.log_x && !(s.x[i] > 0.0)) continue;
            x0 = std::min(x0, tx(s.x[i]));
            x1 = std::max(x1, tx(s.x[i]));
            y0 = std::min(y0, s.y[i]);
            y1 = std::max(y1, s.y[i]);
        }
    if (x0 > x1) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
    if (x1 == x0) x1 = x0 + 1;
    if (y1 == y0) y1 = y0 + 1;
    const double pw = w - ml - mr, ph = h - mt - mb;
    auto px = [&](double x) { return ml + (tx(x) - x0) / (x1 - x0) * pw; };
    auto py = [&](double y) { return mt + (1.0 - (y - y0) / (y1 - y0)) * ph; };

    std::ostringstream o;
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    o << "<text x=\"" << ml + pw / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << detail::escape(p.title) << "</text>\n";
    o << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << pw << "\" height=\"" << ph << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (double t : detail::ticks(x0, x1)) {
        const double x = ml + (t - x0) / (x1 - x0) * pw;
        o << "<line x1=\"" << num(x) << "\" y1=\"" << mt + ph << "\" x2=\"" << num(x) << "\" y2=\"" << mt + ph + 5 << "\" stroke=\"black\"/>\n";
        o << "<text x=\"" << num(x) << "\" y=\"" << mt + ph + 18 << "\" text-anchor=\"middle\">"
          << (p.log_x ? num(std::pow(10.0, t)) : num(t)) << "</text>\n";
    }
    for (double t : detail::ticks(y0, y1)) {
        const double y = py(t);
        o << "<line x1=\"" << ml - 5 << "\" y1=\"" << num(y) << "\" x2=\"" << ml << "\" y2=\"" << num(y) << "\" stroke=\"black\"/>\n";
        o << "<text x=\"" << ml - 8 << "\" y=\"" << num(y + 4) << "\" text-anchor=\"end\">" << num(t) << "</text>\n";
    }
    o << "<text x=\"" << ml + pw / 2 << "\" y=\"" << h - 12 << "\" text-anchor=\"middle\">" << detail::escape(p.x_label) << "</text>\n";
    o << "<text transform=\"translate(18," << mt + ph / 2 << ") rotate(-90)\" text-anchor=\"middle\">" << detail::escape(p.y_label) << "</text>\n";
    for (std::size_t s = 0; s < p.series.size(); ++s) {
        const Series& se = p.series[s];
        o << "<polyline fill=\"none\" stroke=\"" << detail::palette(s) << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < se.x.size(); ++i) {
            if (p.log_x && !(se.x[i] > 0.0)) continue;
            o << num(px(se.x[i])) << ',' << num(py(se.y[i])) << ' ';
        }
        o << "\"/>\n";
        const double ly = mt + 10 + 18 * static_cast<double>(s);
        o << "<line x1=\"" << ml + pw + 10 << "\" y1=\"" << ly << "\" x2=\"" << ml + pw + 30 << "\" y2=\"" << ly << "\" stroke=\""
          << detail::palette(s) << "\" stroke-width=\"2\"/>\n";
        o << "<text x=\"" << ml + pw + 35 << "\" y=\"" << ly + 4 << "\">" << detail::escape(se.name) << "</text>\n";
    }
    o << "</svg>\n";
    return o.str();
}

/// Range (rows) by angle (columns) image with a grey-to-yellow colormap.
inline std::string heatmap_svg(const HeatmapGrid& g, const std::string& title) {
    const long rows = g.db.rows(), cols = g.db.cols();
    const double w = 640, h = 520, ml = 70, mr = 90, mt = 40, mb = 55;
    const double pw = w - ml - mr, ph = h - mt - mb;
    const bool any = rows > 0 && cols > 0;
    const double lo = any ? g.db.minCoeff() : 0.0;
    const double hi = any ? std::max(g.db.maxCoeff(), lo + 1e-9) : 1.0;
    auto color = [&](double v) {
        const double t = std::clamp((v - lo) / (hi - lo), 0.0, 1.0);
        const int r = static_cast<int>(std::lround(40 + 215 * t));
        const int gg = static_cast<int>(std::lround(30 + 200 * std::sqrt(t)));
        const int b = static_cast<int>(std::lround(90 * (1.0 - t)));
        char buf[8];
        std::snprintf(buf, sizeof buf, "#%02x%02x%02x", r, gg, b);
        return std::string(buf);
    };
    std::ostringstream o;
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    o << "<text x=\"" << ml + pw / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << detail::escape(title) << "</text>\n";
    const double cw = cols ? pw / static_cast<double>(cols) : pw;
    const double ch = rows ? ph / static_cast<double>(rows) : ph;
    for (long l = 0; l < rows; ++l)
        for (long a = 0; a < cols; ++a)
            o << "<rect x=\"" << num(ml + a * cw) << "\" y=\"" << num(mt + ph - (l + 1) * ch) << "\" width=\"" << num(cw + 0.05)
              << "\" height=\"" << num(ch + 0.05) << "\" fill=\"" << color(g.db(l, a)) << "\"/>\n";
    o << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << pw << "\" height=\"" << ph << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (long a = 0; a < cols; a += std::max(1L, cols / 8))
        o << "<text x=\"" << num(ml + (a + 0.5) * cw) << "\" y=\"" << mt + ph + 18 << "\" text-anchor=\"middle\">"
          << num(std::round(g.angles_deg[static_cast<std::size_t>(a)] * 10) / 10) << "</text>\n";
    for (long l = 0; l < rows; l += std::max(1L, rows / 8))
        o << "<text x=\"" << ml - 8 << "\" y=\"" << num(mt + ph - (l + 0.5) * ch + 4) << "\" text-anchor=\"end\">" << l << "</text>\n";
    o << "<text x=\"" << ml + pw / 2 << "\" y=\"" << h - 12 << "\" text-anchor=\"middle\">angle (deg)</text>\n";
    o << "<text transform=\"translate(18," << mt + ph / 2 << ") rotate(-90)\" text-anchor=\"middle\">range bin</text>\n";
    // colorbar
    const double bx = ml + pw + 20;
    for (int i = 0; i < 50; ++i) {
        const double v = lo + (hi - lo) * i / 49.0;
        o << "<rect x=\"" << bx << "\" y=\"" << num(mt + ph - (i + 1) * ph / 50) << "\" width=\"16\" height=\"" << num(ph / 50 + 0.05)
          << "\" fill=\"" << color(v) << "\"/>\n";
    }
    o << "<text x=\"" << bx + 20 << "\" y=\"" << mt + 10 << "\">" << num(std::round(hi * 10) / 10) << "</text>\n";
    o << "<text x=\"" << bx + 20 << "\" y=\"" << mt + ph << "\">" << num(std::round(lo * 10) / 10) << "</text>\n";
    o << "<text x=\"" << bx << "\" y=\"" << mt - 6 << "\">dB</text>\n";
    o << "</svg>\n";
    return o.str();
}

inline LinePlot roc_plot(const std::vector<RocCurve>& curves, double inr_db) {
    LinePlot p{"ROC, INR " + num(inr_db) + " dB", "P_FA", "P_D", true, {}};
    for (const RocCurve& c : curves) {
        p.series.push_back({std::string(to_string(c.detector)) + " theory", c.pfa_theory, c.pd_theory});
        p.series.push_back({std::string(to_string(c.detector)) + " empirical", c.pfa_theory, c.pd_empirical});
    }
    return p;
}

inline LinePlot theory_plot(const std::vector<DetectionCurve>& curves, double inr_db) {
    LinePlot p{"Analytical ROC, INR " + num(inr_db) + " dB", "P_FA", "P_D", true, {}};
    for (const DetectionCurve& c : curves) p.series.push_back({to_string(c.detector), c.pfa, c.pd});
    return p;
}

inline LinePlot oip_cdf_plot(const std::vector<OipSample>& samples, const std::vector<std::string>& labels) {
    LinePlot p{"CDF of output interference power", "OIP (dB)", "CDF", false, {}};
    for (const std::string& l : labels) {
        Series s{l, oip_values(samples, l), {}};
        for (std::size_t i = 0; i < s.x.size(); ++i) s.y.push_back(static_cast<double>(i + 1) / static_cast<double>(s.x.size()));
        p.series.push_back(std::move(s));
    }
    return p;
}

/// Angle cut of every heatmap grid at one range bin.
inline LinePlot angle_cut_plot(const std::vector<HeatmapGrid>& grids, long range_bin) {
    LinePlot p{"Angle cut at range bin " + std::to_string(range_bin), "angle (deg)", "statistic (dB)", false, {}};
    for (const HeatmapGrid& g : grids) {
        Series s{g.statistic, g.angles_deg, {}};
        for (long a = 0; a < g.db.cols(); ++a) s.y.push_back(g.db(range_bin, a));
        p.series.push_back(std::move(s));
    }
    return p;
}

}  // namespace mimo_radar
