#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace levylab {

// One verified quantity: a theory target, its Monte Carlo estimate, and the
// 3-SE + allowance rule that decides the verdict.  `basis` names how the
// theory number was obtained (closed form, quadrature, control value, ...).
struct ReportRow {
    std::string label;
    double theory = 0.0;
    double estimate = 0.0;
    double se = 0.0;
    double allowance = 0.0;  // added to 3 SE; 0 for exact rules
    std::string basis;
    bool checked = true;  // false rows are informational only
    bool pass = true;
};

inline ReportRow make_row(std::string label, double theory, double estimate, double se,
                          double allowance, std::string basis) {
    ReportRow r;
    r.label = std::move(label);
    r.theory = theory;
    r.estimate = estimate;
    r.se = se;
    r.allowance = allowance;
    r.basis = std::move(basis);
    r.pass = std::abs(estimate - theory) <= 3.0 * se + allowance;
    return r;
}

struct MomentReport {
    std::string experiment;
    double alpha = 0.0;
    int n = 0;
    int replicas = 0;
    std::uint64_t seed = 0;
    int failed_replicas = 0;
    std::vector<ReportRow> rows;
    std::map<std::string, double> scalars;              // run-level numbers (eta, t, k, ...)
    std::map<std::string, std::vector<double>> series;  // raw columns for CSV export

    bool pass() const {
        for (const auto& r : rows)
            if (r.checked && !r.pass) return false;
        return true;
    }
};

inline nlohmann::ordered_json report_json(const MomentReport& rep) {
    nlohmann::ordered_json j;
    j["schema"] = 1;
    j["experiment"] = rep.experiment;
    j["alpha"] = rep.alpha;
    j["n"] = rep.n;
    j["replicas"] = rep.replicas;
    j["seed"] = rep.seed;
    j["failed_replicas"] = rep.failed_replicas;
    j["pass"] = rep.pass();
    nlohmann::ordered_json scal = nlohmann::ordered_json::object();
    for (const auto& [k, v] : rep.scalars) scal[k] = v;
    j["scalars"] = std::move(scal);
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (const auto& r : rep.rows) {
        nlohmann::ordered_json row;
        row["label"] = r.label;
        row["theory"] = r.theory;
        row["estimate"] = r.estimate;
        row["se"] = r.se;
        row["allowance"] = r.allowance;
        row["basis"] = r.basis;
        row["checked"] = r.checked;
        row["pass"] = r.pass;
        rows.push_back(std::move(row));
    }
    j["rows"] = std::move(rows);
    return j;
}

inline void write_report_json(const std::string& path, const MomentReport& rep) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("write_report_json: cannot open " + path);
    f << report_json(rep).dump(2) << '\n';
}

inline void write_rows_csv(const std::string& path, const MomentReport& rep) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("write_rows_csv: cannot open " + path);
    f << "label,theory,estimate,se,allowance,checked,pass,basis\n";
    char buf[256];
    for (const auto& r : rep.rows) {
        std::snprintf(buf, sizeof buf, ",%.17g,%.17g,%.17g,%.17g,%d,%d,", r.theory, r.estimate,
                      r.se, r.allowance, r.checked ? 1 : 0, r.pass ? 1 : 0);
        f << '"' << r.label << '"' << buf << '"' << r.basis << '"' << '\n';
    }
}

inline void write_series_csv(const std::string& path, const std::string& header,
                             const std::vector<double>& values) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("write_series_csv: cannot open " + path);
    f << "index," << header << '\n';
    char buf[64];
    for (std::size_t i = 0; i < values.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%zu,%.17g\n", i + 1, values[i]);
        f << buf;
    }
}

namespace detail {

inline std::vector<double> histogram_density(const std::vector<double>& values, int bins,
                                             double lo, double hi) {
    std::vector<double> dens(bins, 0.0);
    if (values.empty()) return dens;
    const double w = (hi - lo) / bins;
    std::size_t inside = 0;
    for (double v : values) {
        if (v < lo || v >= hi) continue;
        ++dens[static_cast<int>((v - lo) / w)];
        ++inside;
    }
    if (inside == 0) return dens;
    for (double& d : dens) d /= static_cast<double>(values.size()) * w;
    return dens;
}

}  // namespace detail

// Static density histogram with an optional overlay curve drawn from a second
// sample binned the same way.  Pure text output: byte-stable for fixed input.
inline void write_histogram_svg(const std::string& path, const std::vector<double>& values,
                                const std::vector<double>& overlay, int bins, double lo,
                                double hi, const std::string& title,
                                const std::string& xlabel) {
    if (bins < 1 || !(hi > lo)) throw std::invalid_argument("write_histogram_svg: bad bin spec");
    const int W = 720, H = 440, ml = 62, mr = 18, mt = 34, mb = 46;
    const double pw = W - ml - mr, ph = H - mt - mb;

    const std::vector<double> dv = detail::histogram_density(values, bins, lo, hi);
    const std::vector<double> dov = detail::histogram_density(overlay, bins, lo, hi);
    double ymax = 1e-12;
    for (double d : dv) ymax = std::max(ymax, d);
    for (double d : dov) ymax = std::max(ymax, d);
    ymax *= 1.08;

    const auto px = [&](double x) { return ml + (x - lo) / (hi - lo) * pw; };
    const auto py = [&](double y) { return mt + ph - y / ymax * ph; };

    std::ofstream f(path);
    if (!f) throw std::runtime_error("write_histogram_svg: cannot open " + path);
    char buf[512];
    f << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
      << "\" viewBox=\"0 0 " << W << ' ' << H << "\">\n";
    f << "<rect width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n";
    f << "<text x=\"" << W / 2 << "\" y=\"20\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"14\">"
      << title << "</text>\n";

    const double bw = (hi - lo) / bins;
    for (int b = 0; b < bins; ++b) {
        if (dv[b] <= 0.0) continue;
        std::snprintf(buf, sizeof buf,
                      "<rect x=\"%.2f\" y=\"%.2f\" width=\"%.2f\" height=\"%.2f\" "
                      "fill=\"#9ecae1\" stroke=\"#6baed6\" stroke-width=\"0.5\"/>\n",
                      px(lo + b * bw), py(dv[b]), pw / bins, py(0.0) - py(dv[b]));
        f << buf;
    }
    if (!overlay.empty()) {
        f << "<polyline fill=\"none\" stroke=\"#d62728\" stroke-width=\"1.8\" points=\"";
        for (int b = 0; b < bins; ++b) {
            std::snprintf(buf, sizeof buf, "%.2f,%.2f ", px(lo + (b + 0.5) * bw), py(dov[b]));
            f << buf;
        }
        f << "\"/>\n";
    }

    // axes with five ticks each
    std::snprintf(buf, sizeof buf,
                  "<line x1=\"%d\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"black\"/>\n", ml,
                  py(0.0), ml + pw, py(0.0));
    f << buf;
    std::snprintf(buf, sizeof buf,
                  "<line x1=\"%d\" y1=\"%d\" x2=\"%d\" y2=\"%.2f\" stroke=\"black\"/>\n", ml, mt,
                  ml, py(0.0));
    f << buf;
    for (int t = 0; t <= 4; ++t) {
        const double xv = lo + (hi - lo) * t / 4.0;
        std::snprintf(buf, sizeof buf,
                      "<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"black\"/>"
                      "<text x=\"%.2f\" y=\"%.2f\" text-anchor=\"middle\" "
                      "font-family=\"sans-serif\" font-size=\"11\">%.3g</text>\n",
                      px(xv), py(0.0), px(xv), py(0.0) + 5.0, px(xv), py(0.0) + 18.0, xv);
        f << buf;
        const double yv = ymax * t / 4.0;
        std::snprintf(buf, sizeof buf,
                      "<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%d\" y2=\"%.2f\" stroke=\"black\"/>"
                      "<text x=\"%.2f\" y=\"%.2f\" text-anchor=\"end\" "
                      "font-family=\"sans-serif\" font-size=\"11\">%.3g</text>\n",
                      static_cast<double>(ml - 5), py(yv), ml, py(yv),
                      static_cast<double>(ml - 8), py(yv) + 4.0, yv);
        f << buf;
    }
    f << "<text x=\"" << ml + pw / 2 << "\" y=\"" << H - 8
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" << xlabel
      << "</text>\n";
    f << "</svg>\n";
}

}  // namespace levylab
