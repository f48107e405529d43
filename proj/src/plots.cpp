/*
   Copyright 2026 The ldlab Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

#include "ldlab/plots.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "ldlab/digest.hpp"
#include "ldlab/errors.hpp"

namespace ldlab::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Series {
    Series(std::string l, std::string c) : label(std::move(l)), color(std::move(c)) {}
    std::string label;
    std::string color;
    std::vector<double> x, y;
    std::vector<double> lo, hi;  // optional error bars
    bool line = false;
};

struct Range {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    void add(double v) {
        if (!std::isfinite(v)) return;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    void pad() {
        if (!(hi > lo)) {
            lo -= 0.5;
            hi += 0.5;
        }
        const double m = 0.05 * (hi - lo);
        lo -= m;
        hi += m;
    }
};

std::string num(double v) {
    std::ostringstream os;
    os.precision(4);
    os << v;
    return os.str();
}

/// Minimal SVG scatter/line chart with linear axes.
std::string render_svg(const std::string& title, const std::string& xlabel, const std::string& ylabel,
                       const std::vector<Series>& series) {
    constexpr double W = 640, H = 420, L = 70, R = 20, T = 40, B = 55;
    Range xr, yr;
    for (const auto& s : series) {
        for (double v : s.x) xr.add(v);
        for (double v : s.y) yr.add(v);
        for (double v : s.lo) yr.add(v);
        for (double v : s.hi) yr.add(v);
    }
    xr.pad();
    yr.pad();
    auto px = [&](double x) { return L + (x - xr.lo) / (xr.hi - xr.lo) * (W - L - R); };
    auto py = [&](double y) { return H - B - (y - yr.lo) / (yr.hi - yr.lo) * (H - T - B); };

    std::ostringstream os;
    os.precision(6);
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
       << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << title
       << "</text>\n";
    os << "<rect x=\"" << L << "\" y=\"" << T << "\" width=\"" << W - L - R << "\" height=\""
       << H - T - B << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 4; ++i) {
        const double xv = xr.lo + (xr.hi - xr.lo) * i / 4.0;
        const double yv = yr.lo + (yr.hi - yr.lo) * i / 4.0;
        os << "<text x=\"" << px(xv) << "\" y=\"" << H - B + 16 << "\" text-anchor=\"middle\">"
           << num(xv) << "</text>\n";
        os << "<text x=\"" << L - 6 << "\" y=\"" << py(yv) + 4 << "\" text-anchor=\"end\">" << num(yv)
           << "</text>\n";
    }
    os << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\">"
       << xlabel << "</text>\n";
    os << "<text x=\"16\" y=\"" << (T + H - B) / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
       << (T + H - B) / 2 << ")\">" << ylabel << "</text>\n";

    double legend_y = T + 16;
    for (const auto& s : series) {
        if (s.line) {
            os << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\" points=\"";
            for (std::size_t i = 0; i < s.x.size(); ++i) {
                if (std::isfinite(s.y[i])) os << px(s.x[i]) << ',' << py(s.y[i]) << ' ';
            }
            os << "\"/>\n";
        } else {
            for (std::size_t i = 0; i < s.x.size(); ++i) {
                if (i < s.lo.size() && std::isfinite(s.lo[i]) && std::isfinite(s.hi[i])) {
                    os << "<line x1=\"" << px(s.x[i]) << "\" x2=\"" << px(s.x[i]) << "\" y1=\""
                       << py(s.lo[i]) << "\" y2=\"" << py(s.hi[i]) << "\" stroke=\"" << s.color
                       << "\"/>\n";
                }
                if (std::isfinite(s.y[i])) {
                    os << "<circle cx=\"" << px(s.x[i]) << "\" cy=\"" << py(s.y[i])
                       << "\" r=\"2.5\" fill=\"" << s.color << "\"/>\n";
                }
            }
        }
        os << "<text x=\"" << W - R - 8 << "\" y=\"" << legend_y << "\" text-anchor=\"end\" fill=\""
           << s.color << "\">" << s.label << "</text>\n";
        legend_y += 16;
    }
    os << "</svg>\n";
    return os.str();
}

void write_text(const fs::path& p, const std::string& text) {
    std::ofstream os(p);
    if (!os) throw Error("plots: cannot write " + p.string());
    os << text;
}

std::string eps_tag(double eps) {
    std::ostringstream os;
    os << eps;
    return os.str();
}

double log10_or_nan(double v) {
    return v > 0.0 ? std::log10(v) : std::numeric_limits<double>::quiet_NaN();
}

}  // namespace

PlotOutput emit_plots(const json& manifest, const fs::path& out_dir) {
    PlotOutput out;
    const json results = manifest.value("results", json::object());

    struct LdCurve {
        std::vector<double> n, p, lo, hi, bound;
    };
    std::map<double, LdCurve> ld;
    bool ld_bound = false;
    if (results.contains("verify") && results["verify"].contains("ld_cells")) {
        ld_bound = true;
        for (const auto& c : results["verify"]["ld_cells"]) {
            auto& cv = ld[c["epsilon"].get<double>()];
            cv.n.push_back(c["n"].get<double>());
            cv.p.push_back(c["p_hat"].get<double>());
            cv.lo.push_back(c["ci_low"].get<double>());
            cv.hi.push_back(c["ci_high"].get<double>());
            cv.bound.push_back(c["theorem_bound"].get<double>());
        }
    } else if (results.contains("ld")) {
        for (const auto& col : results["ld"]["columns"]) {
            auto& cv = ld[col["epsilon"].get<double>()];
            for (const auto& c : col["cells"]) {
                cv.n.push_back(c["n"].get<double>());
                cv.p.push_back(c["p_hat"].get<double>());
                cv.lo.push_back(c["ci_low"].get<double>());
                cv.hi.push_back(c["ci_high"].get<double>());
            }
        }
    }
    const bool has_decay = results.contains("decay") && !results["decay"]["curve"]["n"].empty();
    if (!has_decay && ld.empty()) {
        out.warnings.push_back("plots: manifest holds no curves; nothing written");
        return out;
    }
    fs::create_directories(out_dir);

    if (has_decay) {
        const auto& d = results["decay"];
        const bool noise = d.value("noise_floor", false);
        const double theta = d["fit"].is_null() ? 1.0 : d["fit"]["theta"].get<double>();
        Series pts{"log a_n", "#1f77b4"};
        std::ostringstream csv;
        csv.precision(17);
        csv << "n,n_pow_theta,a_n,log_a_n\n";
        const auto& ns = d["curve"]["n"];
        const auto& as = d["curve"]["a"];
        for (std::size_t i = 0; i < ns.size(); ++i) {
            const double n = ns[i].get<double>(), a = as[i].get<double>();
            const double x = std::pow(n, theta);
            const double y = a > 0.0 ? std::log(a) : std::numeric_limits<double>::quiet_NaN();
            csv << ns[i].get<std::size_t>() << ',' << x << ',' << a << ',' << y << '\n';
            pts.x.push_back(x);
            pts.y.push_back(y);
        }
        std::vector<Series> series{pts};
        if (!d["fit"].is_null()) {
            const double C = d["fit"]["C"].get<double>(), tau = d["fit"]["tau"].get<double>();
            Series line{"fit log C - tau n^theta", "#d62728"};
            line.line = true;
            for (double x : pts.x) {
                line.x.push_back(x);
                line.y.push_back(std::log(C) - tau * x);
            }
            series.push_back(line);
        }
        const fs::path c = out_dir / "decay_curve.csv";
        const fs::path s = out_dir / "decay_curve.svg";
        write_text(c, csv.str());
        write_text(s, render_svg(d.value("map", json::object()).value("id", "decay") +
                                     (noise ? " (noise floor)" : ""),
                                 noise ? "n" : "n^theta_hat (theta_hat = " + num(theta) + ")",
                                 "log a_n", series));
        out.files.push_back(c);
        out.files.push_back(s);
    }

    for (const auto& [eps, cv] : ld) {
        std::ostringstream csv;
        csv.precision(17);
        csv << "n,p_hat,ci_low,ci_high" << (ld_bound ? ",theorem_bound" : "") << '\n';
        Series pts{"p_hat (95% Wilson)", "#1f77b4"};
        Series bound{"theorem bound", "#d62728"};
        bound.line = true;
        for (std::size_t i = 0; i < cv.n.size(); ++i) {
            csv << cv.n[i] << ',' << cv.p[i] << ',' << cv.lo[i] << ',' << cv.hi[i];
            if (ld_bound) csv << ',' << cv.bound[i];
            csv << '\n';
            pts.x.push_back(cv.n[i]);
            pts.y.push_back(log10_or_nan(cv.p[i]));
            pts.lo.push_back(log10_or_nan(cv.lo[i]));
            pts.hi.push_back(log10_or_nan(cv.hi[i]));
            if (ld_bound) {
                bound.x.push_back(cv.n[i]);
                bound.y.push_back(log10_or_nan(cv.bound[i]));
            }
        }
        std::vector<Series> series{pts};
        if (ld_bound) series.push_back(bound);
        const std::string tag = "ld_eps_" + eps_tag(eps);
        const fs::path c = out_dir / (tag + ".csv");
        const fs::path s = out_dir / (tag + ".svg");
        write_text(c, csv.str());
        write_text(s, render_svg("large deviations, epsilon = " + eps_tag(eps), "n",
                                 "log10 probability", series));
        out.files.push_back(c);
        out.files.push_back(s);
    }
    return out;
}

PlotOutput emit_plots(const fs::path& run_dir) {
    const fs::path mpath = run_dir / "manifest.json";
    std::ifstream in(mpath);
    if (!in) throw Error("plots: no manifest.json in " + run_dir.string());
    json manifest = json::parse(in);
    in.close();
    auto out = emit_plots(manifest, run_dir / "plots");
    if (out.files.empty()) return out;
    json plots = json::array();
    for (const auto& f : out.files) {
        plots.push_back({{"path", fs::relative(f, run_dir).generic_string()}, {"sha256", sha256_file(f)}});
    }
    manifest["plots"] = plots;
    std::ofstream os(mpath);
    os << manifest.dump(2) << '\n';
    return out;
}

}  // namespace ldlab::cli
