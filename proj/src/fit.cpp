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

#include "ldlab/fit.hpp"

#include <algorithm>
#include <cmath>

#include "ldlab/errors.hpp"

namespace ldlab::fit {

namespace {

constexpr std::size_t kMinPoints = 8;

struct Prepared {
    std::vector<double> n;
    std::vector<double> y;  // log(a / a_ref)
    double a_ref = 1.0;
};

Prepared prepare(std::span<const double> n, std::span<const double> a) {
    if (n.size() != a.size()) throw DegenerateCurveError("fit: n and a differ in length");
    if (a.size() < kMinPoints) {
        throw DegenerateCurveError("fit: need at least 8 points, got " + std::to_string(a.size()));
    }
    double lo = a.front();
    double hi = a.front();
    for (double v : a) {
        if (!(v > 0.0)) throw DegenerateCurveError("fit: non-positive value in window");
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    if ((hi - lo) / hi < 1e-12) throw DegenerateCurveError("fit: degenerate curve (flat)");

    // Normalising by the largest value keeps power-of-two rescalings exact.
    Prepared p;
    p.a_ref = hi;
    p.n.assign(n.begin(), n.end());
    p.y.reserve(a.size());
    for (double v : a) p.y.push_back(std::log(v / hi));
    return p;
}

LinearFit linear_fit(const Prepared& p, double theta) {
    const std::size_t m = p.n.size();
    std::vector<double> x(m);
    double xbar = 0.0;
    double ybar = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        x[i] = std::pow(p.n[i], theta);
        xbar += x[i];
        ybar += p.y[i];
    }
    xbar /= static_cast<double>(m);
    ybar /= static_cast<double>(m);
    double sxx = 0.0;
    double sxy = 0.0;
    double syy = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        const double dx = x[i] - xbar;
        const double dy = p.y[i] - ybar;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    LinearFit f;
    const double slope = sxx > 0.0 ? sxy / sxx : 0.0;
    f.tau = -slope;
    f.log_c = ybar - slope * xbar;
    for (std::size_t i = 0; i < m; ++i) {
        const double r = p.y[i] - ybar - slope * (x[i] - xbar);
        f.sse += r * r;
    }
    f.r_squared = syy > 0.0 ? std::max(0.0, 1.0 - f.sse / syy) : 0.0;
    return f;
}

}  // namespace

double StretchedExpFit::operator()(double n) const { return C * std::exp(-tau * std::pow(n, theta)); }

std::vector<double> theta_grid() {
    std::vector<double> g;
    for (int j = 1; j <= 20; ++j) g.push_back(0.05 * j);
    return g;
}

StretchedExpFit fit_points(std::span<const double> n, std::span<const double> a,
                           const FitOptions& opts) {
    const Prepared p = prepare(n, a);
    const auto grid = theta_grid();

    std::vector<LinearFit> profile;
    profile.reserve(grid.size());
    std::size_t best = 0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        profile.push_back(linear_fit(p, grid[i]));
        if (profile[i].sse < profile[best].sse) best = i;
    }

    // Golden-section minimisation of the SSE around the best grid point.
    double lo = std::max(1e-3, grid[best] - 0.05);
    double hi = std::min(1.0, grid[best] + 0.05);
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = hi - inv_phi * (hi - lo);
    double x2 = lo + inv_phi * (hi - lo);
    double f1 = linear_fit(p, x1).sse;
    double f2 = linear_fit(p, x2).sse;
    while (hi - lo > opts.theta_tol) {
        if (f1 <= f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = linear_fit(p, x1).sse;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = linear_fit(p, x2).sse;
        }
    }
    double theta = 0.5 * (lo + hi);
    LinearFit lf = linear_fit(p, theta);
    if (!(lf.sse < profile[best].sse)) {
        theta = grid[best];
        lf = profile[best];
    }
    if (!(lf.tau > 0.0)) throw DegenerateCurveError("fit: curve does not decay (tau <= 0)");

    StretchedExpFit out;
    out.theta = theta;
    out.tau = lf.tau;
    out.C = p.a_ref * std::exp(lf.log_c);
    out.r_squared = lf.r_squared;
    out.points = p.n.size();
    out.theta_ci_lo = theta;
    out.theta_ci_hi = theta;
    const double floor = lf.r_squared - opts.profile_band * std::abs(lf.r_squared);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (profile[i].r_squared >= floor) {
            out.theta_ci_lo = std::min(out.theta_ci_lo, grid[i]);
            out.theta_ci_hi = std::max(out.theta_ci_hi, grid[i]);
        }
    }
    return out;
}

StretchedExpFit fit_stretched(const ulam::DecayCurve& curve, FitWindow window,
                              const FitOptions& opts) {
    std::vector<double> n;
    std::vector<double> a;
    for (const auto& pt : curve.points) {
        if (pt.n < window.n_min || pt.n > window.n_max) continue;
        n.push_back(static_cast<double>(pt.n));
        a.push_back(pt.a);
    }
    auto out = fit_points(n, a, opts);
    out.window = {static_cast<std::size_t>(n.front()), static_cast<std::size_t>(n.back())};
    return out;
}

std::optional<StretchedExpFit> fit_ld_exponent(std::span<const mc::LDEstimate> curve,
                                               FitWindow window, std::vector<std::string>* notes,
                                               const FitOptions& opts) {
    std::vector<double> n;
    std::vector<double> p;
    double eps = -1.0;
    for (const auto& est : curve) {
        if (est.n < window.n_min || est.n > window.n_max) continue;
        if (eps < 0.0) eps = est.epsilon;
        if (est.epsilon != eps) throw DomainError("fit_ld_exponent: epsilon varies along the curve");
        if (est.p_hat == 0.0) {
            if (notes) {
                notes->push_back("fit_ld_exponent: p_hat = 0 at n = " + std::to_string(est.n) +
                                 "; window shrunk to n < " + std::to_string(est.n));
            }
            break;
        }
        n.push_back(static_cast<double>(est.n));
        p.push_back(est.p_hat);
    }
    if (n.size() < kMinPoints) {
        if (notes) notes->push_back("fit_ld_exponent: fewer than 8 usable points");
        return std::nullopt;
    }
    auto out = fit_points(n, p, opts);
    out.window = {static_cast<std::size_t>(n.front()), static_cast<std::size_t>(n.back())};
    return out;
}

}  // namespace ldlab::fit
