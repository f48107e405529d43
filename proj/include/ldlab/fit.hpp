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

#pragma once

// Stretched-exponential fits a_n ~ C exp(-tau n^theta).
//
// Residuals live in log space: for each theta on the grid 0.05, 0.10, ..., 1.00
// the model log a_n = log C - tau n^theta is linear in (log C, tau) and is
// solved by ordinary least squares. The best grid theta is refined by
// golden-section search on the residual sum of squares. No joint nonlinear
// optimisation, so the result is deterministic and initialisation free.

#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ldlab/montecarlo.hpp"
#include "ldlab/ulam.hpp"

namespace ldlab::fit {

struct FitWindow {
    std::size_t n_min = 0;
    std::size_t n_max = std::numeric_limits<std::size_t>::max();
};

struct FitOptions {
    double theta_tol = 1e-3;     // golden-section bracket width
    double profile_band = 5e-3;  // relative r^2 drop admitted into theta_ci
};

struct StretchedExpFit {
    double C = 0.0;
    double tau = 0.0;
    double theta = 0.0;
    double r_squared = 0.0;
    double theta_ci_lo = 0.0;
    double theta_ci_hi = 0.0;
    FitWindow window;
    std::size_t points = 0;

    double theta_ci_width() const { return theta_ci_hi - theta_ci_lo; }
    double operator()(double n) const;
};

/// Least-squares line through (n^theta, log a_n) at a fixed theta; exposed
/// for the profile and for tests.
struct LinearFit {
    double log_c = 0.0;  // relative to the normalising value
    double tau = 0.0;
    double sse = 0.0;
    double r_squared = 0.0;
};

/// Core fit on raw (n, a) pairs. Throws DegenerateCurveError on fewer than
/// eight points, non-positive values, or a flat curve.
StretchedExpFit fit_points(std::span<const double> n, std::span<const double> a,
                           const FitOptions& opts = {});

StretchedExpFit fit_stretched(const ulam::DecayCurve& curve, FitWindow window = {},
                              const FitOptions& opts = {});

/// Empirical large-deviation exponent from p_hat(n) at fixed epsilon. A zero
/// estimate shrinks the window to the points before it (noted in `notes`);
/// returns nullopt when fewer than eight usable points remain.
std::optional<StretchedExpFit> fit_ld_exponent(std::span<const mc::LDEstimate> curve,
                                               FitWindow window = {},
                                               std::vector<std::string>* notes = nullptr,
                                               const FitOptions& opts = {});

/// The 20-point theta grid.
std::vector<double> theta_grid();

}  // namespace ldlab::fit
