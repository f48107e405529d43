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

// Closed-form exponents, constants and bounds relating stretched-exponential
// decay of correlations to large deviations.
//
// Hypothesis:  |int phi (psi o T^n) dmu| <= C_phi ||psi||_inf exp(-tau n^theta)
// Conclusion:  mu(|phi_n| > n eps) <= 2 exp(-tau' eps^{2 theta'} n^{theta'})
//   theta' = theta / (theta + 1)
//   tau'   = c C~^{-2 theta'},   C~ = max(||phi||_inf, C_phi)
//   c      = (4 e theta' K^{2 theta'})^{-1}
// with K the moment constant of ||phi_n||_q <= K C~ q^{(1 + 1/theta)/2} sqrt(n).

#include <cstddef>

#include "ldlab/montecarlo.hpp"

namespace ldlab::theory {

/// theta / (theta + 1). Throws DomainError outside (0, 1].
double predicted_exponent(double theta);
/// theta / (theta + 2), the exponent of the earlier estimate.
double predicted_exponent_old(double theta);

struct TheoremConstants {
    double theta = 1.0;
    double tau = 1.0;
    double C_phi = 1.0;
    double sup_phi = 0.0;
    double C_tilde = 1.0;
    double K = 1.0;
    double c = 0.0;
    double theta_prime = 0.5;
    double tau_prime = 0.0;
};

/// Fills the derived fields. tau' is evaluated as 1 / (4 (a b)) with
/// a = e theta' K^{2 theta'} and b = C~^{2 theta'}, the same products
/// `exp_series_ratio` forms, so the series ratio at the calibrated tau' is
/// 1/2 to the last bit.
TheoremConstants make_constants(double theta, double tau, double C_phi, double sup_phi, double K);

/// 2 exp(-tau' eps^{2 theta'} n^{theta'}).
double theorem_bound(std::size_t n, double epsilon, const TheoremConstants& k);

/// C~ q^{1/theta} theta^{-1} tau^{-1/theta} Gamma(1/theta): the integral
/// comparison bound on ||chi||_q.
double chi_norm_bound(double C_tilde, double q, double tau, double theta);

/// K C~ q^{(1 + 1/theta)/2} sqrt(n).
double moment_bound(double K, double C_tilde, double q, double theta, std::size_t n);

/// Smallest K with moment_bound >= every measured moment on the grid, times
/// `safety`; never below `floor`. Throws DependencyError on an empty grid.
double calibrate_K(const mc::MomentGrid& grid, double theta, double C_tilde, double safety = 1.1,
                   double floor = 1e-6);

/// r = 2 e theta' K^{2 theta'} C~^{2 theta'} tau'.
double exp_series_ratio(double theta_prime, double K, double C_tilde, double tau_prime);
/// 1 / (1 - r). Throws DivergentSeriesError when r is 1 or more (to within
/// four rounding units, where r = 1 and r = 1 - ulp cannot be told apart).
double exp_series_bound(double theta_prime, double K, double C_tilde, double tau_prime);

/// Lanczos approximation (g = 7, nine terms), relative error below 1e-13 on
/// [0.5, 20]; reflection below 1/2.
double gamma_fn(double x);

/// Upper bound on sum_{n > N} C exp(-tau n^theta) by the integral from N:
/// C theta^{-1} tau^{-1/theta} Gamma(1/theta, tau N^theta).
double envelope_tail(double C, double tau, double theta, std::size_t N);

}  // namespace ldlab::theory
