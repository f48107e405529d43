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

#include "ldlab/theory.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/special_functions/gamma.hpp>

#include "ldlab/errors.hpp"

namespace ldlab::theory {

namespace {

void require_theta(double theta, const char* who) {
    if (!(theta > 0.0 && theta <= 1.0)) {
        throw DomainError(std::string(who) + ": theta must lie in (0,1]");
    }
}

// e theta' K^{2 theta'}
double series_a(double theta_prime, double K) {
    return std::numbers::e * theta_prime * std::pow(K, 2.0 * theta_prime);
}

}  // namespace

double predicted_exponent(double theta) {
    require_theta(theta, "predicted_exponent");
    return theta / (theta + 1.0);
}

double predicted_exponent_old(double theta) {
    require_theta(theta, "predicted_exponent_old");
    return theta / (theta + 2.0);
}

TheoremConstants make_constants(double theta, double tau, double C_phi, double sup_phi, double K) {
    require_theta(theta, "make_constants");
    if (!(tau > 0.0)) throw DomainError("make_constants: tau must be > 0");
    if (!(C_phi > 0.0)) throw DomainError("make_constants: C_phi must be > 0");
    if (!(K > 0.0)) throw DomainError("make_constants: K must be > 0");
    TheoremConstants k;
    k.theta = theta;
    k.tau = tau;
    k.C_phi = C_phi;
    k.sup_phi = sup_phi;
    k.C_tilde = std::max(C_phi, sup_phi);
    k.K = K;
    k.theta_prime = predicted_exponent(theta);
    const double a = series_a(k.theta_prime, K);
    const double b = std::pow(k.C_tilde, 2.0 * k.theta_prime);
    k.c = 1.0 / (4.0 * a);
    k.tau_prime = 1.0 / (4.0 * (a * b));
    return k;
}

double theorem_bound(std::size_t n, double epsilon, const TheoremConstants& k) {
    if (n < 1) throw DomainError("theorem_bound: n must be >= 1");
    if (!(epsilon > 0.0)) throw DomainError("theorem_bound: epsilon must be > 0");
    const double tp = k.theta_prime;
    return 2.0 * std::exp(-k.tau_prime * std::pow(epsilon, 2.0 * tp) *
                          std::pow(static_cast<double>(n), tp));
}

double chi_norm_bound(double C_tilde, double q, double tau, double theta) {
    if (!(q >= 1.0)) throw DomainError("chi_norm_bound: q must be >= 1");
    require_theta(theta, "chi_norm_bound");
    const double inv = 1.0 / theta;
    return C_tilde * std::pow(q, inv) * inv * std::pow(tau, -inv) * gamma_fn(inv);
}

double moment_bound(double K, double C_tilde, double q, double theta, std::size_t n) {
    if (!(q > 0.0)) throw DomainError("moment_bound: q must be > 0");
    if (n < 1) throw DomainError("moment_bound: n must be >= 1");
    require_theta(theta, "moment_bound");
    return K * C_tilde * std::pow(q, 0.5 * (1.0 + 1.0 / theta)) *
           std::sqrt(static_cast<double>(n));
}

double calibrate_K(const mc::MomentGrid& grid, double theta, double C_tilde, double safety,
                   double floor) {
    if (grid.empty()) {
        throw DependencyError("calibrate_K: empirical moments not computed (run moment_grid first)");
    }
    if (!(C_tilde > 0.0)) return floor;
    double worst = 0.0;
    for (std::size_t qi = 0; qi < grid.qs.size(); ++qi) {
        for (std::size_t ni = 0; ni < grid.ns.size(); ++ni) {
            const double unit = moment_bound(1.0, C_tilde, grid.qs[qi], theta, grid.ns[ni]);
            worst = std::max(worst, grid.at(qi, ni).value / unit);
        }
    }
    return std::max(floor, safety * worst);
}

double exp_series_ratio(double theta_prime, double K, double C_tilde, double tau_prime) {
    const double a = series_a(theta_prime, K);
    const double b = std::pow(C_tilde, 2.0 * theta_prime);
    return 2.0 * (a * b) * tau_prime;
}

double exp_series_bound(double theta_prime, double K, double C_tilde, double tau_prime) {
    const double r = exp_series_ratio(theta_prime, K, C_tilde, tau_prime);
    if (r >= 1.0 - 4.0 * std::numeric_limits<double>::epsilon()) {
        throw DivergentSeriesError("exp_series_bound: series ratio r = " + std::to_string(r) +
                                   " >= 1, tau' is mis-calibrated");
    }
    return 1.0 / (1.0 - r);
}

double gamma_fn(double x) {
    static constexpr std::array<double, 9> kCoef = {
        0.99999999999980993,  676.5203681218851,     -1259.1392167224028,
        771.32342877765313,   -176.61502916214059,   12.507343278686905,
        -0.13857109526572012, 9.9843695780195716e-6, 1.5056327351493116e-7};
    constexpr double kG = 7.0;
    if (x < 0.5) {
        return std::numbers::pi / (std::sin(std::numbers::pi * x) * gamma_fn(1.0 - x));
    }
    const double z = x - 1.0;
    double acc = kCoef[0];
    for (std::size_t i = 1; i < kCoef.size(); ++i) acc += kCoef[i] / (z + static_cast<double>(i));
    const double t = z + kG + 0.5;
    return std::sqrt(2.0 * std::numbers::pi) * std::pow(t, z + 0.5) * std::exp(-t) * acc;
}

double envelope_tail(double C, double tau, double theta, std::size_t N) {
    if (!(tau > 0.0) || !(theta > 0.0)) {
        throw DomainError("envelope_tail: tau and theta must be > 0");
    }
    const double inv = 1.0 / theta;
    const double lower = tau * std::pow(static_cast<double>(N), theta);
    return C * inv * std::pow(tau, -inv) * boost::math::tgamma(inv, lower);
}

}  // namespace ldlab::theory
