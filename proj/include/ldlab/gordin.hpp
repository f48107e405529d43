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

// Martingale-coboundary decomposition on the Ulam grid.
//
//   chi_N   = sum_{n=1}^{N} L_mu^n phi_bar
//   phi_hat = phi_bar + chi_N - chi_N o T
//
// so that L_mu phi_hat = L_mu^{N+1} phi_bar up to discretisation: phi_hat is a
// reverse martingale difference once N reaches the envelope's tail. chi o T is
// read by bin lookup (ulam::UlamOperator::compose_lookup), and the same lookup
// defines the grid dynamics under which the telescoping identity is exact.

#include <cstddef>
#include <iosfwd>

#include "ldlab/ulam.hpp"

namespace ldlab::gordin {

/// Fitted decay envelope C exp(-tau n^theta).
struct Envelope {
    double C = 1.0;
    double tau = 1.0;
    double theta = 1.0;
};

struct GordinDecomposition {
    ulam::GridFunction phi_bar;
    ulam::GridFunction chi;
    ulam::GridFunction phi_hat;
    std::size_t truncation_N = 0;
    double tail_bound = 0.0;
    Envelope envelope;
};

/// Smallest N with envelope tail below `target`, capped at `cap`.
std::size_t auto_truncation(const Envelope& env, double target = 1e-6, std::size_t cap = 1000);

/// Throws DomainError for tau <= 0 or theta <= 0, N = 0, or an uncentred
/// observable (grid mean above 1e-2 sup-norm).
GordinDecomposition decompose(const ulam::UlamOperator& op, const maps::Observable& obs,
                              std::size_t N, const Envelope& envelope);

/// Grid L^q(mu) norm of chi (q >= 1).
double chi_norm(const GordinDecomposition& dec, double q, const ulam::UlamOperator& op);

/// ||L_mu phi_hat||_{L1(mu)}.
double martingale_residual(const GordinDecomposition& dec, const ulam::UlamOperator& op);

struct GordinReport {
    std::size_t N = 0;
    double tail_bound = 0.0;
    double chi_norms[4] = {};  // q = 1, 2, 4, 8
    double residual = 0.0;
    double allowance = 0.0;  // tail_bound + 10 / k
    bool passed = false;
};

GordinReport summarize(const GordinDecomposition& dec, const ulam::UlamOperator& op);
void write_report(std::ostream& os, const GordinReport& rep);
/// Columns: bin,center,phi_bar,chi,phi_hat
void write_grid_csv(std::ostream& os, const GordinDecomposition& dec, const ulam::UlamOperator& op);

}  // namespace ldlab::gordin
