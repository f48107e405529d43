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

// Ulam discretisation of the transfer operator on k equal bins of [0, 1].
//
// Convention. The stored matrix P is row-stochastic, "bin to image":
//   P_ij = m(I_i  cap  T^{-1} I_j) / m(I_i)    (m = Lebesgue).
// A grid function f holds one value per bin. Two views of the same matrix:
//   Lebesgue transfer (densities)   (L f)_j   = sum_i f_i P_ij       (row vector times P)
//   composition (observables)       (K g)_i   = sum_j P_ij g_j       (P times column vector)
// and <L f, g> = <f, K g> holds exactly on the grid. The invariant density h
// solves h = h P with sum_i h_i / k = 1, and the transfer operator of mu is
// the Lebesgue one conjugated by h:  L_mu f = L(h f) / h.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/SparseCore>

#include "ldlab/maps.hpp"

namespace ldlab::ulam {

using GridFunction = std::vector<double>;
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// Bins whose density falls below this are masked out of mu-norms.
inline constexpr double kDensityFloor = 1e-12;

struct PowerIterationReport {
    std::size_t iterations = 0;
    double residual = 0.0;  // last ||h_{t+1} - h_t||_1
    bool converged = false;
};

class UlamOperator {
public:
    UlamOperator(maps::MapSystem map, SparseMatrix matrix);

    std::size_t bins() const { return bins_; }
    double bin_width() const { return 1.0 / static_cast<double>(bins_); }
    double bin_center(std::size_t i) const { return (static_cast<double>(i) + 0.5) * bin_width(); }
    /// Index of the bin containing x (x = 1 belongs to the last bin).
    std::size_t bin_of(double x) const;

    const SparseMatrix& matrix() const { return matrix_; }
    const GridFunction& density() const { return density_; }
    const maps::MapSystem& map() const { return map_; }
    std::string map_id() const { return map_.id(); }
    const PowerIterationReport& power_report() const { return power_; }
    /// Bins with density below kDensityFloor.
    const std::vector<std::size_t>& masked_bins() const { return masked_; }
    bool masked(std::size_t i) const { return density_[i] < kDensityFloor; }

    /// Row vector times P (Lebesgue transfer of a density).
    GridFunction transfer_lebesgue(const GridFunction& f) const;
    /// P times column vector (grid composition operator).
    GridFunction compose(const GridFunction& g) const;
    /// g(T(center_i)) read from the bin containing the image of the bin centre.
    GridFunction compose_lookup(const GridFunction& g) const;

private:
    void solve_density(double tol, std::size_t max_iter);

    maps::MapSystem map_;
    SparseMatrix matrix_;
    std::size_t bins_;
    GridFunction density_;
    PowerIterationReport power_;
    std::vector<std::size_t> masked_;
};

/// Ulam operator for a one-dimensional map with k bins (k >= 16, a power of
/// two). Entries come from branch-inverse preimages; rows are built in
/// parallel (`workers` = 0 uses the OpenMP default).
UlamOperator build_ulam(const maps::MapSystem& map, std::size_t k, int workers = 0);

/// Bin averages of the observable (4-point Gauss rule per bin).
GridFunction discretize(const maps::Observable& obs, std::size_t k);

double mu_mean(const UlamOperator& op, const GridFunction& f);
/// (sum_i h_i |f_i|^q / k)^(1/q) over unmasked bins.
double lq_mu(const UlamOperator& op, const GridFunction& f, double q);
inline double l1_mu(const UlamOperator& op, const GridFunction& f) { return lq_mu(op, f, 1.0); }
double sup_norm(const GridFunction& f);

/// n-fold transfer operator of mu. Throws ConditioningError when f is
/// non-zero on a masked bin.
GridFunction transfer_apply_mu(const UlamOperator& op, const GridFunction& f, std::size_t n);

enum class CurveSemantics { OperatorL1Norm, Correlation };

struct DecayPoint {
    std::size_t n = 0;
    double a = 0.0;
};

struct DecayCurve {
    std::vector<DecayPoint> points;
    CurveSemantics semantics = CurveSemantics::OperatorL1Norm;
    std::size_t bins = 0;
    std::string map_id;
    std::string obs_id;
    double initial_norm = 0.0;   // ||phi_bar||_{L1(mu)} (the n = 0 value)
    double residual_mean = 0.0;  // grid mu-mean removed before iterating
    bool truncated = false;      // stopped at a value below 1e-300
    bool noise_floor = false;    // a_1 <= 1e-12 a_0: decays within one step
};

/// a_n = ||L_mu^n phi_bar||_{L1(mu)} for n = 1..n_max. The observable must
/// already be centred (grid mean within 1e-2 sup-norm); the remaining grid
/// mean is removed and recorded. Zero observables are rejected.
DecayCurve decay_curve(const UlamOperator& op, const maps::Observable& obs, std::size_t n_max);

/// Normalised correlation |int phi (psi o T^n) dmu - int phi dmu int psi dmu|
/// / (||phi||_inf ||psi||_inf) on the grid.
double correlation(const UlamOperator& op, const maps::Observable& phi, const GridFunction& psi,
                   std::size_t n);

struct InvariantReport {
    double max_row_sum_error = 0.0;
    double density_integral_error = 0.0;
    double min_density = 0.0;
    double fixed_point_residual = 0.0;  // ||h P - h||_1
};
InvariantReport check_invariants(const UlamOperator& op);

/// Total-variation distance (1/2) sum |p_i - q_i| / k between two densities on
/// the same grid.
double total_variation(const GridFunction& h1, const GridFunction& h2);

/// Columns: n,a_n,semantics,k,map_id
void write_decay_csv(std::ostream& os, const DecayCurve& curve);
/// One "row col weight" line per stored entry.
void write_matrix_triples(std::ostream& os, const UlamOperator& op);

}  // namespace ldlab::ulam
