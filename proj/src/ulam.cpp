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

#include "ldlab/ulam.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <ostream>
#include <sstream>

#include <Eigen/Core>

#include "ldlab/errors.hpp"
#include "ldlab/kernels.hpp"
#include "ldlab/numeric.hpp"

namespace ldlab::ulam {

namespace {

using Vec = Eigen::VectorXd;

Eigen::Map<const Vec> view(const GridFunction& f) {
    return {f.data(), static_cast<Eigen::Index>(f.size())};
}

GridFunction to_grid(const Vec& v) { return {v.data(), v.data() + v.size()}; }

void require_size(const UlamOperator& op, const GridFunction& f, const char* what) {
    if (f.size() != op.bins()) {
        throw DomainError(std::string(what) + ": grid function has " + std::to_string(f.size()) +
                          " entries, operator has " + std::to_string(op.bins()) + " bins");
    }
}

}  // namespace

UlamOperator::UlamOperator(maps::MapSystem map, SparseMatrix matrix)
    : map_(std::move(map)), matrix_(std::move(matrix)),
      bins_(static_cast<std::size_t>(matrix_.rows())) {
    solve_density(1e-12, 100000);
    for (std::size_t i = 0; i < bins_; ++i) {
        if (masked(i)) masked_.push_back(i);
    }
}

std::size_t UlamOperator::bin_of(double x) const {
    const auto i = static_cast<std::size_t>(std::max(0.0, std::floor(x * static_cast<double>(bins_))));
    return std::min(i, bins_ - 1);
}

GridFunction UlamOperator::transfer_lebesgue(const GridFunction& f) const {
    require_size(*this, f, "transfer_lebesgue");
    return to_grid(matrix_.transpose() * view(f));
}

GridFunction UlamOperator::compose(const GridFunction& g) const {
    require_size(*this, g, "compose");
    return to_grid(matrix_ * view(g));
}

GridFunction UlamOperator::compose_lookup(const GridFunction& g) const {
    require_size(*this, g, "compose_lookup");
    GridFunction out(bins_);
    for (std::size_t i = 0; i < bins_; ++i) {
        out[i] = g[bin_of(map_.apply({bin_center(i), 0.0}).x)];
    }
    return out;
}

void UlamOperator::solve_density(double tol, std::size_t max_iter) {
    const double kd = static_cast<double>(bins_);
    Vec h = Vec::Ones(static_cast<Eigen::Index>(bins_));
    power_ = {};
    for (std::size_t it = 1; it <= max_iter; ++it) {
        Vec next = matrix_.transpose() * h;
        next *= kd / next.sum();
        const double diff = (next - h).cwiseAbs().sum() / kd;
        h.swap(next);
        power_.iterations = it;
        power_.residual = diff;
        if (diff <= tol) {
            power_.converged = true;
            break;
        }
    }
    density_ = to_grid(h.cwiseMax(0.0));
}

UlamOperator build_ulam(const maps::MapSystem& map, std::size_t k, int workers) {
    if (!map.is_one_dimensional()) {
        throw UnsupportedError("build_ulam: " + map.id() +
                               " is two-dimensional; Ulam discretisation supports 1D maps only");
    }
    if (k < 16 || !std::has_single_bit(k)) {
        throw DomainError("build_ulam: bin count " + std::to_string(k) +
                          " must be a power of two >= 16");
    }
    const auto rows = kernels::ulam_rows_omp(map, k, workers);
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(rows.val.size());
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t p = rows.row_ptr[i]; p < rows.row_ptr[i + 1]; ++p) {
            triplets.emplace_back(static_cast<int>(i), rows.col[p], rows.val[p]);
        }
    }
    SparseMatrix P(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k));
    P.setFromTriplets(triplets.begin(), triplets.end());
    P.makeCompressed();
    return UlamOperator(map, std::move(P));
}

GridFunction discretize(const maps::Observable& obs, std::size_t k) {
    GridFunction f(k);
    const double w = 1.0 / static_cast<double>(k);
    for (std::size_t i = 0; i < k; ++i) {
        const double a = static_cast<double>(i) * w;
        f[i] = gauss_average([&](double x) { return obs({x, 0.0}); }, a, a + w);
    }
    return f;
}

double mu_mean(const UlamOperator& op, const GridFunction& f) {
    require_size(op, f, "mu_mean");
    const auto& h = op.density();
    NeumaierSum acc;
    for (std::size_t i = 0; i < f.size(); ++i) {
        if (!op.masked(i)) acc.add(h[i] * f[i]);
    }
    return acc.value() / static_cast<double>(op.bins());
}

double lq_mu(const UlamOperator& op, const GridFunction& f, double q) {
    require_size(op, f, "lq_mu");
    if (!(q > 0.0)) throw DomainError("lq_mu: q must be > 0");
    const auto& h = op.density();
    // Scale by the sup so high powers neither overflow nor underflow.
    const double scale = sup_norm(f);
    if (scale == 0.0) return 0.0;
    NeumaierSum acc;
    for (std::size_t i = 0; i < f.size(); ++i) {
        if (op.masked(i)) continue;
        const double r = std::abs(f[i]) / scale;
        acc.add(h[i] * (q == 1.0 ? r : std::pow(r, q)));
    }
    const double mean = acc.value() / static_cast<double>(op.bins());
    return scale * (q == 1.0 ? mean : std::pow(mean, 1.0 / q));
}

double sup_norm(const GridFunction& f) {
    double m = 0.0;
    for (double v : f) m = std::max(m, std::abs(v));
    return m;
}

GridFunction transfer_apply_mu(const UlamOperator& op, const GridFunction& f, std::size_t n) {
    require_size(op, f, "transfer_apply_mu");
    const auto& h = op.density();
    std::vector<std::size_t> bad;
    for (std::size_t i : op.masked_bins()) {
        if (f[i] != 0.0) bad.push_back(i);
    }
    if (!bad.empty()) {
        std::ostringstream os;
        os << "transfer_apply_mu: input is non-zero on zero-density bins:";
        for (std::size_t i = 0; i < std::min<std::size_t>(bad.size(), 20); ++i) os << ' ' << bad[i];
        if (bad.size() > 20) os << " ... (" << bad.size() << " total)";
        throw ConditioningError(os.str());
    }

    const Eigen::Map<const Vec> hv = view(h);
    Vec cur = view(f);
    for (std::size_t step = 0; step < n; ++step) {
        Vec pushed = op.matrix().transpose() * hv.cwiseProduct(cur);
        for (Eigen::Index j = 0; j < pushed.size(); ++j) {
            pushed[j] = op.masked(static_cast<std::size_t>(j)) ? 0.0 : pushed[j] / hv[j];
        }
        cur.swap(pushed);
    }
    return to_grid(cur);
}

DecayCurve decay_curve(const UlamOperator& op, const maps::Observable& obs, std::size_t n_max) {
    if (n_max < 4) throw DomainError("decay_curve: n_max must be >= 4");
    if (obs.is_zero()) {
        throw DomainError("decay_curve: the zero observable has no correlation curve");
    }
    GridFunction f = discretize(obs, op.bins());
    const double fsup = sup_norm(f);
    if (fsup == 0.0) throw DomainError("decay_curve: observable vanishes on the grid");

    DecayCurve curve;
    curve.bins = op.bins();
    curve.map_id = op.map_id();
    curve.obs_id = obs.id();
    curve.residual_mean = mu_mean(op, f);
    if (std::abs(curve.residual_mean) > 1e-2 * fsup) {
        throw DomainError("decay_curve: observable is not centred (grid mean " +
                          std::to_string(curve.residual_mean) + ")");
    }
    for (std::size_t i = 0; i < f.size(); ++i) {
        f[i] = op.masked(i) ? 0.0 : f[i] - curve.residual_mean;
    }
    curve.initial_norm = l1_mu(op, f);
    if (curve.initial_norm == 0.0) {
        throw DomainError("decay_curve: centred observable vanishes in L1(mu)");
    }

    for (std::size_t n = 1; n <= n_max; ++n) {
        f = transfer_apply_mu(op, f, 1);
        const double a = l1_mu(op, f);
        if (!(a >= 1e-300)) {
            curve.truncated = true;
            break;
        }
        curve.points.push_back({n, a});
    }
    curve.noise_floor =
        curve.points.empty() || curve.points.front().a <= 1e-12 * curve.initial_norm;
    return curve;
}

double correlation(const UlamOperator& op, const maps::Observable& phi, const GridFunction& psi,
                   std::size_t n) {
    require_size(op, psi, "correlation");
    GridFunction f = discretize(phi, op.bins());
    const double phi_norm = sup_norm(f);
    const double psi_norm = sup_norm(psi);
    if (phi_norm == 0.0 || psi_norm == 0.0) {
        throw DomainError("correlation: requires non-zero functions");
    }
    const double mean = mu_mean(op, f);
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = op.masked(i) ? 0.0 : f[i] - mean;
    f = transfer_apply_mu(op, f, n);

    // Covariance is shift invariant in psi; shifting by psi_0 makes constants exact zeros.
    const double shift = psi.front();
    const auto& h = op.density();
    NeumaierSum acc;
    for (std::size_t i = 0; i < f.size(); ++i) {
        if (!op.masked(i)) acc.add(h[i] * f[i] * (psi[i] - shift));
    }
    const double cov = acc.value() / static_cast<double>(op.bins());
    return std::abs(cov) / (phi_norm * psi_norm);
}

InvariantReport check_invariants(const UlamOperator& op) {
    InvariantReport rep;
    const auto& P = op.matrix();
    for (Eigen::Index i = 0; i < P.outerSize(); ++i) {
        double s = 0.0;
        for (SparseMatrix::InnerIterator it(P, i); it; ++it) s += it.value();
        rep.max_row_sum_error = std::max(rep.max_row_sum_error, std::abs(s - 1.0));
    }
    const auto& h = op.density();
    rep.min_density = *std::min_element(h.begin(), h.end());
    rep.density_integral_error = std::abs(ordered_sum(h) / static_cast<double>(op.bins()) - 1.0);
    const auto hp = op.transfer_lebesgue(h);
    double r = 0.0;
    for (std::size_t i = 0; i < h.size(); ++i) r += std::abs(hp[i] - h[i]);
    rep.fixed_point_residual = r / static_cast<double>(op.bins());
    return rep;
}

double total_variation(const GridFunction& h1, const GridFunction& h2) {
    if (h1.size() != h2.size()) throw DomainError("total_variation: size mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < h1.size(); ++i) acc += std::abs(h1[i] - h2[i]);
    return 0.5 * acc / static_cast<double>(h1.size());
}

void write_decay_csv(std::ostream& os, const DecayCurve& curve) {
    const char* sem =
        curve.semantics == CurveSemantics::OperatorL1Norm ? "operator-l1-norm" : "correlation";
    os << "n,a_n,semantics,k,map_id\n";
    os.precision(17);
    for (const auto& p : curve.points) {
        os << p.n << ',' << p.a << ',' << sem << ',' << curve.bins << ",\"" << curve.map_id
           << "\"\n";
    }
}

void write_matrix_triples(std::ostream& os, const UlamOperator& op) {
    os.precision(17);
    const auto& P = op.matrix();
    for (Eigen::Index i = 0; i < P.outerSize(); ++i) {
        for (SparseMatrix::InnerIterator it(P, i); it; ++it) {
            os << it.row() << ' ' << it.col() << ' ' << it.value() << '\n';
        }
    }
}

}  // namespace ldlab::ulam
