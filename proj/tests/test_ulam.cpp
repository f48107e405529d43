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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "ldlab/errors.hpp"
#include "ldlab/fit.hpp"
#include "ldlab/kernels.hpp"
#include "ldlab/maps.hpp"
#include "ldlab/rng.hpp"
#include "ldlab/ulam.hpp"

using namespace ldlab;
using maps::MapSystem;
using maps::Observable;
using ulam::GridFunction;
using ulam::UlamOperator;

namespace {

ulam::SparseMatrix to_matrix(const kernels::SparseRows& rows, std::size_t k) {
    std::vector<Eigen::Triplet<double>> t;
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t p = rows.row_ptr[i]; p < rows.row_ptr[i + 1]; ++p) {
            t.emplace_back(static_cast<int>(i), rows.col[p], rows.val[p]);
        }
    }
    ulam::SparseMatrix P(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k));
    P.setFromTriplets(t.begin(), t.end());
    return P;
}

double inner_mu(const UlamOperator& op, const GridFunction& a, const GridFunction& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += op.density()[i] * a[i] * b[i];
    return s / static_cast<double>(op.bins());
}

GridFunction random_trig(std::size_t k, SampleStream& s) {
    GridFunction f(k);
    double c[4][2];
    for (auto& row : c) {
        row[0] = 2.0 * s.next_uniform() - 1.0;
        row[1] = 2.0 * s.next_uniform() - 1.0;
    }
    for (std::size_t i = 0; i < k; ++i) {
        const double x = (static_cast<double>(i) + 0.5) / static_cast<double>(k);
        double v = 0.0;
        for (int m = 0; m < 4; ++m) {
            v += c[m][0] * std::cos(2.0 * std::numbers::pi * (m + 1) * x) +
                 c[m][1] * std::sin(2.0 * std::numbers::pi * (m + 1) * x);
        }
        f[i] = v;
    }
    return f;
}

}  // namespace

TEST_CASE("doubling with four bins: two half-weight images, uniform density") {
    const auto dbl = MapSystem::doubling();
    const auto rows = kernels::ulam_rows_serial(dbl, 4);
    const UlamOperator op(dbl, to_matrix(rows, 4));
    const auto& P = op.matrix();
    for (int i = 0; i < 4; ++i) {
        CHECK(P.coeff(i, (2 * i) % 4) == 0.5);
        CHECK(P.coeff(i, (2 * i + 1) % 4) == 0.5);
        CHECK(P.row(i).nonZeros() == 2);
    }
    for (double h : op.density()) CHECK(h == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("build_ulam: doubling density is uniform, invariants hold") {
    const auto op = ulam::build_ulam(MapSystem::doubling(), 1024);
    double dev = 0.0;
    for (double h : op.density()) dev = std::max(dev, std::abs(h - 1.0));
    CHECK(dev <= 1e-9);
    for (double g : {1.0, 0.5, 0.25}) {
        const auto o = ulam::build_ulam(MapSystem::intermittent(g), 512);
        const auto rep = ulam::check_invariants(o);
        CHECK(rep.max_row_sum_error <= 1e-12);
        CHECK(rep.min_density >= 0.0);
        CHECK(rep.density_integral_error <= 1e-12);
        CHECK(o.power_report().converged);
        CHECK(rep.fixed_point_residual <= 1e-11);
    }
}

TEST_CASE("build_ulam rejects unsupported inputs") {
    CHECK_THROWS_AS(ulam::build_ulam(MapSystem::viana(), 64), UnsupportedError);
    CHECK_THROWS_AS(ulam::build_ulam(MapSystem::doubling(), 8), DomainError);
    CHECK_THROWS_AS(ulam::build_ulam(MapSystem::doubling(), 48), DomainError);
}

TEST_CASE("f_gamma density peaks at 0 and matches a 10^8-point orbit histogram") {
    const auto f = MapSystem::intermittent(0.5);
    const std::size_t k = 2048;
    const auto op = ulam::build_ulam(f, k);
    const auto& h = op.density();
    CHECK(std::max_element(h.begin(), h.end()) - h.begin() == 0);

    GridFunction hist(k, 0.0);
    maps::Point p{0.1234567};
    for (int i = 0; i < 10000; ++i) p = f.apply(p);
    const std::size_t n = 100000000;
    for (std::size_t i = 0; i < n; ++i) {
        p = f.apply(p);
        hist[op.bin_of(p.x)] += 1.0;
    }
    for (double& v : hist) v *= static_cast<double>(k) / static_cast<double>(n);
    const double tv = ulam::total_variation(h, hist);
    MESSAGE("TV(ulam, orbit histogram) = " << tv);
    CHECK(tv < 5e-2);

    const auto fine = ulam::build_ulam(f, 2 * k);
    GridFunction coarse(k);
    for (std::size_t i = 0; i < k; ++i) coarse[i] = 0.5 * (fine.density()[2 * i] + fine.density()[2 * i + 1]);
    MESSAGE("TV(k=2048, k=4096) = " << ulam::total_variation(h, coarse));
}

TEST_CASE("transfer_apply_mu: constants, cosine, mean preservation") {
    const auto dbl = ulam::build_ulam(MapSystem::doubling(), 1024);
    const auto fg = ulam::build_ulam(MapSystem::intermittent(0.5), 1024);
    for (const UlamOperator* op : {&dbl, &fg}) {
        const auto one = ulam::transfer_apply_mu(*op, GridFunction(op->bins(), 1.0), 7);
        for (double v : one) CHECK(v == doctest::Approx(1.0).epsilon(1e-10));
    }
    const auto c = ulam::discretize(Observable::cosine(), 1024);
    const auto lc = ulam::transfer_apply_mu(dbl, c, 1);
    CHECK(ulam::sup_norm(lc) <= 10.0 / (1024.0 * 1024.0));

    SampleStream s(5, 0);
    for (const UlamOperator* op : {&dbl, &fg}) {
        auto f = random_trig(op->bins(), s);
        const double m = ulam::mu_mean(*op, f);
        for (double& v : f) v -= m;
        const auto g = ulam::transfer_apply_mu(*op, f, 10);
        CHECK(std::abs(ulam::mu_mean(*op, g)) <= 1e-10);
    }
}

TEST_CASE("transfer_apply_mu reports masked bins") {
    // Every bin feeds bin 0 eventually; bins 1..3 receive no mass.
    ulam::SparseMatrix P(4, 4);
    P.insert(0, 0) = 1.0;
    P.insert(1, 0) = 1.0;
    P.insert(2, 1) = 1.0;
    P.insert(3, 2) = 1.0;
    const UlamOperator op(MapSystem::doubling(), P);
    CHECK(op.masked_bins().size() == 3);
    try {
        ulam::transfer_apply_mu(op, {0.0, 0.0, 1.0, 0.0}, 1);
        FAIL("expected ConditioningError");
    } catch (const ConditioningError& e) {
        CHECK(std::string(e.what()).find('2') != std::string::npos);
    }
    CHECK_NOTHROW(ulam::transfer_apply_mu(op, {1.0, 0.0, 0.0, 0.0}, 1));
}

TEST_CASE("decay_curve examples") {
    const auto dbl = MapSystem::doubling();
    const auto op = ulam::build_ulam(dbl, 2048);
    const auto cd = ulam::decay_curve(op, Observable::cosine(), 10);
    CHECK(cd.noise_floor);

    auto zero = Observable::constant(1.0);
    zero.offset = 1.0;
    CHECK_THROWS_AS(ulam::decay_curve(op, zero, 10), DomainError);
    CHECK_THROWS_AS(ulam::decay_curve(op, Observable::bump(), 10), DomainError);  // not centred

    const auto f = MapSystem::intermittent(0.5);
    const auto bump = maps::center(f, Observable::bump(), maps::CenterMethod::UlamDensity, 4096).obs;
    const auto fop = ulam::build_ulam(f, 2048);
    const auto curve = ulam::decay_curve(fop, bump, 200);
    REQUIRE(curve.points.size() == 200);
    CHECK_FALSE(curve.noise_floor);
    double prev = curve.initial_norm;
    for (const auto& p : curve.points) {
        REQUIRE(p.a > 0.0);
        REQUIRE(p.a <= prev * (1.0 + 1e-12));
        prev = p.a;
    }
    const auto fit = fit::fit_stretched(curve);
    const auto fine_fit = fit::fit_stretched(ulam::decay_curve(ulam::build_ulam(f, 4096), bump, 200));
    MESSAGE("theta_hat k=2048: " << fit.theta << " ci [" << fit.theta_ci_lo << ", " << fit.theta_ci_hi
                                 << "], k=4096: " << fine_fit.theta);
    CHECK(std::abs(fine_fit.theta - fit.theta) < 0.5 * fit.theta_ci_width());

    std::ostringstream os;
    ulam::write_decay_csv(os, curve);
    CHECK(os.str().rfind("n,a_n,semantics,k,map_id\n1,", 0) == 0);
}

TEST_CASE("correlation examples") {
    const auto op = ulam::build_ulam(MapSystem::doubling(), 1024);
    const auto cosine = Observable::cosine();
    CHECK(ulam::correlation(op, cosine, GridFunction(1024, 3.0), 0) == 0.0);
    CHECK(ulam::correlation(op, cosine, GridFunction(1024, 3.0), 5) == 0.0);
    const auto c = ulam::discretize(cosine, 1024);
    const double sup = ulam::sup_norm(c);
    CHECK(ulam::correlation(op, cosine, c, 0) == doctest::Approx(0.5 / (sup * sup)).epsilon(1e-5));
    SampleStream s(2, 0);
    const auto psi = random_trig(1024, s);
    CHECK(ulam::correlation(op, cosine, psi, 1) <= 10.0 / (1024.0 * 1024.0));
    CHECK_THROWS_AS(ulam::correlation(op, cosine, GridFunction(1024, 0.0), 1), DomainError);
}

TEST_CASE("L_mu is an L1(mu) contraction on random grid functions") {
    const auto op = ulam::build_ulam(MapSystem::intermittent(0.5), 512);
    SampleStream s(8, 0);
    for (int t = 0; t < 100; ++t) {
        GridFunction f(512);
        for (double& v : f) v = 2.0 * s.next_uniform() - 1.0;
        const auto g = ulam::transfer_apply_mu(op, f, 1);
        REQUIRE(ulam::l1_mu(op, g) <= ulam::l1_mu(op, f) * (1.0 + 1e-12));
    }
}

TEST_CASE("duality: exact against P, O(1/k) against bin lookup") {
    for (std::size_t k : {256u, 1024u}) {
        const auto op = ulam::build_ulam(MapSystem::intermittent(0.5), k);
        SampleStream s(13, k);
        for (int t = 0; t < 10; ++t) {
            const auto f = random_trig(k, s);
            const auto g = random_trig(k, s);
            const double lhs = inner_mu(op, ulam::transfer_apply_mu(op, f, 1), g);
            CHECK(lhs == doctest::Approx(inner_mu(op, f, op.compose(g))).epsilon(1e-11).scale(1.0));
            const double lookup = inner_mu(op, f, op.compose_lookup(g));
            CHECK(std::abs(lhs - lookup) <= 40.0 / static_cast<double>(k));
        }
    }
}
