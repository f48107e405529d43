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

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <sstream>

#include "ldlab/errors.hpp"
#include "ldlab/fit.hpp"
#include "ldlab/gordin.hpp"
#include "ldlab/maps.hpp"
#include "ldlab/rng.hpp"
#include "ldlab/theory.hpp"
#include "ldlab/ulam.hpp"

using namespace ldlab;
using maps::MapSystem;
using maps::Observable;

namespace {

struct Setup {
    ulam::UlamOperator op;
    Observable obs;
    ulam::DecayCurve curve;
    gordin::Envelope env;
};

Setup intermittent_bump(std::size_t k) {
    const auto map = MapSystem::intermittent(0.5);
    auto op = ulam::build_ulam(map, k);
    auto obs = maps::center(map, Observable::bump(), maps::CenterMethod::UlamDensity, 4096).obs;
    auto curve = ulam::decay_curve(op, obs, 200);
    const auto f = fit::fit_stretched(curve);
    double C = curve.initial_norm;
    for (const auto& p : curve.points) {
        C = std::max(C, p.a * std::exp(f.tau * std::pow(static_cast<double>(p.n), f.theta)));
    }
    return {std::move(op), std::move(obs), std::move(curve), {C, f.tau, f.theta}};
}

}  // namespace

TEST_CASE("automatic truncation") {
    const gordin::Envelope env{1.0, 0.5, 1.0};
    const auto N = gordin::auto_truncation(env);
    CHECK(theory::envelope_tail(1.0, 0.5, 1.0, N) < 1e-6);
    CHECK(theory::envelope_tail(1.0, 0.5, 1.0, N - 1) >= 1e-6);
    CHECK(gordin::auto_truncation({1.0, 1e-4, 0.1}) == 1000);
}

TEST_CASE("doubling cosine: chi vanishes") {
    const auto op = ulam::build_ulam(MapSystem::doubling(), 1024);
    const auto dec = gordin::decompose(op, Observable::cosine(), 20, {1.0, 1.0, 1.0});
    CHECK(gordin::chi_norm(dec, 1.0, op) < 1e-8);
    CHECK(dec.truncation_N == 20);
}

TEST_CASE("zero observable gives zero decomposition") {
    auto zero = Observable::constant(3.0);
    zero.offset = 3.0;
    for (const auto& map : {MapSystem::doubling(), MapSystem::intermittent(0.5)}) {
        const auto op = ulam::build_ulam(map, 256);
        const auto dec = gordin::decompose(op, zero, 10, {1.0, 1.0, 1.0});
        for (double q : {1.0, 2.0, 8.0}) CHECK(gordin::chi_norm(dec, q, op) == 0.0);
        CHECK(ulam::sup_norm(dec.phi_hat) == 0.0);
    }
}

TEST_CASE("decompose rejects bad inputs") {
    const auto op = ulam::build_ulam(MapSystem::doubling(), 64);
    CHECK_THROWS_AS(gordin::decompose(op, Observable::cosine(), 5, {1.0, 0.0, 1.0}), DomainError);
    CHECK_THROWS_AS(gordin::decompose(op, Observable::cosine(), 5, {1.0, 1.0, 0.0}), DomainError);
    CHECK_THROWS_AS(gordin::decompose(op, Observable::cosine(), 0, {1.0, 1.0, 1.0}), DomainError);
    CHECK_THROWS_AS(gordin::decompose(op, Observable::bump(), 5, {1.0, 1.0, 1.0}), DomainError);
    const auto dec = gordin::decompose(op, Observable::cosine(), 5, {1.0, 1.0, 1.0});
    CHECK_THROWS_AS(gordin::chi_norm(dec, 0.5, op), DomainError);
}

TEST_CASE("intermittent bump: martingale residual within the allowance") {
    const std::size_t k = 1024;
    const auto s = intermittent_bump(k);
    const auto N = gordin::auto_truncation(s.env);
    const auto dec = gordin::decompose(s.op, s.obs, N, s.env);
    CHECK(dec.tail_bound < 1e-6);
    const double residual = gordin::martingale_residual(dec, s.op);
    MESSAGE("N = " << N << ", residual " << residual);
    CHECK(residual < 1e-6 + 10.0 / static_cast<double>(k));

    // Triangle inequality against the measured curve.
    double partial = 0.0;
    for (const auto& p : s.curve.points) {
        if (p.n <= N) partial += p.a;
    }
    CHECK(gordin::chi_norm(dec, 1.0, s.op) <= partial * (1.0 + 1e-12));

    double prev = 0.0;
    for (double q : {1.0, 2.0, 4.0, 8.0}) {
        const double v = gordin::chi_norm(dec, q, s.op);
        CHECK(v >= prev);
        prev = v;
    }

    const auto rep = gordin::summarize(dec, s.op);
    CHECK(rep.passed);
    CHECK(rep.residual == residual);
    CHECK(rep.allowance == doctest::Approx(dec.tail_bound + 10.0 / k));
    std::ostringstream os;
    gordin::write_report(os, rep);
    CHECK(os.str().find("chi_norm q=8") != std::string::npos);
    CHECK(os.str().find("status = pass") != std::string::npos);
    std::ostringstream csv;
    gordin::write_grid_csv(csv, dec, s.op);
    const std::string text = csv.str();
    CHECK(text.rfind("bin,center,phi_bar,chi,phi_hat\n", 0) == 0);
    CHECK(std::count(text.begin(), text.end(), '\n') == static_cast<long>(k + 1));
}

TEST_CASE("residual does not grow with the truncation") {
    const auto s = intermittent_bump(512);
    double prev = INFINITY;
    for (std::size_t N : {1u, 2u, 4u, 8u, 16u, 32u, 64u, 128u}) {
        const double r = gordin::martingale_residual(gordin::decompose(s.op, s.obs, N, s.env), s.op);
        CHECK(r <= prev * (1.0 + 1e-9));
        prev = r;
    }
}

TEST_CASE("telescoping identity on bin dynamics") {
    const auto s = intermittent_bump(512);
    const auto dec = gordin::decompose(s.op, s.obs, 50, s.env);
    const auto& map = s.op.map();
    SampleStream rng(5, 0);
    for (int trial = 0; trial < 40; ++trial) {
        const std::size_t i0 = rng.next_u64() % s.op.bins();
        for (std::size_t n = 1; n <= 10; ++n) {
            double birkhoff = 0.0;
            double hat = 0.0;
            std::size_t i = i0;
            for (std::size_t j = 0; j < n; ++j) {
                birkhoff += dec.phi_bar[i];
                hat += dec.phi_hat[i];
                i = s.op.bin_of(map.apply({s.op.bin_center(i), 0.0}).x);
            }
            CHECK(hat == doctest::Approx(birkhoff + dec.chi[i0] - dec.chi[i]).epsilon(1e-12).scale(1.0));
        }
    }
}

TEST_CASE("doubling bump: L2 norm of chi matches an independent dense computation") {
    const std::size_t k = 256;
    const std::size_t N = 20;
    const auto op = ulam::build_ulam(MapSystem::doubling(), k);
    const auto obs = maps::center(MapSystem::doubling(), Observable::bump(),
                                  maps::CenterMethod::UlamDensity, 4096).obs;
    const auto dec = gordin::decompose(op, obs, N, {1.0, 1.0, 1.0});

    const Eigen::MatrixXd P = Eigen::MatrixXd(op.matrix());
    Eigen::VectorXd h(k);
    Eigen::VectorXd f(k);
    for (std::size_t i = 0; i < k; ++i) {
        h[i] = op.density()[i];
        f[i] = dec.phi_bar[i];
    }
    Eigen::VectorXd chi = Eigen::VectorXd::Zero(k);
    Eigen::VectorXd term = f;
    for (std::size_t n = 0; n < N; ++n) {
        term = (P.transpose() * h.cwiseProduct(term)).cwiseQuotient(h);
        chi += term;
    }
    double integral = 0.0;
    for (std::size_t i = 0; i < k; ++i) integral += chi[i] * chi[i] * h[i] / static_cast<double>(k);
    const double oracle = std::sqrt(integral);
    MESSAGE("||chi||_2 = " << oracle);
    CHECK(gordin::chi_norm(dec, 2.0, op) == doctest::Approx(oracle).epsilon(1e-10));
}
