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

#include <cmath>
#include <numbers>

#include <boost/math/tools/roots.hpp>
#include <boost/multiprecision/cpp_dec_float.hpp>

#include "ldlab/errors.hpp"
#include "ldlab/maps.hpp"
#include "ldlab/rng.hpp"

using namespace ldlab;
using maps::MapSystem;
using maps::Observable;
using maps::Point;

TEST_CASE("apply: closed-form values") {
    CHECK(MapSystem::doubling().apply({0.25}).x == 0.5);
    CHECK(MapSystem::intermittent(1.0).apply({0.75}).x == 0.5);
    for (double g : {0.1, 0.25, 0.5, 0.75, 1.0}) {
        CHECK(MapSystem::intermittent(g).apply({0.5}).x == 1.0);
        CHECK(MapSystem::intermittent(g).apply({0.0}).x == 0.0);
    }
}

TEST_CASE("apply: f_gamma(0.1) for gamma = 1/2 against a 50-digit evaluation") {
    using big = boost::multiprecision::cpp_dec_float_50;
    const big x("0.1000000000000000055511151231257827021181583404541015625");  // the double 0.1
    const big expected = x * (1 + log(big(2)) / abs(log(x)));
    const double got = MapSystem::intermittent(0.5).apply({0.1}).x;
    const double want = expected.convert_to<double>();
    CHECK(std::abs(got - want) <= 4.0 * std::numeric_limits<double>::epsilon() * want);
}

TEST_CASE("apply: tiny x returns x") {
    const auto f = MapSystem::intermittent(0.5);
    CHECK(f.apply({1e-310}).x == 1e-310);
    CHECK(f.apply({5e-301}).x == 5e-301);
}

TEST_CASE("apply and construction reject bad inputs") {
    CHECK_THROWS_AS(MapSystem::intermittent(1.5), DomainError);
    CHECK_THROWS_AS(MapSystem::intermittent(0.0), DomainError);
    CHECK_THROWS_AS(MapSystem::doubling().apply({1.5}), DomainError);
    CHECK_THROWS_AS(MapSystem::intermittent(0.5).apply({-0.1}), DomainError);
    CHECK_THROWS_AS(MapSystem::doubling().apply({std::nan("")}), DomainError);
}

TEST_CASE("orbit examples") {
    const auto dbl = MapSystem::doubling();
    for (const auto& p : maps::orbit(dbl, {0.0}, 5)) CHECK(p.x == 0.0);
    CHECK(maps::orbit(dbl, {0.0}, 5).size() == 6);
    for (const auto& p : maps::orbit(MapSystem::intermittent(0.5), {0.0}, 3)) CHECK(p.x == 0.0);
    const auto o = maps::orbit(dbl, {1.0 / 3.0}, 2);
    REQUIRE(o.size() == 3);
    CHECK(o[0].x == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    CHECK(o[1].x == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    CHECK(o[2].x == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("birkhoff_sum examples") {
    const auto dbl = MapSystem::doubling();
    CHECK(maps::birkhoff_sum(dbl, Observable::constant(0.0), {0.3}, 100) == 0.0);
    CHECK(maps::birkhoff_sum(MapSystem::intermittent(0.5), Observable::constant(0.0), {0.3}, 100) == 0.0);
    CHECK(maps::birkhoff_sum(dbl, Observable::cosine(), {1.0 / 3.0}, 2) == doctest::Approx(-1.0).epsilon(1e-14));

    // Loop oracle written independently: x -> frac(2x), sum cos(2 pi x).
    double x = 0.123, want = 0.0;
    for (int k = 0; k < 10; ++k) {
        want += std::cos(2.0 * std::numbers::pi * x);
        x = std::fmod(2.0 * x, 1.0);
    }
    CHECK(maps::birkhoff_sum(dbl, Observable::cosine(), {0.123}, 10) == doctest::Approx(want).epsilon(1e-13));
}

TEST_CASE("branch monotonicity on 10^4-point grids") {
    for (double g : {0.25, 0.5, 0.9}) {
        const auto f = MapSystem::intermittent(g);
        double prev = -1.0;
        for (int i = 1; i <= 10000; ++i) {
            const double y = f.apply({0.5 * i / 10000.0}).x;
            REQUIRE(y > prev);
            prev = y;
        }
        prev = -1.0;
        for (int i = 1; i <= 10000; ++i) {
            const double y = f.apply({0.5 + 0.5 * i / 10000.0}).x;
            REQUIRE(y > prev);
            prev = y;
        }
    }
}

TEST_CASE("f_1 equals the doubling map bit for bit") {
    const auto f1 = MapSystem::intermittent(1.0);
    const auto d = MapSystem::doubling();
    SampleStream s(9, 0);
    for (int i = 0; i < 100000; ++i) {
        const double x = s.next_uniform();
        REQUIRE(f1.apply({x}).x == d.apply({x}).x);
    }
    for (double x : {0.0, 0.5, 1.0, std::nextafter(0.5, 0.0), std::nextafter(0.5, 1.0), 1e-300, 1e-320}) {
        CHECK(f1.apply({x}).x == d.apply({x}).x);
    }
}

TEST_CASE("cocycle identity for Birkhoff sums") {
    const auto f = MapSystem::intermittent(0.5);
    const auto obs = Observable::bump();
    SampleStream s(3, 0);
    for (int t = 0; t < 200; ++t) {
        const double x = s.next_uniform();
        const auto n = static_cast<std::size_t>(1 + s.next_u64() % 500);
        const auto m = static_cast<std::size_t>(1 + s.next_u64() % 500);
        const Point tn = maps::orbit(f, {x}, n).back();
        const double lhs = maps::birkhoff_sum(f, obs, {x}, n + m);
        const double rhs = maps::birkhoff_sum(f, obs, {x}, n) + maps::birkhoff_sum(f, obs, tn, m);
        REQUIRE(std::abs(lhs - rhs) <= 1e-9 * std::max(1.0, std::abs(lhs)));
    }
}

TEST_CASE("misiurewicz parameter against an independent root finder") {
    auto g = [](double a) {
        const double q2 = a - a * a;
        const double q3 = a - q2 * q2;
        return q3 - (-1.0 + std::sqrt(1.0 + 4.0 * a)) / 2.0;
    };
    boost::uintmax_t iters = 200;
    const auto r = boost::math::tools::toms748_solve(
        g, 1.5, 1.6, boost::math::tools::eps_tolerance<double>(50), iters);
    const double oracle = 0.5 * (r.first + r.second);
    const double a0 = maps::misiurewicz_a0();
    CHECK(a0 == doctest::Approx(oracle).epsilon(1e-11));
    CHECK(a0 == doctest::Approx(1.5437).epsilon(1e-4));
}

TEST_CASE("Viana map: fibre interval and forward invariance on a 10^5-point grid") {
    const auto v = MapSystem::viana();
    const auto I = v.fibre();
    CHECK(I.lo > -2.0);
    CHECK(I.hi < 2.0);
    CHECK(v.viana_params().d == 16);
    CHECK(v.viana_params().alpha == 1e-2);
    const int m = 317;
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < m; ++j) {
            const Point p{I.lo + (I.hi - I.lo) * j / (m - 1), static_cast<double>(i) / m};
            const Point q = v.apply(p);
            REQUIRE(q.s >= 0.0);
            REQUIRE(q.s < 1.0);
            REQUIRE(I.contains(q.x));
        }
    }
    CHECK_THROWS_AS(maps::viana_fibre_interval(1.99, 0.5), DomainError);
}

TEST_CASE("center: doubling cosine, constants, and long-orbit agreement") {
    const auto dbl = MapSystem::doubling();
    const auto c = maps::center(dbl, Observable::cosine(), maps::CenterMethod::UlamDensity, 4096);
    CHECK(std::abs(c.obs.offset) < 1e-3);
    CHECK(std::abs(c.report.mean) <= c.report.tolerance);

    for (const auto& map : {dbl, MapSystem::intermittent(0.5)}) {
        const auto k = maps::center(map, Observable::constant(1.0), maps::CenterMethod::UlamDensity, 2048);
        CHECK(std::abs(k.obs.offset - 1.0) <= k.report.tolerance);
    }

    const auto f = MapSystem::intermittent(0.5);
    const auto a = maps::center(f, Observable::coordinate(), maps::CenterMethod::LongOrbit, 1000000, 1);
    const auto b = maps::center(f, Observable::coordinate(), maps::CenterMethod::LongOrbit, 1000000, 2);
    const double combined = 3.0 * std::hypot(a.report.uncertainty, b.report.uncertainty);
    CHECK(std::abs(a.obs.offset - b.obs.offset) <= combined);
    CHECK(a.obs.offset < 0.5);  // mass piles up near the neutral fixed point

    CHECK_THROWS_AS(maps::center(MapSystem::viana(), Observable::viana_fiber(),
                                 maps::CenterMethod::UlamDensity, 4096),
                    UnsupportedError);
    CHECK_THROWS_AS(maps::center(dbl, Observable::cosine(), maps::CenterMethod::UlamDensity, 999),
                    DomainError);
}

TEST_CASE("observable sup norms") {
    CHECK(Observable::cosine().sup_norm() == 1.0);
    auto b = Observable::bump();
    b.offset = 0.25;
    CHECK(b.sup_norm() == 0.75);
    CHECK(b({0.3}) == 0.75);
    CHECK(b({0.9}) == -0.25);
    CHECK(Observable::constant(2.0).sup_norm() == 2.0);
}

TEST_CASE("orbit walker follows the map up to the last binary digit") {
    const auto dbl = MapSystem::doubling();
    SampleStream s(11, 4);
    maps::OrbitWalker w(dbl, s);
    for (int i = 0; i < 1000; ++i) {
        const double prev = w.point().x;
        w.step();
        const double want = dbl.apply({prev}).x;
        REQUIRE(std::abs(w.point().x - want) <= 0x1.0p-52);
    }
    // Orbits stay spread out instead of collapsing onto 0.
    double sum = 0.0;
    for (std::uint64_t i = 0; i < 2000; ++i) {
        SampleStream si(11, i);
        maps::OrbitWalker wi(dbl, si);
        wi.advance(1000);
        sum += wi.point().x;
    }
    CHECK(sum / 2000.0 == doctest::Approx(0.5).epsilon(0.05));
}
