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
#include "ldlab/maps.hpp"
#include "ldlab/montecarlo.hpp"
#include "ldlab/ulam.hpp"

using namespace ldlab;
using maps::MapSystem;
using maps::Observable;

namespace {

mc::SampleSpec spec(std::size_t samples, std::uint64_t seed = 42, int workers = 0) {
    mc::SampleSpec s;
    s.samples = samples;
    s.burn_in = 1000;
    s.seed = seed;
    s.workers = workers;
    return s;
}

}  // namespace

TEST_CASE("sample spec validation") {
    CHECK_THROWS_AS(spec(99).validate(), DomainError);
    auto s = spec(100);
    s.burn_in = 999;
    CHECK_THROWS_AS(s.validate(), DomainError);
    CHECK_NOTHROW(spec(100).validate());
}

TEST_CASE("wilson interval") {
    const auto z = mc::wilson_interval(0, 1000);
    CHECK(z.low == 0.0);
    CHECK(z.high == doctest::Approx(3.8267e-3).epsilon(1e-3));
    // Textbook value for 10 successes in 100 trials.
    const auto t = mc::wilson_interval(10, 100);
    CHECK(t.low == doctest::Approx(0.05523).epsilon(1e-3));
    CHECK(t.high == doctest::Approx(0.17437).epsilon(1e-3));
}

TEST_CASE("doubling samples are uniform: Kolmogorov distance below 0.01") {
    auto pts = mc::sample_invariant(MapSystem::doubling(), spec(100000));
    std::vector<double> xs;
    for (const auto& p : pts) xs.push_back(p.x);
    std::sort(xs.begin(), xs.end());
    double d = 0.0;
    const double n = static_cast<double>(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        d = std::max({d, std::abs((i + 1) / n - xs[i]), std::abs(xs[i] - i / n)});
    }
    CHECK(d < 0.01);
}

TEST_CASE("f_gamma samples follow the Ulam density") {
    const auto f = MapSystem::intermittent(0.5);
    const auto pts = mc::sample_invariant(f, spec(200000));
    const std::size_t k = 64;
    const auto op = ulam::build_ulam(f, k);
    ulam::GridFunction hist(k, 0.0);
    for (const auto& p : pts) hist[op.bin_of(p.x)] += static_cast<double>(k) / pts.size();
    CHECK(hist[0] > 1.0);
    CHECK(ulam::total_variation(op.density(), hist) < 5e-2);
}

TEST_CASE("samples do not depend on the worker count") {
    const auto f = MapSystem::intermittent(0.5);
    const auto a = mc::sample_invariant(f, spec(500, 7, 1));
    const auto b = mc::sample_invariant(f, spec(500, 7, 3));
    CHECK(a == b);
    const auto v = MapSystem::viana();
    CHECK(mc::sample_invariant(v, spec(200, 7, 1)) == mc::sample_invariant(v, spec(200, 7, 4)));
}

TEST_CASE("ld_probability examples") {
    const auto dbl = MapSystem::doubling();
    const auto est = mc::ld_probability(dbl, Observable::cosine(), 1, 0.5, spec(100000));
    CHECK(est.p_hat == doctest::Approx(2.0 / 3.0).epsilon(0.01));
    CHECK(est.ci_low <= est.p_hat);
    CHECK(est.p_hat <= est.ci_high);
    CHECK(est.ci_low < 2.0 / 3.0);
    CHECK(2.0 / 3.0 < est.ci_high);

    const auto big = mc::ld_probability(dbl, Observable::cosine(), 50, 1.0 + 1e-9, spec(1000));
    CHECK(big.p_hat == 0.0);
    CHECK(big.hits == 0);

    // Monotone in epsilon on one sample set.
    const auto table = mc::birkhoff_table(dbl, Observable::cosine(), {64}, spec(20000));
    double prev = 1.0;
    for (double eps : {0.01, 0.02, 0.05, 0.1, 0.2, 0.4}) {
        const double p = mc::ld_from_sums(table.sums, 64, eps).p_hat;
        CHECK(p <= prev);
        prev = p;
    }

    const auto flagged = mc::ld_from_sums(std::vector<double>(200, 0.0), 10, 0.1, 1e-4);
    CHECK(flagged.insufficient_samples);
    CHECK_FALSE(mc::ld_from_sums(std::vector<double>(200, 0.0), 10, 0.1, 0.5).insufficient_samples);
}

TEST_CASE("empirical moments") {
    const auto dbl = MapSystem::doubling();
    auto zero = Observable::constant(2.0);
    zero.offset = 2.0;
    CHECK(mc::empirical_moment(dbl, zero, 100, 2.0, spec(1000)).value == 0.0);

    // Cosine under doubling: sums are martingales with variance n/2.
    const auto table = mc::birkhoff_table(dbl, Observable::cosine(), {100, 1000}, spec(50000));
    for (std::size_t c = 0; c < 2; ++c) {
        const auto col = table.column(c);
        double direct = 0.0;
        for (double s : col) direct += s * s;
        direct = std::sqrt(direct / col.size());
        const auto m2 = mc::moment_from_sums(col, 2.0);
        CHECK(m2.value == doctest::Approx(direct).epsilon(1e-12));
        const double n = static_cast<double>(table.checkpoints[c]);
        CHECK(m2.value / std::sqrt(n) == doctest::Approx(std::sqrt(0.5)).epsilon(0.02));
        CHECK(m2.std_error > 0.0);
        CHECK(m2.value <= mc::moment_from_sums(col, 4.0).value);
    }
}

TEST_CASE("exponential moments") {
    const auto dbl = MapSystem::doubling();
    auto zero = Observable::constant(1.0);
    zero.offset = 1.0;
    CHECK(mc::exp_moment(dbl, zero, 100, 0.3, 0.5, spec(500)).value == 1.0);
    const auto small = mc::exp_moment(dbl, Observable::cosine(), 100, 1e-12, 0.5, spec(500));
    CHECK(small.value == doctest::Approx(1.0).epsilon(1e-9));
    CHECK_THROWS_AS(mc::exp_moment(dbl, Observable::cosine(), 100, 0.3, 0.75, spec(500)), DomainError);
    CHECK_THROWS_AS(mc::exp_moment(dbl, Observable::cosine(), 1000000, 1.0, 0.5, spec(500)), DomainError);
}

TEST_CASE("Markov inequality holds pathwise on every sample set") {
    const auto fg = MapSystem::intermittent(0.5);
    const auto obs = maps::center(fg, Observable::bump(), maps::CenterMethod::UlamDensity, 4096).obs;
    const auto table = mc::birkhoff_table(fg, obs, {10, 100, 1000}, spec(5000));
    for (std::size_t c = 0; c < 3; ++c) {
        const auto col = table.column(c);
        for (double eps : {0.01, 0.05, 0.2}) {
            for (double tau : {0.05, 0.5, 2.0}) {
                for (double th : {0.2, 1.0 / 3.0, 0.5}) {
                    const auto m = mc::markov_check(col, table.checkpoints[c], eps, tau, th);
                    REQUIRE(m.holds);
                    CHECK(m.p_hat == mc::ld_from_sums(col, table.checkpoints[c], eps).p_hat);
                }
            }
        }
    }
}

TEST_CASE("moment grid and CSV export") {
    const auto grid = mc::moment_grid(MapSystem::doubling(), Observable::cosine(), {1, 2}, {10, 100}, spec(2000));
    REQUIRE(grid.values.size() == 4);
    CHECK(grid.at(0, 1).value <= grid.at(1, 1).value);
    const auto est = mc::ld_probability(MapSystem::doubling(), Observable::cosine(), 4, 0.3, spec(1000));
    std::ostringstream os;
    mc::write_ld_csv(os, std::vector<mc::LDEstimate>{est});
    CHECK(os.str().rfind("map_id,obs_id,n,epsilon,estimate,ci_low,ci_high,samples,seed\n\"doubling\"", 0) == 0);
}
