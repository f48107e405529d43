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

#include "ldlab/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include <omp.h>

#include "ldlab/errors.hpp"
#include "ldlab/numeric.hpp"

namespace ldlab::mc {

namespace {

constexpr std::size_t kJackknifeGroups = 100;

// log(1e300): largest exponent exp_moment accepts.
const double kMaxExponent = std::log(1e300);

}  // namespace

void SampleSpec::validate() const {
    if (samples < 100) throw DomainError("sample spec: samples must be >= 100");
    if (burn_in < 1000) throw DomainError("sample spec: burn_in must be >= 1000");
}

Interval wilson_interval(std::size_t hits, std::size_t trials, double z) {
    if (trials == 0) return {0.0, 1.0};
    const double n = static_cast<double>(trials);
    const double p = static_cast<double>(hits) / n;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / n;
    const double centre = (p + z2 / (2.0 * n)) / denom;
    const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
    // Keep p inside the interval against rounding at p = 0 or 1.
    return {std::min(p, std::max(0.0, centre - half)), std::max(p, std::min(1.0, centre + half))};
}

std::vector<maps::Point> sample_invariant(const maps::MapSystem& map, const SampleSpec& spec) {
    spec.validate();
    std::vector<maps::Point> out(spec.samples);
    const auto n = static_cast<std::ptrdiff_t>(spec.samples);
    const int workers = spec.workers > 0 ? spec.workers : omp_get_max_threads();
#pragma omp parallel for schedule(static) num_threads(workers)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        SampleStream stream(spec.seed, static_cast<std::uint64_t>(i));
        maps::OrbitWalker walker(map, stream);
        walker.advance(spec.burn_in);
        out[static_cast<std::size_t>(i)] = walker.point();
    }
    return out;
}

kernels::BirkhoffTable birkhoff_table(const maps::MapSystem& map, const maps::Observable& obs,
                                      std::vector<std::size_t> checkpoints,
                                      const SampleSpec& spec) {
    spec.validate();
    std::sort(checkpoints.begin(), checkpoints.end());
    checkpoints.erase(std::unique(checkpoints.begin(), checkpoints.end()), checkpoints.end());
    kernels::BirkhoffJob job;
    job.map = &map;
    job.obs = &obs;
    job.checkpoints = std::move(checkpoints);
    job.samples = spec.samples;
    job.burn_in = spec.burn_in;
    job.seed = spec.seed;
    return kernels::birkhoff_sums_omp(job, spec.workers);
}

LDEstimate ld_from_sums(std::span<const double> sums, std::size_t n, double epsilon,
                        double expected_bound) {
    if (n < 1) throw DomainError("ld_probability: n must be >= 1");
    if (!(epsilon > 0.0)) throw DomainError("ld_probability: epsilon must be > 0");
    LDEstimate est;
    est.n = n;
    est.epsilon = epsilon;
    est.samples = sums.size();
    const double nd = static_cast<double>(n);
    for (double s : sums) {
        if (std::abs(s / nd) > epsilon) ++est.hits;
    }
    est.p_hat = static_cast<double>(est.hits) / static_cast<double>(est.samples);
    const auto ci = wilson_interval(est.hits, est.samples);
    est.ci_low = ci.low;
    est.ci_high = ci.high;
    est.insufficient_samples =
        est.hits == 0 && expected_bound > 0.0 &&
        static_cast<double>(est.samples) < 10.0 / expected_bound;
    return est;
}

LDEstimate ld_probability(const maps::MapSystem& map, const maps::Observable& obs, std::size_t n,
                          double epsilon, const SampleSpec& spec, double expected_bound) {
    const auto table = birkhoff_table(map, obs, {n}, spec);
    auto est = ld_from_sums(table.sums, n, epsilon, expected_bound);
    est.seed = spec.seed;
    est.map_id = map.id();
    est.obs_id = obs.id();
    return est;
}

MomentEstimate moment_from_sums(std::span<const double> sums, double q) {
    if (!(q > 0.0)) throw DomainError("empirical_moment: q must be > 0");
    if (sums.empty()) return {};
    double scale = 0.0;
    for (double s : sums) scale = std::max(scale, std::abs(s));
    if (scale == 0.0) return {};

    // Per-group partial sums of (|s| / scale)^q, then delete-a-group jackknife.
    const std::size_t groups = std::min(kJackknifeGroups, sums.size());
    std::vector<double> group_sum(groups, 0.0);
    std::vector<std::size_t> group_count(groups, 0);
    for (std::size_t i = 0; i < sums.size(); ++i) {
        const std::size_t g = i * groups / sums.size();
        group_sum[g] += std::pow(std::abs(sums[i]) / scale, q);
        ++group_count[g];
    }
    const double total = ordered_sum(group_sum);
    const double n = static_cast<double>(sums.size());
    MomentEstimate est;
    est.value = scale * std::pow(total / n, 1.0 / q);

    std::vector<double> loo(groups);
    for (std::size_t g = 0; g < groups; ++g) {
        const double rest = n - static_cast<double>(group_count[g]);
        loo[g] = scale * std::pow((total - group_sum[g]) / rest, 1.0 / q);
    }
    const auto [mean, var] = mean_and_variance(loo);
    (void)mean;
    const double gd = static_cast<double>(groups);
    est.std_error = std::sqrt(var * (gd - 1.0) * (gd - 1.0) / gd);
    return est;
}

MomentEstimate empirical_moment(const maps::MapSystem& map, const maps::Observable& obs,
                                std::size_t n, double q, const SampleSpec& spec) {
    if (n < 1) throw DomainError("empirical_moment: n must be >= 1");
    const auto table = birkhoff_table(map, obs, {n}, spec);
    return moment_from_sums(table.sums, q);
}

MomentEstimate exp_moment_from_sums(std::span<const double> sums, std::size_t n, double tau_p,
                                    double theta_p, double sup_phi) {
    if (!(tau_p > 0.0)) throw DomainError("exp_moment: tau_p must be > 0");
    if (!(theta_p > 0.0 && theta_p <= 0.5)) throw DomainError("exp_moment: theta_p must lie in (0, 1/2]");
    const double nd = static_cast<double>(n);
    const double worst = tau_p * std::pow(sup_phi, 2.0 * theta_p) * std::pow(nd, theta_p);
    if (worst > kMaxExponent) {
        throw DomainError("exp_moment: integrand may exceed 1e300 (tau_p mis-calibrated)");
    }
    const double scale = tau_p * std::pow(nd, -theta_p);
    std::vector<double> terms(sums.size());
    for (std::size_t i = 0; i < sums.size(); ++i) {
        terms[i] = std::exp(scale * std::pow(std::abs(sums[i]), 2.0 * theta_p));
    }
    const auto [mean, var] = mean_and_variance(terms);
    (void)mean;
    MomentEstimate est;
    est.value = ordered_sum(terms) / static_cast<double>(terms.size());
    est.std_error = std::sqrt(var / static_cast<double>(terms.size()));
    return est;
}

MomentEstimate exp_moment(const maps::MapSystem& map, const maps::Observable& obs, std::size_t n,
                          double tau_p, double theta_p, const SampleSpec& spec) {
    if (n < 1) throw DomainError("exp_moment: n must be >= 1");
    const auto table = birkhoff_table(map, obs, {n}, spec);
    return exp_moment_from_sums(table.sums, n, tau_p, theta_p, obs.sup_norm());
}

MarkovCheck markov_check(std::span<const double> sums, std::size_t n, double epsilon,
                         double tau_p, double theta_p) {
    const double nd = static_cast<double>(n);
    const double scale = tau_p * std::pow(nd, -theta_p);
    std::vector<double> terms(sums.size());
    std::size_t hits = 0;
    for (std::size_t i = 0; i < sums.size(); ++i) {
        terms[i] = std::exp(scale * std::pow(std::abs(sums[i]), 2.0 * theta_p));
        if (std::abs(sums[i] / nd) > epsilon) ++hits;
    }
    MarkovCheck out;
    out.p_hat = static_cast<double>(hits) / static_cast<double>(sums.size());
    out.exp_moment = ordered_sum(terms) / static_cast<double>(sums.size());
    out.rhs = out.exp_moment * std::exp(-tau_p * std::pow(epsilon, 2.0 * theta_p) * std::pow(nd, theta_p));
    out.holds = out.p_hat <= out.rhs;
    return out;
}

MomentGrid moment_grid(const maps::MapSystem& map, const maps::Observable& obs,
                       std::vector<double> qs, std::vector<std::size_t> ns,
                       const SampleSpec& spec) {
    MomentGrid grid;
    grid.qs = std::move(qs);
    grid.ns = std::move(ns);
    const auto table = birkhoff_table(map, obs, grid.ns, spec);
    grid.values.resize(grid.qs.size() * grid.ns.size());
    for (std::size_t ni = 0; ni < grid.ns.size(); ++ni) {
        const auto it = std::find(table.checkpoints.begin(), table.checkpoints.end(), grid.ns[ni]);
        const auto col = table.column(static_cast<std::size_t>(it - table.checkpoints.begin()));
        for (std::size_t qi = 0; qi < grid.qs.size(); ++qi) {
            grid.values[qi * grid.ns.size() + ni] = moment_from_sums(col, grid.qs[qi]);
        }
    }
    return grid;
}

void write_ld_csv(std::ostream& os, std::span<const LDEstimate> rows) {
    os << "map_id,obs_id,n,epsilon,estimate,ci_low,ci_high,samples,seed\n";
    os.precision(17);
    for (const auto& r : rows) {
        os << '"' << r.map_id << "\",\"" << r.obs_id << "\"," << r.n << ',' << r.epsilon << ','
           << r.p_hat << ',' << r.ci_low << ',' << r.ci_high << ',' << r.samples << ',' << r.seed
           << '\n';
    }
}

}  // namespace ldlab::mc
