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

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "ldlab/kernels.hpp"
#include "ldlab/maps.hpp"

namespace ldlab::mc {

/// How mu is sampled: `samples` independent orbits, each started from a
/// uniform draw on the domain and run `burn_in` steps. Sample i draws from
/// counter-based substream (seed, i).
struct SampleSpec {
    std::size_t samples = 100000;
    std::size_t burn_in = 1000;
    std::uint64_t seed = 42;
    int workers = 0;  // 0: OpenMP default

    /// samples >= 100, burn_in >= 1000.
    void validate() const;
};

struct Interval {
    double low = 0.0;
    double high = 0.0;
};

/// 95% Wilson score interval for hits / trials.
Interval wilson_interval(std::size_t hits, std::size_t trials, double z = 1.959963984540054);

struct LDEstimate {
    std::size_t n = 0;
    double epsilon = 0.0;
    double p_hat = 0.0;
    std::size_t hits = 0;
    std::size_t samples = 0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    std::uint64_t seed = 0;
    std::string map_id;
    std::string obs_id;
    /// p_hat = 0 with fewer than 10 / expected_bound samples.
    bool insufficient_samples = false;
};

struct MomentEstimate {
    double value = 0.0;
    double std_error = 0.0;
};

std::vector<maps::Point> sample_invariant(const maps::MapSystem& map, const SampleSpec& spec);

/// Birkhoff sums of every sample at each checkpoint (OpenMP kernel).
kernels::BirkhoffTable birkhoff_table(const maps::MapSystem& map, const maps::Observable& obs,
                                      std::vector<std::size_t> checkpoints,
                                      const SampleSpec& spec);

/// mu(|phi_n / n| > epsilon) from precomputed sums.
LDEstimate ld_from_sums(std::span<const double> sums, std::size_t n, double epsilon,
                        double expected_bound = 0.0);
LDEstimate ld_probability(const maps::MapSystem& map, const maps::Observable& obs, std::size_t n,
                          double epsilon, const SampleSpec& spec, double expected_bound = 0.0);

/// (mean |phi_n|^q)^(1/q) with delete-a-group jackknife standard error.
MomentEstimate moment_from_sums(std::span<const double> sums, double q);
MomentEstimate empirical_moment(const maps::MapSystem& map, const maps::Observable& obs,
                                std::size_t n, double q, const SampleSpec& spec);

/// Sample mean of exp(tau_p n^{-theta_p} |phi_n|^{2 theta_p}) and its
/// standard error. `sup_phi` bounds |phi| and guards against overflow: calls
/// whose integrand could exceed 1e300 are rejected as mis-calibrated.
MomentEstimate exp_moment_from_sums(std::span<const double> sums, std::size_t n, double tau_p,
                                    double theta_p, double sup_phi);
MomentEstimate exp_moment(const maps::MapSystem& map, const maps::Observable& obs, std::size_t n,
                          double tau_p, double theta_p, const SampleSpec& spec);

/// Markov's inequality on the empirical measure of one sample set:
///   p_hat <= E_emp[exp(tau_p n^-theta_p |phi_n|^{2 theta_p})] * exp(-tau_p eps^{2 theta_p} n^theta_p).
struct MarkovCheck {
    double p_hat = 0.0;
    double exp_moment = 0.0;
    double rhs = 0.0;
    bool holds = false;
};
MarkovCheck markov_check(std::span<const double> sums, std::size_t n, double epsilon,
                         double tau_p, double theta_p);

/// L^q norms of phi_n on a (q, n) grid, all from one sample set.
struct MomentGrid {
    std::vector<double> qs;
    std::vector<std::size_t> ns;
    std::vector<MomentEstimate> values;  // row-major qs x ns

    const MomentEstimate& at(std::size_t qi, std::size_t ni) const {
        return values[qi * ns.size() + ni];
    }
    bool empty() const { return values.empty(); }
};
MomentGrid moment_grid(const maps::MapSystem& map, const maps::Observable& obs,
                       std::vector<double> qs, std::vector<std::size_t> ns,
                       const SampleSpec& spec);

/// Columns: map_id,obs_id,n,param,estimate,ci_low,ci_high,samples,seed
void write_ld_csv(std::ostream& os, std::span<const LDEstimate> rows);

}  // namespace ldlab::mc
