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

// Experiment stages. Each stage reads the resolved configuration, records
// results, checks, seeds and timings in a RunContext, and (when the context
// has a run directory) writes its CSV artifacts there.
//
//   decay   Ulam operator, centring, L1(mu) decay curve, stretched-exp fit
//   ld      Monte Carlo large-deviation grid and empirical exponents
//   verify  calibrate_K -> moments -> Gordin -> exp moment -> Markov -> theorem

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ldlab/config.hpp"
#include "ldlab/fit.hpp"
#include "ldlab/gordin.hpp"
#include "ldlab/montecarlo.hpp"
#include "ldlab/theory.hpp"
#include "ldlab/ulam.hpp"

namespace ldlab::cli {

struct CheckResult {
    std::string name;
    bool passed = false;
    std::string detail;
};

class RunContext {
public:
    /// With an empty `out_root` nothing is written to disk. Otherwise the run
    /// directory out_root/<timestamp>-<hash8> is created.
    explicit RunContext(ExperimentConfig cfg, const std::filesystem::path& out_root = {});

    const ExperimentConfig& config() const { return cfg_; }
    const std::string& config_text() const { return config_text_; }
    const std::string& config_hash() const { return config_hash_; }
    const std::filesystem::path& run_dir() const { return run_dir_; }
    bool writes_files() const { return !run_dir_.empty(); }

    nlohmann::json& results() { return results_; }
    const nlohmann::json& results() const { return results_; }

    void check(const std::string& name, bool passed, const std::string& detail = {});
    void warn(const std::string& message);
    void record_seed(const std::string& name, std::uint64_t seed);
    void record_timing(const std::string& stage, double seconds);
    /// Path of a new artifact inside the run directory; checksummed when the
    /// manifest is assembled.
    std::filesystem::path artifact(const std::string& name);

    const std::vector<CheckResult>& checks() const { return checks_; }
    const std::vector<std::string>& warnings() const { return warnings_; }
    bool all_passed() const;

    nlohmann::json manifest() const;
    /// Writes run_dir/manifest.json; returns its path (empty when in memory).
    std::filesystem::path write_manifest() const;

private:
    ExperimentConfig cfg_;
    std::string config_text_;
    std::string config_hash_;
    std::filesystem::path run_dir_;
    nlohmann::json results_ = nlohmann::json::object();
    nlohmann::json seeds_ = nlohmann::json::object();
    nlohmann::json timings_ = nlohmann::json::object();
    std::vector<std::string> artifacts_;
    std::vector<CheckResult> checks_;
    std::vector<std::string> warnings_;
};

/// Centres the configured observable with the configured method ("auto":
/// ulam_density for one-dimensional maps, long_orbit for Viana).
maps::Centered center_observable(const maps::MapSystem& map, const ExperimentConfig& cfg);

/// The decay exponent the cited results attach to each system: 1 for the
/// doubling map, gamma for f_gamma, 1/2 for the Viana map.
double known_theta(const maps::MapSystem& map);

// ---------------------------------------------------------------------------

struct RefinementReport {
    std::size_t bins_fine = 0;
    double theta_coarse = 0.0;
    double theta_fine = 0.0;
    double delta_theta = 0.0;
    double tolerance = 0.0;  // half-width of the coarse theta_ci
    double density_tv = 0.0;
    bool stable = false;
};

struct DecayResult {
    maps::Observable obs;  // centred
    maps::CenteringReport centering;
    std::shared_ptr<const ulam::UlamOperator> op;
    ulam::DecayCurve curve;
    std::optional<fit::StretchedExpFit> fit;  // empty on the noise floor
    std::optional<RefinementReport> refinement;
    gordin::Envelope envelope;
    double C_phi = 0.0;  // max_n a_n exp(tau n^theta), n = 0 included
    double sup_phi = 0.0;
};

/// Requires a one-dimensional map (UnsupportedError otherwise).
DecayResult run_decay(RunContext& ctx);

struct LdColumn {
    double epsilon = 0.0;
    std::vector<mc::LDEstimate> cells;
    std::optional<fit::StretchedExpFit> fit;
    std::vector<std::string> notes;
    bool degenerate = false;  // epsilon >= sup |phi_bar|: no deviation possible
};

struct LdResult {
    maps::Observable obs;
    double sup_phi = 0.0;
    double theta = 0.0;
    double predicted = 0.0;
    double predicted_old = 0.0;
    mc::SampleSpec spec;
    kernels::BirkhoffTable table;
    std::vector<LdColumn> columns;
};

LdResult run_ld(RunContext& ctx, const DecayResult* decay = nullptr);

/// Decay hypothesis fed to the verification chain.
struct DecayHypothesis {
    gordin::Envelope envelope;
    double C_phi = 0.0;
    std::string source;  // "decay", "manifest:<path>" or "synthetic"
};

struct Calibration {
    mc::MomentGrid grid;
    theory::TheoremConstants constants;
};

/// Moment grid on (calibration_q x calibration_n) and the constants with
/// the calibrated K.
Calibration calibrate(const maps::MapSystem& map, const maps::Observable& obs,
                      const DecayHypothesis& hyp, const ExperimentConfig& cfg);

struct VerifyResult {
    DecayHypothesis hypothesis;
    Calibration calibration;
    mc::MomentEstimate heldout;
    double heldout_bound = 0.0;
    std::optional<gordin::GordinReport> gordin;
    double tau_prime_used = 0.0;  // tau' * tau_prime_scale
    std::vector<mc::MomentEstimate> exp_moments;
    std::optional<double> series_bound;
    std::string series_error;
    std::vector<mc::LDEstimate> cells;
    std::vector<mc::MarkovCheck> markov;
    std::vector<double> bounds;  // theorem_bound per cell
    bool passed = false;
};

/// Needs a decay hypothesis: synthetic verify.theta / verify.tau, an
/// in-memory decay result, or verify.decay_manifest. Otherwise throws
/// DependencyError naming the decay stage.
VerifyResult run_verify(RunContext& ctx, const DecayResult* decay = nullptr,
                        const LdResult* ld = nullptr);

/// Reads the decay hypothesis stored by run_decay in a manifest file.
DecayHypothesis load_hypothesis(const std::filesystem::path& manifest);

}  // namespace ldlab::cli
