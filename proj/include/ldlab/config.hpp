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

// Sectioned key = value experiment configuration.
//
//   # comment
//   [map]
//   kind = intermittent
//   gamma = 0.5
//
// Every value remembers where it came from ("file:line" or "--set") so that
// validation errors point at the offending line.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ldlab/maps.hpp"
#include "ldlab/montecarlo.hpp"

namespace ldlab::cli {

struct IniEntry {
    std::string value;
    std::string origin;
};

class IniDocument {
public:
    static IniDocument parse(std::istream& is, const std::string& source);
    static IniDocument parse_file(const std::string& path);

    /// Apply a `section.key=value` override.
    void set(const std::string& assignment);
    void set(const std::string& section, const std::string& key, const std::string& value,
             const std::string& origin);

    const IniEntry* find(const std::string& section, const std::string& key) const;

    /// Canonical text: sections and keys sorted, origins dropped.
    std::string to_text() const;

    const std::map<std::string, std::map<std::string, IniEntry>>& sections() const {
        return sections_;
    }

private:
    std::map<std::string, std::map<std::string, IniEntry>> sections_;
};

struct RunConfig {
    std::uint64_t seed = 42;
    int workers = 0;
};

struct MapConfig {
    std::string kind = "intermittent";
    double gamma = 0.5;
    std::optional<double> a0;  // Viana; defaults to misiurewicz_a0()
    double alpha = 1e-2;
    int d = 16;
};

struct ObservableConfig {
    std::string kind = "bump";
    double value = 0.0;
    double plateau_lo = 0.2;
    double plateau_hi = 0.4;
    double ramp = 0.1;
    double holder = 1.0;
    std::string center = "auto";  // auto | ulam_density | long_orbit | none
    std::size_t center_budget = 0;  // 0: 4096 bins (ulam_density) or 10^6 steps (long_orbit)
};

struct UlamConfig {
    std::size_t bins = 2048;
    std::size_t n_max = 200;
    bool refine = true;
    bool dump_matrix = false;
};

struct FitConfig {
    std::size_t n_min = 1;
    std::size_t n_max = 0;  // 0: whole curve
};

struct LdConfig {
    std::vector<std::size_t> n = {16, 32, 64, 128, 256, 512, 1024, 2048, 4096};
    std::vector<double> epsilon = {0.05, 0.1, 0.2};
    std::size_t samples = 100000;
    std::size_t burn_in = 1000;
};

struct VerifyConfig {
    std::optional<double> theta;
    std::optional<double> tau;
    std::optional<double> c_phi;
    std::string decay_manifest;
    std::size_t calibration_samples = 100000;
    std::vector<double> calibration_q = {1, 2, 4, 8};
    std::vector<std::size_t> calibration_n = {100, 1000, 10000};
    double heldout_q = 6.0;
    std::size_t heldout_n = 3000;
    std::vector<std::size_t> exp_n = {10, 100, 1000};
    std::size_t exp_samples = 100000;
    double tau_prime_scale = 1.0;
    double gordin_target = 1e-6;
    std::size_t gordin_cap = 1000;
    double noise_floor_tau = 1.0;
};

struct ExperimentConfig {
    RunConfig run;
    MapConfig map;
    ObservableConfig observable;
    UlamConfig ulam;
    FitConfig fit;
    LdConfig ld;
    VerifyConfig verify;

    /// Resolved configuration as INI text (every key written out).
    std::string to_text() const;
};

/// Typed, validated configuration. Unknown sections or keys, unparsable
/// values and out-of-range parameters throw ConfigError naming the origin.
ExperimentConfig resolve(const IniDocument& doc);

/// Builds the map; Viana a0 falls back to misiurewicz_a0().
maps::MapSystem make_map(const MapConfig& cfg);
maps::Observable make_observable(const ObservableConfig& cfg);
mc::SampleSpec ld_sample_spec(const ExperimentConfig& cfg);

}  // namespace ldlab::cli
