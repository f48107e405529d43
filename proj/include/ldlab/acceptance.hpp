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

// Acceptance criteria P1-P7 as runnable profiles. Each profile reports one
// line per criterion, including its runtime budget.

#include <string>
#include <vector>

#include "ldlab/config.hpp"

namespace ldlab::cli {

struct CriterionResult {
    std::string id;
    std::string description;
    bool passed = false;
    std::string detail;
};

struct ProfileResult {
    std::string profile;
    std::vector<CriterionResult> criteria;
    double seconds = 0.0;
    bool passed() const;
};

/// "p1" .. "p7".
std::vector<std::string> profile_names();

/// Doubling map, cosine observable, seed 42: the base of P4-P7.
ExperimentConfig doubling_cosine_config();

/// Throws ConfigError for an unknown profile name.
ProfileResult run_profile(const std::string& name, int workers = 0);

/// "PASS P4.1 description: detail"
std::string format_line(const CriterionResult& c);

}  // namespace ldlab::cli
