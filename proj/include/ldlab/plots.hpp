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

// Plot-ready output from a run manifest: per-curve CSV and a self-contained
// SVG for the decay linearisation (log a_n against n^theta_hat) and for each
// large-deviation column against the theorem bound.

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace ldlab::cli {

struct PlotOutput {
    std::vector<std::filesystem::path> files;
    std::vector<std::string> warnings;
};

/// Writes into `out_dir` (created on demand). A manifest without curves
/// produces no files and one warning.
PlotOutput emit_plots(const nlohmann::json& manifest, const std::filesystem::path& out_dir);

/// Reads run_dir/manifest.json, writes run_dir/plots/ and records the files
/// with checksums under "plots" in the manifest.
PlotOutput emit_plots(const std::filesystem::path& run_dir);

}  // namespace ldlab::cli
