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

// Serial reference kernels. Kept as the ground truth the OpenMP versions are
// tested against; do not parallelise.

#include "ldlab/kernels.hpp"

namespace ldlab::kernels {

SparseRows ulam_rows_serial(const maps::MapSystem& map, std::size_t k) {
    SparseRows rows;
    rows.row_ptr.reserve(k + 1);
    rows.row_ptr.push_back(0);
    std::vector<RowEntry> scratch;
    for (std::size_t i = 0; i < k; ++i) {
        ulam_row(map, k, i, scratch);
        for (const auto& e : scratch) {
            rows.col.push_back(e.col);
            rows.val.push_back(e.weight);
        }
        rows.row_ptr.push_back(rows.col.size());
    }
    return rows;
}

BirkhoffTable birkhoff_sums_serial(const BirkhoffJob& job) {
    validate(job);
    BirkhoffTable table;
    table.samples = job.samples;
    table.checkpoints = job.checkpoints;
    const std::size_t width = job.checkpoints.size();
    table.sums.assign(job.samples * width, 0.0);
    for (std::size_t s = 0; s < job.samples; ++s) {
        birkhoff_path(job, s, std::span<double>(table.sums).subspan(s * width, width));
    }
    return table;
}

}  // namespace ldlab::kernels
