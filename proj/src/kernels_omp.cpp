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

#include "ldlab/kernels.hpp"

#include <omp.h>

namespace ldlab::kernels {

namespace {

int resolve_workers(int workers) {
    return workers > 0 ? workers : omp_get_max_threads();
}

}  // namespace

SparseRows ulam_rows_omp(const maps::MapSystem& map, std::size_t k, int workers) {
    std::vector<std::vector<RowEntry>> per_row(k);
    const auto n = static_cast<std::ptrdiff_t>(k);
#pragma omp parallel num_threads(resolve_workers(workers))
    {
        std::vector<RowEntry> scratch;
#pragma omp for schedule(static)
        for (std::ptrdiff_t i = 0; i < n; ++i) {
            ulam_row(map, k, static_cast<std::size_t>(i), scratch);
            per_row[static_cast<std::size_t>(i)] = scratch;
        }
    }

    SparseRows rows;
    rows.row_ptr.reserve(k + 1);
    rows.row_ptr.push_back(0);
    for (const auto& row : per_row) {
        for (const auto& e : row) {
            rows.col.push_back(e.col);
            rows.val.push_back(e.weight);
        }
        rows.row_ptr.push_back(rows.col.size());
    }
    return rows;
}

BirkhoffTable birkhoff_sums_omp(const BirkhoffJob& job, int workers) {
    validate(job);
    BirkhoffTable table;
    table.samples = job.samples;
    table.checkpoints = job.checkpoints;
    const std::size_t width = job.checkpoints.size();
    table.sums.assign(job.samples * width, 0.0);
    const auto n = static_cast<std::ptrdiff_t>(job.samples);
    double* base = table.sums.data();
#pragma omp parallel for schedule(dynamic, 256) num_threads(resolve_workers(workers))
    for (std::ptrdiff_t s = 0; s < n; ++s) {
        birkhoff_path(job, static_cast<std::size_t>(s),
                      std::span<double>(base + static_cast<std::size_t>(s) * width, width));
    }
    return table;
}

}  // namespace ldlab::kernels
