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

// Data-parallel kernels. Each has a serial reference and an OpenMP version;
// both produce bit-identical output for any worker count (each work item
// writes only its own slot, and nothing is reduced across items here).

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "ldlab/maps.hpp"

namespace ldlab::kernels {

/// Compressed sparse rows.
struct SparseRows {
    std::vector<std::size_t> row_ptr;
    std::vector<std::int32_t> col;
    std::vector<double> val;
};

struct RowEntry {
    std::int32_t col;
    double weight;
};

/// Row i of the Ulam matrix with k bins (k a power of two, so bins never
/// straddle the branch point 1/2). Overwrites `out`.
void ulam_row(const maps::MapSystem& map, std::size_t k, std::size_t i,
              std::vector<RowEntry>& out);

SparseRows ulam_rows_serial(const maps::MapSystem& map, std::size_t k);
SparseRows ulam_rows_omp(const maps::MapSystem& map, std::size_t k, int workers = 0);

/// Birkhoff sums along independent mu-sampled orbits. Sample i uses stream
/// (seed, i), runs `burn_in` steps from a uniform draw, then records
/// phi_c = sum_{k<c} phi(T^k x) for every checkpoint c (ascending).
struct BirkhoffJob {
    const maps::MapSystem* map = nullptr;
    const maps::Observable* obs = nullptr;
    std::vector<std::size_t> checkpoints;
    std::size_t samples = 0;
    std::size_t burn_in = 1000;
    std::uint64_t seed = 0;
};

/// Row-major samples x checkpoints.
struct BirkhoffTable {
    std::size_t samples = 0;
    std::vector<std::size_t> checkpoints;
    std::vector<double> sums;

    double at(std::size_t sample, std::size_t c) const {
        return sums[sample * checkpoints.size() + c];
    }
    /// Copy of one checkpoint column.
    std::vector<double> column(std::size_t c) const;
};

/// Throws DomainError on unset pointers or non-increasing checkpoints.
void validate(const BirkhoffJob& job);

/// One sample path; writes checkpoints.size() values to `out`.
void birkhoff_path(const BirkhoffJob& job, std::size_t index, std::span<double> out);

BirkhoffTable birkhoff_sums_serial(const BirkhoffJob& job);
BirkhoffTable birkhoff_sums_omp(const BirkhoffJob& job, int workers = 0);

}  // namespace ldlab::kernels
