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

#include <algorithm>
#include <cmath>

#include "ldlab/errors.hpp"
#include "ldlab/numeric.hpp"

namespace ldlab::kernels {

namespace {

constexpr double kInverseTol = 1e-14;

// Inverse of an increasing branch on [lo, hi] by bisection.
template <class F>
double invert_increasing(F&& f, double y, double lo, double hi) {
    if (y <= f(lo)) return lo;
    if (y >= f(hi)) return hi;
    while (hi - lo > kInverseTol) {
        const double mid = 0.5 * (lo + hi);
        if (f(mid) < y) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace

void ulam_row(const maps::MapSystem& map, std::size_t k, std::size_t i,
              std::vector<RowEntry>& out) {
    out.clear();
    const double kd = static_cast<double>(k);
    const double a = static_cast<double>(i) / kd;
    const double b = static_cast<double>(i + 1) / kd;
    const bool left = b <= 0.5;
    const bool closed_form = map.kind() == maps::MapKind::Doubling || map.gamma() == 1.0;

    auto forward = [&](double x) { return left ? map.left_branch(x) : 2.0 * x - 1.0; };
    auto inverse = [&](double y) {
        if (!left) return std::clamp(0.5 * (y + 1.0), a, b);
        if (closed_form) return std::clamp(0.5 * y, a, b);
        return invert_increasing([&](double x) { return map.left_branch(x); }, y, a, b);
    };

    const double ya = forward(a);
    const double yb = forward(b);
    const auto j_lo = std::min<std::size_t>(static_cast<std::size_t>(std::floor(ya * kd)), k - 1);
    const auto j_hi = std::min<std::size_t>(
        static_cast<std::size_t>(std::max(std::ceil(yb * kd) - 1.0, 0.0)), k - 1);

    double prev = a;
    double total = 0.0;
    for (std::size_t j = j_lo; j <= j_hi; ++j) {
        const double next = (j == j_hi) ? b : std::max(prev, inverse(static_cast<double>(j + 1) / kd));
        const double w = (next - prev) * kd;
        if (w > 0.0) {
            out.push_back({static_cast<std::int32_t>(j), w});
            total += w;
        }
        prev = next;
    }
    for (auto& e : out) e.weight /= total;
}

std::vector<double> BirkhoffTable::column(std::size_t c) const {
    std::vector<double> out(samples);
    for (std::size_t s = 0; s < samples; ++s) out[s] = at(s, c);
    return out;
}

void birkhoff_path(const BirkhoffJob& job, std::size_t index, std::span<double> out) {
    SampleStream stream(job.seed, index);
    maps::OrbitWalker walker(*job.map, stream);
    walker.advance(job.burn_in);

    const auto& cps = job.checkpoints;
    const std::size_t n_max = cps.back();
    std::size_t c = 0;
    if (n_max >= kCompensatedThreshold) {
        NeumaierSum acc;
        for (std::size_t n = 1; n <= n_max; ++n) {
            acc.add((*job.obs)(walker.point()));
            if (n == cps[c]) out[c++] = acc.value();
            if (n < n_max) walker.step();
        }
    } else {
        double acc = 0.0;
        for (std::size_t n = 1; n <= n_max; ++n) {
            acc += (*job.obs)(walker.point());
            if (n == cps[c]) out[c++] = acc;
            if (n < n_max) walker.step();
        }
    }
}

void validate(const BirkhoffJob& job) {
    if (job.map == nullptr || job.obs == nullptr) throw DomainError("birkhoff job: map/observable unset");
    if (job.checkpoints.empty() || job.checkpoints.front() == 0 ||
        !std::is_sorted(job.checkpoints.begin(), job.checkpoints.end()) ||
        std::adjacent_find(job.checkpoints.begin(), job.checkpoints.end()) != job.checkpoints.end()) {
        throw DomainError("birkhoff job: checkpoints must be strictly increasing and >= 1");
    }
}

}  // namespace ldlab::kernels
