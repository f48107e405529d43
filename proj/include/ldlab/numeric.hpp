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

#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <utility>

namespace ldlab {

/// Birkhoff sums at least this long are accumulated with compensation.
inline constexpr std::size_t kCompensatedThreshold = 100000;

/// Neumaier's improved Kahan summation.
class NeumaierSum {
public:
    void add(double v) noexcept {
        const double t = sum_ + v;
        if (std::abs(sum_) >= std::abs(v)) {
            comp_ += (sum_ - t) + v;
        } else {
            comp_ += (v - t) + sum_;
        }
        sum_ = t;
    }
    double value() const noexcept { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

/// Compensated sum in index order.
inline double ordered_sum(std::span<const double> xs) noexcept {
    NeumaierSum acc;
    for (double v : xs) acc.add(v);
    return acc.value();
}

/// Sample mean and unbiased variance (Welford).
inline std::pair<double, double> mean_and_variance(std::span<const double> xs) noexcept {
    double mean = 0.0;
    double m2 = 0.0;
    std::size_t n = 0;
    for (double v : xs) {
        ++n;
        const double delta = v - mean;
        mean += delta / static_cast<double>(n);
        m2 += delta * (v - mean);
    }
    return {mean, n > 1 ? m2 / static_cast<double>(n - 1) : 0.0};
}

/// 4-point Gauss-Legendre rule on [-1, 1].
inline constexpr std::array<double, 4> kGaussNodes = {
    -0.86113631159405257522, -0.33998104358485626480, 0.33998104358485626480,
    0.86113631159405257522};
inline constexpr std::array<double, 4> kGaussWeights = {
    0.34785484513745385737, 0.65214515486254614263, 0.65214515486254614263,
    0.34785484513745385737};

/// Average of f over [a, b] by the 4-point Gauss rule.
template <class F>
double gauss_average(F&& f, double a, double b) {
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    double acc = 0.0;
    for (std::size_t i = 0; i < kGaussNodes.size(); ++i) {
        acc += kGaussWeights[i] * f(mid + half * kGaussNodes[i]);
    }
    return 0.5 * acc;
}

}  // namespace ldlab
