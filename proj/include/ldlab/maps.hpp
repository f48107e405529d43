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

#include <cstdint>
#include <string>
#include <vector>

#include "ldlab/rng.hpp"

namespace ldlab::maps {

/// Phase-space point. One-dimensional systems use `x` only; the Viana skew
/// product uses (s, x) with s on the circle and x on the fibre interval.
struct Point {
    double x = 0.0;
    double s = 0.0;

    friend bool operator==(const Point&, const Point&) = default;
};

enum class MapKind { IntermittentStretched, Doubling, Viana };

struct VianaParams {
    double a0 = 0.0;
    double alpha = 1e-2;
    int d = 16;
};

/// Closed fibre interval [lo, hi] forward invariant under every fibre map.
struct Interval {
    double lo = 0.0;
    double hi = 1.0;
    bool contains(double v) const { return v >= lo && v <= hi; }
};

class MapSystem {
public:
    static MapSystem doubling();
    /// Throws DomainError unless gamma in (0, 1].
    static MapSystem intermittent(double gamma);
    /// Viana map with b(s) = sin(2 pi s). The fibre interval is computed at
    /// construction and checked on a dense grid; failures throw DomainError.
    static MapSystem viana(const VianaParams& params);
    /// Viana map with the default parameters (d = 16, alpha = 1e-2, a0 from
    /// `misiurewicz_a0`).
    static MapSystem viana();

    MapKind kind() const { return kind_; }
    double gamma() const { return gamma_; }
    const VianaParams& viana_params() const { return viana_; }
    const Interval& fibre() const { return fibre_; }
    bool is_one_dimensional() const { return kind_ != MapKind::Viana; }

    /// Stable text identifier, e.g. "intermittent(gamma=0.5)".
    std::string id() const;

    bool in_domain(const Point& p) const;

    /// Single step of the map. Throws DomainError outside the domain.
    Point apply(const Point& p) const;

    /// Left branch of f_gamma on [0, 1/2] (also the doubling left branch when
    /// gamma = 1). Strictly increasing, maps [0, 1/2] onto [0, 1].
    double left_branch(double x) const;

private:
    MapKind kind_ = MapKind::Doubling;
    double gamma_ = 1.0;
    double exponent_ = 0.0;  // 1/gamma - 1
    VianaParams viana_{};
    Interval fibre_{0.0, 1.0};
};

/// Parameter a in (1, 2) for which the critical orbit of Q(x) = a - x^2
/// lands on the fixed point p+ = (-1 + sqrt(1 + 4a))/2 after three steps.
/// Bisection to `tol`.
double misiurewicz_a0(double tol = 1e-12);

/// Trapping interval of the fibre envelope maps x -> a_max - x^2 and
/// x -> a_min - x^2; throws DomainError when no interval inside (-2, 2)
/// emerges within `max_iter` iterations.
Interval viana_fibre_interval(double a0, double alpha, int max_iter = 1000);

std::vector<Point> orbit(const MapSystem& map, const Point& p0, std::size_t n);

// ---------------------------------------------------------------------------

enum class ObservableKind { Cosine, CoordinateCentered, HolderBump, VianaFiber, Constant };

/// Bounded observable phi - offset.
///
/// HolderBump is the smoothed indicator of [plateau_lo, plateau_hi]:
///   (1 - min(1, dist(x, plateau) / ramp))^holder,
/// which is Holder continuous with exponent `holder`.
struct Observable {
    ObservableKind kind = ObservableKind::Cosine;
    double offset = 0.0;
    double value = 0.0;  // Constant only
    double plateau_lo = 0.2;
    double plateau_hi = 0.4;
    double ramp = 0.1;
    double holder = 1.0;

    static Observable cosine() { return {ObservableKind::Cosine}; }
    static Observable coordinate() { return {ObservableKind::CoordinateCentered}; }
    static Observable bump() { return {ObservableKind::HolderBump}; }
    static Observable viana_fiber() { return {ObservableKind::VianaFiber}; }
    static Observable constant(double v) {
        Observable o{ObservableKind::Constant};
        o.value = v;
        return o;
    }

    double raw(const Point& p) const;
    double operator()(const Point& p) const { return raw(p) - offset; }

    /// sup |phi - offset| over the observable's natural range.
    double sup_norm() const;
    /// True when the centred observable vanishes identically.
    bool is_zero() const;
    std::string id() const;
};

/// phi_n(p0) = sum_{k<n} phi(T^k p0), iterating `apply` in double precision.
double birkhoff_sum(const MapSystem& map, const Observable& obs, const Point& p0,
                    std::size_t n);

enum class CenterMethod { UlamDensity, LongOrbit };

struct CenteringReport {
    CenterMethod method = CenterMethod::UlamDensity;
    double mean = 0.0;         // estimated mu-mean of the input observable
    double uncertainty = 0.0;  // refinement difference (ulam) or batch-means stderr
    double tolerance = 0.0;
    std::size_t budget = 0;
};

struct Centered {
    Observable obs;
    CenteringReport report;
};

/// Shift `obs` so its estimated mu-mean vanishes. `budget` is the number of
/// Ulam bins (rounded up to a power of two) or the long-orbit length.
/// Viana maps only support LongOrbit; UlamDensity throws UnsupportedError.
Centered center(const MapSystem& map, const Observable& obs, CenterMethod method,
                std::size_t budget, std::uint64_t seed = 1);

// ---------------------------------------------------------------------------

/// Orbit of a point drawn uniformly from the domain, driven by a sample stream.
///
/// Coordinates the map expands by an integer factor d (the doubling map's x,
/// the Viana base s) are held as 64-bit binary fractions w and advanced by
/// w' = d w + floor(d r / 2^64) with r fresh from the stream. This is the
/// exact law of the orbit of a Lebesgue-random real: the digits beyond the
/// word are uniform and independent of it. Plain double iteration would
/// shift every digit out and freeze the orbit at 0.
class OrbitWalker {
public:
    OrbitWalker(const MapSystem& map, SampleStream& stream);

    const Point& point() const { return p_; }
    void step();
    void advance(std::size_t n) {
        for (std::size_t i = 0; i < n; ++i) step();
    }

private:
    std::uint64_t expand(std::uint64_t w, std::uint64_t d, unsigned bits);

    const MapSystem* map_;
    SampleStream* stream_;
    Point p_{};
    std::uint64_t word_ = 0;
    unsigned shift_bits_ = 0;  // log2(d) when d is a power of two, else 0
};

}  // namespace ldlab::maps
