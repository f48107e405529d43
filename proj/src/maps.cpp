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

#include "ldlab/maps.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <sstream>

#include "ldlab/errors.hpp"
#include "ldlab/numeric.hpp"
#include "ldlab/ulam.hpp"

namespace ldlab::maps {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Below this the correction factor of f_gamma is within (log 2 / 690)^(1/gamma - 1)
// of 1 and log(x) approaches the underflow range.
constexpr double kTinyX = 1e-300;

double word_to_unit(std::uint64_t w) {
    return static_cast<double>(w >> 11) * 0x1.0p-53;
}

std::string format_double(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

}  // namespace

MapSystem MapSystem::doubling() {
    MapSystem m;
    m.kind_ = MapKind::Doubling;
    m.gamma_ = 1.0;
    m.exponent_ = 0.0;
    return m;
}

MapSystem MapSystem::intermittent(double gamma) {
    if (!(gamma > 0.0 && gamma <= 1.0)) {
        throw DomainError("intermittent map: gamma = " + format_double(gamma) +
                          " outside (0,1]; the decay exponent theta = gamma requires "
                          "theta in (0,1]");
    }
    MapSystem m;
    m.kind_ = MapKind::IntermittentStretched;
    m.gamma_ = gamma;
    m.exponent_ = 1.0 / gamma - 1.0;
    return m;
}

MapSystem MapSystem::viana(const VianaParams& params) {
    if (!(params.a0 > 1.0 && params.a0 < 2.0)) {
        throw DomainError("viana map: a0 = " + format_double(params.a0) + " outside (1,2)");
    }
    if (!(params.alpha > 0.0)) {
        throw DomainError("viana map: alpha must be > 0");
    }
    if (params.d < 2) {
        throw DomainError("viana map: d must be an integer >= 2");
    }
    MapSystem m;
    m.kind_ = MapKind::Viana;
    m.viana_ = params;
    m.fibre_ = viana_fibre_interval(params.a0, params.alpha);

    // Forward invariance of S^1 x I on a 300 x 300 grid.
    constexpr int kGrid = 300;
    for (int i = 0; i < kGrid; ++i) {
        const double s = static_cast<double>(i) / kGrid;
        for (int j = 0; j <= kGrid; ++j) {
            const double x = m.fibre_.lo + (m.fibre_.hi - m.fibre_.lo) * j / kGrid;
            const Point q = m.apply({std::clamp(x, m.fibre_.lo, m.fibre_.hi), s});
            if (!m.in_domain(q)) {
                throw DomainError("viana map: fibre interval is not forward invariant at s = " +
                                  format_double(s) + ", x = " + format_double(x));
            }
        }
    }
    return m;
}

MapSystem MapSystem::viana() {
    VianaParams p;
    p.a0 = misiurewicz_a0();
    return viana(p);
}

std::string MapSystem::id() const {
    switch (kind_) {
    case MapKind::Doubling:
        return "doubling";
    case MapKind::IntermittentStretched:
        return "intermittent(gamma=" + format_double(gamma_) + ")";
    case MapKind::Viana:
        return "viana(a0=" + format_double(viana_.a0) + ",alpha=" + format_double(viana_.alpha) +
               ",d=" + std::to_string(viana_.d) + ")";
    }
    return "unknown";
}

bool MapSystem::in_domain(const Point& p) const {
    if (kind_ == MapKind::Viana) {
        return p.s >= 0.0 && p.s < 1.0 && fibre_.contains(p.x);
    }
    return p.x >= 0.0 && p.x <= 1.0;
}

double MapSystem::left_branch(double x) const {
    if (exponent_ == 0.0) return 2.0 * x;
    if (x < kTinyX) return x;
    const double ratio = std::numbers::ln2 / std::abs(std::log(x));
    return x * (1.0 + std::pow(ratio, exponent_));
}

Point MapSystem::apply(const Point& p) const {
    if (!in_domain(p)) {
        throw DomainError(id() + ": point (" + format_double(p.x) + ", " + format_double(p.s) +
                          ") outside the domain");
    }
    switch (kind_) {
    case MapKind::Doubling:
        return {p.x <= 0.5 ? 2.0 * p.x : 2.0 * p.x - 1.0, 0.0};
    case MapKind::IntermittentStretched:
        return {p.x <= 0.5 ? left_branch(p.x) : 2.0 * p.x - 1.0, 0.0};
    case MapKind::Viana: {
        const double ds = viana_.d * p.s;
        const double a = viana_.a0 + viana_.alpha * std::sin(kTwoPi * p.s);
        return {a - p.x * p.x, ds - std::floor(ds)};
    }
    }
    return p;
}

double misiurewicz_a0(double tol) {
    auto residual = [](double a) {
        const double fixed = (-1.0 + std::sqrt(1.0 + 4.0 * a)) / 2.0;
        const double q2 = a - a * a;
        return (a - q2 * q2) - fixed;
    };
    double lo = 1.0;
    double hi = 2.0;
    double flo = residual(lo);
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        const double fm = residual(mid);
        if ((fm > 0.0) == (flo > 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

Interval viana_fibre_interval(double a0, double alpha, int max_iter) {
    const double a_max = a0 + alpha;
    const double a_min = a0 - alpha;
    Interval cur{-a_max, a_max};
    for (int it = 0; it < max_iter; ++it) {
        const double reach = std::max(cur.lo * cur.lo, cur.hi * cur.hi);
        const Interval next{a_min - reach, a_max};
        if (!(next.lo > -2.0) || !(next.hi < 2.0)) break;
        if (next.lo == cur.lo && next.hi == cur.hi) return cur;
        cur = next;
    }
    throw DomainError("viana map: no trapping fibre interval inside (-2,2) for a0 = " +
                      format_double(a0) + ", alpha = " + format_double(alpha));
}

std::vector<Point> orbit(const MapSystem& map, const Point& p0, std::size_t n) {
    std::vector<Point> out;
    out.reserve(n + 1);
    out.push_back(p0);
    for (std::size_t k = 0; k < n; ++k) out.push_back(map.apply(out.back()));
    return out;
}

// ---------------------------------------------------------------------------

double Observable::raw(const Point& p) const {
    switch (kind) {
    case ObservableKind::Cosine:
    case ObservableKind::VianaFiber:
        return std::cos(kTwoPi * p.x);
    case ObservableKind::CoordinateCentered:
        return p.x;
    case ObservableKind::HolderBump: {
        const double dist = std::max({plateau_lo - p.x, p.x - plateau_hi, 0.0});
        const double v = 1.0 - std::min(1.0, dist / ramp);
        return holder == 1.0 ? v : std::pow(v, holder);
    }
    case ObservableKind::Constant:
        return value;
    }
    return 0.0;
}

double Observable::sup_norm() const {
    switch (kind) {
    case ObservableKind::Cosine:
    case ObservableKind::VianaFiber:
        return 1.0 + std::abs(offset);
    case ObservableKind::CoordinateCentered:
    case ObservableKind::HolderBump:
        return std::max(std::abs(offset), std::abs(1.0 - offset));
    case ObservableKind::Constant:
        return std::abs(value - offset);
    }
    return 0.0;
}

bool Observable::is_zero() const {
    return kind == ObservableKind::Constant && value == offset;
}

std::string Observable::id() const {
    std::string base;
    switch (kind) {
    case ObservableKind::Cosine:
        base = "cosine";
        break;
    case ObservableKind::VianaFiber:
        base = "viana_fiber";
        break;
    case ObservableKind::CoordinateCentered:
        base = "coordinate";
        break;
    case ObservableKind::HolderBump:
        base = "bump([" + format_double(plateau_lo) + "," + format_double(plateau_hi) +
               "],ramp=" + format_double(ramp) + ",holder=" + format_double(holder) + ")";
        break;
    case ObservableKind::Constant:
        base = "constant(" + format_double(value) + ")";
        break;
    }
    if (offset != 0.0) base += "-" + format_double(offset);
    return base;
}

double birkhoff_sum(const MapSystem& map, const Observable& obs, const Point& p0,
                    std::size_t n) {
    Point p = p0;
    if (n >= kCompensatedThreshold) {
        NeumaierSum acc;
        for (std::size_t k = 0; k < n; ++k) {
            acc.add(obs(p));
            if (k + 1 < n) p = map.apply(p);
        }
        return acc.value();
    }
    double acc = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        acc += obs(p);
        if (k + 1 < n) p = map.apply(p);
    }
    return acc;
}

Centered center(const MapSystem& map, const Observable& obs, CenterMethod method,
                std::size_t budget, std::uint64_t seed) {
    if (budget < 1000) throw DomainError("center: budget must be >= 1000");
    CenteringReport rep;
    rep.method = method;
    rep.budget = budget;

    if (method == CenterMethod::UlamDensity) {
        if (!map.is_one_dimensional()) {
            throw UnsupportedError("center: Ulam density unavailable for " + map.id() +
                                   "; use the long_orbit method");
        }
        const std::size_t bins = std::bit_ceil(std::max<std::size_t>(budget, 16));
        const auto fine = ulam::build_ulam(map, bins);
        const auto coarse = ulam::build_ulam(map, bins / 2);
        rep.mean = ulam::mu_mean(fine, ulam::discretize(obs, bins));
        rep.uncertainty = std::abs(rep.mean - ulam::mu_mean(coarse, ulam::discretize(obs, bins / 2)));
        rep.tolerance = 1e-4;
    } else {
        SampleStream stream(seed, 0);
        OrbitWalker walker(map, stream);
        walker.advance(1000);
        constexpr std::size_t kBatches = 50;
        const std::size_t per_batch = budget / kBatches;
        std::vector<double> batch_means;
        batch_means.reserve(kBatches);
        NeumaierSum total;
        std::size_t count = 0;
        for (std::size_t b = 0; b < kBatches; ++b) {
            const std::size_t len = (b + 1 == kBatches) ? budget - per_batch * b : per_batch;
            NeumaierSum acc;
            for (std::size_t i = 0; i < len; ++i) {
                acc.add(obs(walker.point()));
                walker.step();
            }
            batch_means.push_back(acc.value() / static_cast<double>(len));
            total.add(acc.value());
            count += len;
        }
        rep.mean = total.value() / static_cast<double>(count);
        const auto [bm_mean, bm_var] = mean_and_variance(batch_means);
        (void)bm_mean;
        rep.uncertainty = std::sqrt(bm_var / static_cast<double>(kBatches));
        rep.tolerance = 3.0 * rep.uncertainty;
    }

    Observable out = obs;
    out.offset += rep.mean;
    return {out, rep};
}

// ---------------------------------------------------------------------------

OrbitWalker::OrbitWalker(const MapSystem& map, SampleStream& stream)
    : map_(&map), stream_(&stream) {
    switch (map.kind()) {
    case MapKind::Doubling:
        shift_bits_ = 1;
        word_ = stream.next_u64();
        p_ = {word_to_unit(word_), 0.0};
        break;
    case MapKind::IntermittentStretched:
        p_ = {stream.next_uniform(), 0.0};
        break;
    case MapKind::Viana: {
        const auto d = static_cast<std::uint64_t>(map.viana_params().d);
        shift_bits_ = std::has_single_bit(d) ? static_cast<unsigned>(std::countr_zero(d)) : 0;
        word_ = stream.next_u64();
        const auto& I = map.fibre();
        const double x = std::min(I.lo + (I.hi - I.lo) * stream.next_uniform(), I.hi);
        p_ = {x, word_to_unit(word_)};
        break;
    }
    }
}

std::uint64_t OrbitWalker::expand(std::uint64_t w, std::uint64_t d, unsigned bits) {
    if (bits > 0) return (w << bits) | stream_->next_bits(bits);
    const std::uint64_t r = stream_->next_u64();
    const auto carry = static_cast<std::uint64_t>((static_cast<unsigned __int128>(d) * r) >> 64);
    return w * d + carry;
}

void OrbitWalker::step() {
    switch (map_->kind()) {
    case MapKind::Doubling:
        word_ = expand(word_, 2, shift_bits_);
        p_.x = word_to_unit(word_);
        break;
    case MapKind::IntermittentStretched:
        p_ = map_->apply(p_);
        break;
    case MapKind::Viana: {
        const auto& v = map_->viana_params();
        const double a = v.a0 + v.alpha * std::sin(kTwoPi * p_.s);
        p_.x = a - p_.x * p_.x;
        word_ = expand(word_, static_cast<std::uint64_t>(v.d), shift_bits_);
        p_.s = word_to_unit(word_);
        break;
    }
    }
}

}  // namespace ldlab::maps
