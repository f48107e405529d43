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

// Counter-based random streams.
//
// Every Monte Carlo sample owns a private substream addressed by
// (master seed, sample index). Philox4x32-10 (Salmon et al., SC'11) turns a
// 128-bit counter into 128 random bits under a 64-bit key:
//
//   key     = splitmix64(seed)              (split into two 32-bit words)
//   counter = { block_lo, block_hi, index_lo, index_hi }
//
// where `block` counts the 128-bit blocks already consumed by the substream.
// Draws are therefore a pure function of (seed, index, draw position) and do
// not depend on which thread runs the sample or in what order.

#include <array>
#include <cstdint>

namespace ldlab {

constexpr std::uint64_t splitmix64(std::uint64_t z) noexcept {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

class Philox4x32 {
public:
    using Block = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static constexpr Block generate(Block ctr, Key key) noexcept {
        for (int round = 0; round < 10; ++round) {
            if (round > 0) {
                key[0] += kW0;
                key[1] += kW1;
            }
            const std::uint64_t p0 = std::uint64_t{kM0} * ctr[0];
            const std::uint64_t p1 = std::uint64_t{kM1} * ctr[2];
            ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0],
                   static_cast<std::uint32_t>(p1),
                   static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1],
                   static_cast<std::uint32_t>(p0)};
        }
        return ctr;
    }

private:
    static constexpr std::uint32_t kM0 = 0xD2511F53;
    static constexpr std::uint32_t kM1 = 0xCD9E8D57;
    static constexpr std::uint32_t kW0 = 0x9E3779B9;
    static constexpr std::uint32_t kW1 = 0xBB67AE85;
};

/// Sequential view of the substream (seed, index).
class SampleStream {
public:
    SampleStream(std::uint64_t seed, std::uint64_t index) noexcept
        : index_(index) {
        const std::uint64_t k = splitmix64(seed);
        key_ = {static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k >> 32)};
    }

    std::uint64_t next_u64() noexcept {
        if (pos_ == 2) refill();
        return buf_[pos_++];
    }

    /// Uniform on [0, 1) with 53 random bits.
    double next_uniform() noexcept {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// The next `nbits` (1..64) bits of the stream, as the low bits of the result.
    std::uint64_t next_bits(unsigned nbits) noexcept {
        if (nbits >= 64) return next_u64();
        if (bits_left_ < nbits) {
            bit_buf_ = next_u64();
            bits_left_ = 64;
        }
        const std::uint64_t out = bit_buf_ >> (64 - nbits);
        bit_buf_ <<= nbits;
        bits_left_ -= nbits;
        return out;
    }

    std::uint64_t index() const noexcept { return index_; }

private:
    void refill() noexcept {
        const Philox4x32::Block ctr = {
            static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32),
            static_cast<std::uint32_t>(index_), static_cast<std::uint32_t>(index_ >> 32)};
        const auto out = Philox4x32::generate(ctr, key_);
        buf_[0] = (std::uint64_t{out[1]} << 32) | out[0];
        buf_[1] = (std::uint64_t{out[3]} << 32) | out[2];
        ++block_;
        pos_ = 0;
    }

    Philox4x32::Key key_{};
    std::uint64_t index_;
    std::uint64_t block_ = 0;
    std::array<std::uint64_t, 2> buf_{};
    unsigned pos_ = 2;
    std::uint64_t bit_buf_ = 0;
    unsigned bits_left_ = 0;
};

}  // namespace ldlab
