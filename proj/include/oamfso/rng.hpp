#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <utility>

#include "oamfso/common.hpp"

namespace oamfso {

// Philox 4x64-10 counter-based generator. Every random quantity in the
// toolkit is drawn from a stream addressed by (master seed, domain, index
// pair), so results do not depend on execution order or worker count.
struct Philox4x64 {
    static constexpr std::uint64_t kMul0 = 0xD2E7470EE14C6C93ull;
    static constexpr std::uint64_t kMul1 = 0xCA5A826395121157ull;
    static constexpr std::uint64_t kWeyl0 = 0x9E3779B97F4A7C15ull;
    static constexpr std::uint64_t kWeyl1 = 0xBB67AE8584CAA73Bull;

    using Counter = std::array<std::uint64_t, 4>;
    using Key = std::array<std::uint64_t, 2>;

    static Counter round_once(const Counter& ctr, const Key& key) {
        using u128 = unsigned __int128;
        const u128 p0 = static_cast<u128>(kMul0) * ctr[0];
        const u128 p1 = static_cast<u128>(kMul1) * ctr[2];
        const auto lo0 = static_cast<std::uint64_t>(p0);
        const auto hi0 = static_cast<std::uint64_t>(p0 >> 64);
        const auto lo1 = static_cast<std::uint64_t>(p1);
        const auto hi1 = static_cast<std::uint64_t>(p1 >> 64);
        return {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    }

    static Counter block(Counter ctr, Key key) {
        for (int round = 0; round < 10; ++round) {
            if (round != 0) {
                key[0] += kWeyl0;
                key[1] += kWeyl1;
            }
            ctr = round_once(ctr, key);
        }
        return ctr;
    }

    // 256-bit little-endian counter increment.
    static void increment(Counter& ctr) {
        for (auto& word : ctr) {
            if (++word != 0) break;
        }
    }
};

// Stream identifiers; part of the persistent seed-derivation contract.
namespace stream_domain {
inline constexpr std::uint64_t kScreen = 0x5343524eull;          // turbulence screens
inline constexpr std::uint64_t kNoise = 0x4e4f4953ull;           // receiver noise
inline constexpr std::uint64_t kBits = 0x42495453ull;            // payload bits
inline constexpr std::uint64_t kChannelPick = 0x4348414eull;     // subcarrier gain assignment
inline constexpr std::uint64_t kInterfererBits = 0x58424954ull;  // crosstalk payloads
inline constexpr std::uint64_t kTest = 0x54455354ull;            // unit-test scratch streams
} // namespace stream_domain

class RngStream {
public:
    RngStream(std::uint64_t master_seed, std::uint64_t domain,
              std::uint64_t index0 = 0, std::uint64_t index1 = 0)
        : key_{master_seed, domain}, base_{0, index0, index1, 0} {}

    std::uint64_t next_u64() {
        if (pos_ == 4) {
            buffer_ = Philox4x64::block(base_, key_);
            Philox4x64::increment(base_);
            pos_ = 0;
        }
        return buffer_[pos_++];
    }

    // Uniform on [0, 1) with 53 random bits.
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Uniform on (0, 1]; safe as a log() argument.
    double uniform_pos() {
        return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    }

    // Unbiased-enough integer in [0, n) via 128-bit multiply.
    std::uint64_t uniform_int(std::uint64_t n) {
        using u128 = unsigned __int128;
        return static_cast<std::uint64_t>((static_cast<u128>(next_u64()) * n) >> 64);
    }

    // Circular complex Gaussian with unit variance per axis (E|z|^2 = 2),
    // drawn in polar form so exactly two uniforms are consumed.
    cd complex_normal() {
        const double r = std::sqrt(-2.0 * std::log(uniform_pos()));
        const double theta = 2.0 * kPi * uniform();
        return {r * std::cos(theta), r * std::sin(theta)};
    }

    double normal() {
        if (have_cached_) {
            have_cached_ = false;
            return cached_;
        }
        const cd z = complex_normal();
        cached_ = z.imag();
        have_cached_ = true;
        return z.real();
    }

    int bit() {
        if (bits_left_ == 0) {
            bit_word_ = next_u64();
            bits_left_ = 64;
        }
        const int b = static_cast<int>(bit_word_ & 1u);
        bit_word_ >>= 1;
        --bits_left_;
        return b;
    }

private:
    Philox4x64::Key key_;
    Philox4x64::Counter base_;
    std::array<std::uint64_t, 4> buffer_{};
    int pos_ = 4;
    double cached_ = 0.0;
    bool have_cached_ = false;
    std::uint64_t bit_word_ = 0;
    int bits_left_ = 0;
};

} // namespace oamfso
