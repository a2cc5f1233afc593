#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <limits>

namespace entrance {

/// Philox4x32-10 block function (Salmon et al., SC'11).
class Philox4x32 {
public:
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static Counter apply(Counter ctr, Key key) noexcept {
        for (int round = 0; round < 10; ++round) {
            if (round > 0) {
                key[0] += kWeyl0;
                key[1] += kWeyl1;
            }
            const std::uint64_t p0 = std::uint64_t{kMul0} * ctr[0];
            const std::uint64_t p1 = std::uint64_t{kMul1} * ctr[2];
            const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
            const auto lo0 = static_cast<std::uint32_t>(p0);
            const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
            const auto lo1 = static_cast<std::uint32_t>(p1);
            ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        }
        return ctr;
    }

private:
    static constexpr std::uint32_t kMul0 = 0xD2511F53u;
    static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
    static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
    static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
};

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

/// Identifies an independent family of paths: the user seed plus a stream id
/// separating experiments (legs, grid cells) that share a seed.
struct StreamKey {
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;

    Philox4x32::Key philox_key() const noexcept {
        // stream 0 keys directly off the seed so that plain ensembles are
        // addressed by (seed, path_index) alone
        const std::uint64_t k = stream == 0 ? seed : splitmix64(seed ^ splitmix64(stream));
        return {static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k >> 32)};
    }
};

/// Stream id derived from a tag and a real-valued coordinate (a start value),
/// so the same experiment cell reproduces regardless of grid composition.
inline std::uint64_t stream_id(std::uint64_t tag, double coordinate) noexcept {
    const auto bits = std::bit_cast<std::uint64_t>(coordinate);
    return splitmix64(splitmix64(tag + 1) ^ bits);
}

/// Uniform random bit generator over the counter space of one
/// (path, step) cell. Words are produced from successive Philox blocks; the
/// block index is the only mutable state.
class CounterStream {
public:
    using result_type = std::uint32_t;

    CounterStream(const StreamKey& key, std::uint64_t path_index, std::uint32_t step) noexcept
        : key_(key.philox_key()),
          path_lo_(static_cast<std::uint32_t>(path_index)),
          path_hi_(static_cast<std::uint32_t>(path_index >> 32)),
          step_(step) {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept {
        if (used_ == 4) {
            buffer_ = Philox4x32::apply({block_++, step_, path_lo_, path_hi_}, key_);
            used_ = 0;
        }
        return buffer_[used_++];
    }

    /// Uniform double in the open interval (0, 1) from 53 random bits.
    double uniform_open() noexcept {
        const std::uint64_t hi = (*this)();
        const std::uint64_t lo = (*this)();
        const std::uint64_t bits = ((hi << 32) | lo) >> 11;
        return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
    }

private:
    Philox4x32::Key key_;
    std::uint32_t path_lo_;
    std::uint32_t path_hi_;
    std::uint32_t step_;
    std::uint32_t block_ = 0;
    Philox4x32::Counter buffer_{};
    int used_ = 4;
};

}  // namespace entrance
