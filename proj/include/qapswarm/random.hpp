#pragma once

// Counter-based random streams (Philox4x32-10, Salmon et al., SC'11).
// A stream is addressed by (seed, particle, iteration, purpose); draws depend on
// nothing else, so parallel phases give the same numbers for any worker count.

#include <array>
#include <cstdint>
#include <limits>

namespace qapswarm {

enum class StreamPurpose : std::uint32_t {
    Init = 0,
    Step = 1,       // r2, r3, then aggregation tie-breaks
    Migration = 2,
};

/// Particle slot used by host-side sequential phases.
inline constexpr std::uint32_t kHostStream = 0xFFFFFFFFu;

struct StreamId {
    std::uint32_t particle = 0;
    std::uint32_t iteration = 0;
    StreamPurpose purpose = StreamPurpose::Init;
};

namespace detail {

inline constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
inline constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
inline constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
inline constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
    const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(p >> 32);
    lo = static_cast<std::uint32_t>(p);
}

inline std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> ctr, std::array<std::uint32_t, 2> key) {
    for (int round = 0; round < 10; ++round) {
        std::uint32_t hi0, lo0, hi1, lo1;
        mulhilo(kPhiloxM0, ctr[0], hi0, lo0);
        mulhilo(kPhiloxM1, ctr[2], hi1, lo1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        key[0] += kPhiloxW0;
        key[1] += kPhiloxW1;
    }
    return ctr;
}

}  // namespace detail

/// One independent random stream. Satisfies UniformRandomBitGenerator (32-bit).
class RandomStream {
public:
    using result_type = std::uint32_t;

    RandomStream(std::uint64_t seed, StreamId id, std::uint32_t first_block = 0)
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
          id_(id),
          block_(first_block) {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()() {
        if (used_ == 4) refill();
        return buffer_[used_++];
    }

    std::uint64_t next_u64() {
        const std::uint64_t hi = (*this)();
        const std::uint64_t lo = (*this)();
        return (hi << 32) | lo;
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    /// Uniform integer in [0, bound), bound >= 1. Lemire's multiply-shift with rejection.
    std::uint64_t uniform_index(std::uint64_t bound) {
        std::uint64_t x = next_u64();
        unsigned __int128 m = static_cast<unsigned __int128>(x) * bound;
        auto low = static_cast<std::uint64_t>(m);
        if (low < bound) {
            const std::uint64_t threshold = (0 - bound) % bound;
            while (low < threshold) {
                x = next_u64();
                m = static_cast<unsigned __int128>(x) * bound;
                low = static_cast<std::uint64_t>(m);
            }
        }
        return static_cast<std::uint64_t>(m >> 64);
    }

    /// Number of 128-bit blocks consumed so far (including a partly used one).
    std::uint32_t blocks_used() const { return block_; }

private:
    void refill() {
        buffer_ = detail::philox4x32_10(
            {block_, static_cast<std::uint32_t>(id_.purpose), id_.iteration, id_.particle}, key_);
        ++block_;
        used_ = 0;
    }

    std::array<std::uint32_t, 2> key_;
    StreamId id_;
    std::uint32_t block_;
    std::array<std::uint32_t, 4> buffer_{};
    int used_ = 4;
};

}  // namespace qapswarm
