#pragma once

// Philox4x32-10 counter-based generator. A trial's randomness is a pure function of
// (master seed, SNR index, trial index), so trials can run in any order on any thread.

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>

namespace stc {

using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

inline PhiloxCounter philox4x32_10(PhiloxCounter c, PhiloxKey k) {
    constexpr std::uint32_t m0 = 0xD2511F53u, m1 = 0xCD9E8D57u;
    constexpr std::uint32_t w0 = 0x9E3779B9u, w1 = 0xBB67AE85u;
    for (int round = 0; round < 10; ++round) {
        if (round > 0) {
            k[0] += w0;
            k[1] += w1;
        }
        const std::uint64_t p0 = std::uint64_t(m0) * c[0];
        const std::uint64_t p1 = std::uint64_t(m1) * c[2];
        c = {std::uint32_t(p1 >> 32) ^ c[1] ^ k[0], std::uint32_t(p1), std::uint32_t(p0 >> 32) ^ c[3] ^ k[1],
             std::uint32_t(p0)};
    }
    return c;
}

/// The random stream of one trial. Counter layout: (block, trial low, trial high, stream id).
class TrialStream {
public:
    TrialStream(std::uint64_t master_seed, std::uint32_t stream_id, std::uint64_t trial)
        : key_{std::uint32_t(master_seed), std::uint32_t(master_seed >> 32)},
          counter_{0u, std::uint32_t(trial), std::uint32_t(trial >> 32), stream_id} {}

    std::uint32_t next_u32() {
        if (used_ == 4) {
            block_ = philox4x32_10(counter_, key_);
            ++counter_[0];
            used_ = 0;
        }
        return block_[used_++];
    }

    /// Uniform on (0, 1), never 0 or 1.
    double uniform() { return (double(next_u32()) + 0.5) * 0x1p-32; }

    /// Uniform integer in [0, m) from 64 random bits.
    std::uint64_t index(std::uint64_t m) {
        const std::uint64_t hi = next_u32();
        const std::uint64_t bits = (hi << 32) | next_u32();
        return std::uint64_t((unsigned __int128)bits * m >> 64);
    }

    /// Circular complex Gaussian with E|z|² = 1 (Box–Muller).
    std::complex<double> complex_normal() {
        const double u1 = uniform(), u2 = uniform();
        const double radius = std::sqrt(-std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        return {radius * std::cos(angle), radius * std::sin(angle)};
    }

private:
    PhiloxKey key_;
    PhiloxCounter counter_;
    PhiloxCounter block_{};
    int used_ = 4;
};

} // namespace stc
