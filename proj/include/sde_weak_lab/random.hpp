#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace sdelab {

/// One (master_seed, trajectory, substream) triple addresses an independent
/// random stream. Stream output is a pure function of the triple and the
/// call sequence, so parallel runs are reproducible on any thread count.
struct StreamSpec {
    std::uint64_t master_seed = 0;
    std::uint64_t trajectory = 0;
    std::uint32_t substream = 0;
};

namespace detail {

// Philox 4x32-10 block cipher (Salmon et al., SC'11). Counter layout:
// (block, substream, trajectory_lo, trajectory_hi), key = master seed.
struct PhiloxBlock {
    std::uint32_t w[4];
};

inline PhiloxBlock philox4x32_10(std::uint32_t c0, std::uint32_t c1,
                                 std::uint32_t c2, std::uint32_t c3,
                                 std::uint32_t k0, std::uint32_t k1) {
    constexpr std::uint32_t kMul0 = 0xD2511F53u;
    constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
    constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
    constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
    for (int round = 0; round < 10; ++round) {
        if (round != 0) {
            k0 += kWeyl0;
            k1 += kWeyl1;
        }
        const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * c0;
        const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * c2;
        const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
        const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
        const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
        const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
        const std::uint32_t n0 = hi1 ^ c1 ^ k0;
        const std::uint32_t n1 = lo1;
        const std::uint32_t n2 = hi0 ^ c3 ^ k1;
        const std::uint32_t n3 = lo0;
        c0 = n0;
        c1 = n1;
        c2 = n2;
        c3 = n3;
    }
    return PhiloxBlock{{c0, c1, c2, c3}};
}

}  // namespace detail

/// Splittable counter-based random stream. Gaussians come from Box-Muller
/// on 53-bit uniforms; each Philox block yields two uniforms. The sequence
/// of values depends only on the StreamSpec and the order of calls.
class RandomStream {
public:
    RandomStream() : RandomStream(StreamSpec{}) {}

    explicit RandomStream(const StreamSpec& spec)
        : key0_(static_cast<std::uint32_t>(spec.master_seed)),
          key1_(static_cast<std::uint32_t>(spec.master_seed >> 32)),
          ctr1_(spec.substream),
          ctr2_(static_cast<std::uint32_t>(spec.trajectory)),
          ctr3_(static_cast<std::uint32_t>(spec.trajectory >> 32)) {}

    RandomStream(std::uint64_t master_seed, std::uint64_t trajectory,
                 std::uint32_t substream = 0)
        : RandomStream(StreamSpec{master_seed, trajectory, substream}) {}

    /// Uniform draw on [0, 1).
    double uniform() {
        if (pending_uniforms_ == 0) refill();
        return uniform_buf_[--pending_uniforms_];
    }

    /// Standard normal via Box-Muller; pairs are cached.
    double normal() {
        if (has_cached_normal_) {
            has_cached_normal_ = false;
            return cached_normal_;
        }
        const double u1 = 1.0 - uniform();  // (0, 1], keeps the log finite
        const double u2 = uniform();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        cached_normal_ = radius * std::sin(angle);
        has_cached_normal_ = true;
        return radius * std::cos(angle);
    }

    /// Rademacher draw, +1 or -1 with equal probability.
    double sign() { return uniform() < 0.5 ? -1.0 : 1.0; }

    std::uint32_t blocks_consumed() const { return block_; }

private:
    void refill() {
        const detail::PhiloxBlock b =
            detail::philox4x32_10(block_++, ctr1_, ctr2_, ctr3_, key0_, key1_);
        const std::uint64_t bits0 =
            (static_cast<std::uint64_t>(b.w[0]) << 32) | b.w[1];
        const std::uint64_t bits1 =
            (static_cast<std::uint64_t>(b.w[2]) << 32) | b.w[3];
        // Serve index 1 first so draws appear in block order.
        uniform_buf_[1] = static_cast<double>(bits0 >> 11) * 0x1.0p-53;
        uniform_buf_[0] = static_cast<double>(bits1 >> 11) * 0x1.0p-53;
        pending_uniforms_ = 2;
    }

    std::uint32_t key0_, key1_;
    std::uint32_t ctr1_, ctr2_, ctr3_;
    std::uint32_t block_ = 0;
    double uniform_buf_[2] = {0.0, 0.0};
    int pending_uniforms_ = 0;
    double cached_normal_ = 0.0;
    bool has_cached_normal_ = false;
};

}  // namespace sdelab
