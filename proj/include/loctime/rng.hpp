#pragma once

#include <cstdint>

namespace loctime {

// splitmix64 finalizer; also used to derive independent per-path seeds
// from (base_seed, path_index) so campaign reductions never depend on
// worker scheduling.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t base, std::uint64_t index) {
    std::uint64_t s = base ^ (0x6a09e667f3bcc909ULL + index * 0x9e3779b97f4a7c15ULL);
    (void)splitmix64(s);
    return splitmix64(s);
}

// xoshiro256++ with splitmix-derived state. One independent stream per
// path / per draw.
class RngStream {
  public:
    explicit RngStream(std::uint64_t seed) {
        std::uint64_t s = seed;
        for (auto& w : state_) w = splitmix64(s);
    }

    static RngStream for_index(std::uint64_t base_seed, std::uint64_t index) {
        return RngStream(mix_seed(base_seed, index));
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // Uniform on (0,1); never returns 0 or 1.
    double next_uniform() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    // One fair coin; bits are consumed from a 64-bit pool.
    bool next_coin() {
        if (pool_left_ == 0) {
            pool_ = next_u64();
            pool_left_ = 64;
        }
        const bool bit = pool_ & 1u;
        pool_ >>= 1;
        --pool_left_;
        return bit;
    }

  private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    std::uint64_t state_[4]{};
    std::uint64_t pool_ = 0;
    int pool_left_ = 0;
};

}  // namespace loctime
