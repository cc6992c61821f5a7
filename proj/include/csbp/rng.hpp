#pragma once

#include <cmath>
#include <cstdint>

namespace csbp {

// SplitMix64, used only to expand seeds into generator state.
struct SplitMix64 {
    std::uint64_t state;

    explicit SplitMix64(std::uint64_t seed) : state(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }
};

/// xoshiro256++ with hand-rolled variate transforms. All draws are computed
/// from explicit formulas (no std::distribution) so that a given (seed, stream)
/// pair produces the same sequence on every platform and build.
class PathRng {
public:
    PathRng() : PathRng(1, 0) {}

    // Per-path stream derivation: state depends only on (seed, stream), so
    // paths can be generated on any worker in any order.
    PathRng(std::uint64_t seed, std::uint64_t stream) {
        SplitMix64 sm(seed ^ (0x632BE59BD9B4E019ULL * (stream + 1)));
        bool nonzero = false;
        for (auto& w : s_) {
            w = sm.next();
            nonzero = nonzero || (w != 0);
        }
        if (!nonzero) s_[0] = 0x9E3779B97F4A7C15ULL;
        has_spare_ = false;
        spare_ = 0.0;
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // uniform on [0,1)
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // uniform on (0,1]
    double uniform_pos() { return 1.0 - uniform(); }

    double exponential() { return -std::log(uniform_pos()); }

    // Marsaglia polar method, spare cached.
    double gaussian() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u, v, r2;
        do {
            u = 2.0 * uniform() - 1.0;
            v = 2.0 * uniform() - 1.0;
            r2 = u * u + v * v;
        } while (r2 >= 1.0 || r2 == 0.0);
        const double f = std::sqrt(-2.0 * std::log(r2) / r2);
        spare_ = v * f;
        has_spare_ = true;
        return u * f;
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    std::uint64_t s_[4];
    double spare_;
    bool has_spare_;
};

}  // namespace csbp
