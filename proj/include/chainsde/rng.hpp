#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace chainsde {

// Counter-style splittable stream: every (master seed, stream index) pair
// yields an independent deterministic sequence, so path-parallel runs merge
// bit-identically whatever the worker count.
class RngStream {
public:
    RngStream() : state_(mix(0x9e3779b97f4a7c15ull)) {}

    RngStream(std::uint64_t master_seed, std::uint64_t stream_index)
        : state_(mix(mix(master_seed) ^ mix(stream_index + 0x632be59bd9b4e019ull))) {}

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ull;
        return mix(state_);
    }

    // uniform on (0,1), never exactly 0 or 1
    double uniform() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    double uniform(double a, double b) { return a + (b - a) * uniform(); }

    double exponential() { return -std::log(uniform()); }

    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double r = std::sqrt(2.0 * exponential());
        const double phi = 2.0 * std::numbers::pi * uniform();
        spare_ = r * std::sin(phi);
        have_spare_ = true;
        return r * std::cos(phi);
    }

    std::uint64_t poisson(double mean) {
        // inversion for small means, normal approx never used: means here stay
        // moderate because jump intensities are cutoff-bounded per step
        if (mean <= 0.0) return 0;
        if (mean < 30.0) {
            const double limit = std::exp(-mean);
            double prod = uniform();
            std::uint64_t n = 0;
            while (prod > limit) {
                prod *= uniform();
                ++n;
            }
            return n;
        }
        // split recursively to keep the inversion loop short
        const std::uint64_t half = poisson(mean / 2.0);
        return half + poisson(mean - mean / 2.0);
    }

private:
    static std::uint64_t mix(std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ull;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    std::uint64_t state_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace chainsde
