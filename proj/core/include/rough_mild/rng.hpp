#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace rough_mild {

// 64-bit finalizer mix (splitmix64).  Used everywhere a derived seed is
// needed; the rule is part of the reproducibility contract:
//
//   mode seed   = mix64(master ^ mode_index)
//   sample seed = mix64(master + sample_index + 1)
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

inline std::uint64_t mode_seed(std::uint64_t master, int mode_index) {
    return mix64(master ^ static_cast<std::uint64_t>(mode_index));
}

inline std::uint64_t sample_seed(std::uint64_t master, int sample_index) {
    return mix64(master + static_cast<std::uint64_t>(sample_index) + 1);
}

// Deterministic standard Gaussian stream: mt19937_64 uniforms through an
// explicit Box-Muller transform.  std::normal_distribution is not pinned by
// the standard, so it cannot back a bit-reproducibility contract.
class GaussianStream {
public:
    explicit GaussianStream(std::uint64_t seed) : engine_(seed) {}

    double next() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = uniform_open();
        const double u2 = uniform_open();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * pi() * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

private:
    static constexpr double pi() { return 3.14159265358979323846; }

    // uniform on (0, 1], so log(u) is always finite
    double uniform_open() {
        const std::uint64_t bits = engine_() >> 11;  // 53 random bits
        return (static_cast<double>(bits) + 1.0) * 0x1p-53;
    }

    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace rough_mild
