#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace graphq {

// Deterministic, platform-independent PRNG (splitmix64). All stochastic
// stages of the pipeline draw from this engine so that results are
// byte-reproducible across runs, platforms and thread counts.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform double in [0, 1), 53-bit resolution.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform integer in [0, n). n must be > 0.
    std::size_t index(std::size_t n) {
        return static_cast<std::size_t>(
            (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
    }

    // Standard normal via Box-Muller; spare value cached.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        double u2 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::swap(v[i - 1], v[index(i)]);
        }
    }

    // Folds a stream tag into a seed: distinct tags give statistically
    // independent child streams. Used to derive per-trial seeds from the
    // master seed.
    static std::uint64_t derive(std::uint64_t seed, std::uint64_t tag) {
        Rng mix(seed ^ (0x9e3779b97f4a7c15ULL * (tag + 1)));
        mix.next_u64();
        return mix.next_u64();
    }

    template <typename... Tags>
    static std::uint64_t derive(std::uint64_t seed, std::uint64_t tag, Tags... rest) {
        return derive(derive(seed, tag), rest...);
    }

private:
    std::uint64_t state_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace graphq
