// Deterministic random number generation.
//
// All stochastic code in this library draws from an explicit Rng instance;
// there is no global generator. The engine is std::mt19937_64 (whose output
// sequence is fixed by the standard) and the uniform/normal transforms are
// implemented here rather than taken from <random> distributions, whose
// algorithms are implementation-defined. Seeds for independent streams are
// derived with a splitmix64 hash so that (master_seed, stream_id) pairs never
// collide by accident.

#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace hawknet {

// splitmix64 step; used both as a seed scrambler and a stream deriver.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Derive a child seed for a named substream of `master`.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
    return splitmix64(splitmix64(master) ^ splitmix64(stream * 0x9e3779b97f4a7c15ULL + 1));
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b) {
    return derive_seed(derive_seed(master, a), b);
}

class Rng {
  public:
    explicit Rng(std::uint64_t seed = 0) : engine_(splitmix64(seed)) {}

    // Uniform double in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform integer in [0, n). n must be positive.
    std::uint64_t uniform_below(std::uint64_t n) { return engine_() % n; }

    // Standard normal draw (Box-Muller, second value cached).
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = 1.0 - uniform();  // (0, 1], keeps log finite
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

    void normal_fill(std::vector<double>& out) {
        for (double& v : out) v = normal();
    }

    std::vector<double> normal_vector(std::size_t dim) {
        std::vector<double> out(dim);
        normal_fill(out);
        return out;
    }

    // Fisher-Yates shuffle.
    template <class T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(uniform_below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

    Rng spawn(std::uint64_t stream) { return Rng(derive_seed(engine_(), stream)); }

  private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace hawknet
