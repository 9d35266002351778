#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace dvrpsr {

// splitmix64 step, used to derive independent seeds from (seed, index...) tuples.
inline uint64_t mix_seed(uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline uint64_t mix_seed(uint64_t a, uint64_t b) { return mix_seed(mix_seed(a) ^ b); }
inline uint64_t mix_seed(uint64_t a, uint64_t b, uint64_t c) { return mix_seed(mix_seed(a, b) ^ c); }
inline uint64_t mix_seed(uint64_t a, uint64_t b, uint64_t c, uint64_t d) {
    return mix_seed(mix_seed(a, b, c) ^ d);
}

// mt19937_64 engine with hand-rolled variate transforms. The standard
// <random> distributions are implementation-defined, so sampling through
// them would not reproduce byte-identical streams across toolchains.
class Rng {
  public:
    explicit Rng(uint64_t seed = 0) : eng_(seed) {}

    // uniform in [0, 1)
    double uniform() {
        return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // uniform integer in [0, n)
    int uniform_int(int n) {
        int v = static_cast<int>(uniform() * n);
        return v < n ? v : n - 1;
    }

    double normal(double mean, double stddev) {
        // Box-Muller; the paired variate is discarded to keep the stream
        // position a deterministic function of the draw count.
        double u1 = 1.0 - uniform();
        double u2 = uniform();
        double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
        return mean + stddev * z;
    }

    // Knuth multiplication method; large means split recursively
    // (sums of independent Poissons are Poisson).
    int poisson(double mean) {
        if (mean <= 0.0) return 0;
        if (mean > 30.0) {
            double half = mean / 2.0;
            return poisson(half) + poisson(mean - half);
        }
        double limit = std::exp(-mean);
        int k = 0;
        double p = 1.0;
        do {
            ++k;
            p *= uniform();
        } while (p > limit);
        return k - 1;
    }

  private:
    std::mt19937_64 eng_;
};

}  // namespace dvrpsr
