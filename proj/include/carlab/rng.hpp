#pragma once

// Self-contained deterministic RNG (splitmix64 core). The standard library
// distributions are implementation-defined, which would break the
// byte-identical reproducibility contract of the experiment runner, so the
// uniform and Gaussian samplers are spelled out here.

#include <cmath>
#include <cstdint>

namespace carlab {

class Rng {
  public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // uniform in [0,1)
    double uniform() { return (next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Box-Muller, one value per call (the spare is kept)
    double gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = 0.0, u2 = 0.0;
        do { u1 = uniform(); } while (u1 <= 0.0);
        u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    // stream for a sub-task, decorrelated from the parent by index
    static std::uint64_t derive(std::uint64_t master, std::uint64_t index) {
        Rng r(master ^ (0x9e3779b97f4a7c15ULL * (index + 1)));
        return r.next_u64();
    }

  private:
    std::uint64_t state_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace carlab
