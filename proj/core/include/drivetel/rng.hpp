#ifndef DRIVETEL_RNG_HPP
#define DRIVETEL_RNG_HPP

#include <cstdint>

namespace drivetel::synth {

// xoshiro256++ seeded through splitmix64. Fully self-contained so identical
// seeds give identical streams on every platform (std distributions are
// implementation-defined). Stream splitting: stream k of seed s is seeded
// from mix(s, k), so per-trip generation is order-independent.
class Rng {
  public:
    explicit Rng(std::uint64_t seed);
    static Rng for_stream(std::uint64_t seed, std::uint64_t stream);

    std::uint64_t next_u64();
    double uniform();                      // [0, 1)
    double uniform(double lo, double hi);  // [lo, hi)
    double normal(double mean = 0.0, double stddev = 1.0);  // Marsaglia polar
    double exponential(double mean);
    // Inverse-transform GPD draw: (sigma/xi)((1-U)^(-xi) - 1), xi=0 exponential.
    double gpd(double sigma, double xi);

  private:
    std::uint64_t state_[4];
    bool has_cached_normal_ = false;
    double cached_normal_ = 0.0;
};

std::uint64_t splitmix64_next(std::uint64_t& state);

// Inverse CDF at probability u for the zero-threshold GPD.
double gpd_inverse_cdf(double u, double sigma, double xi);

}  // namespace drivetel::synth

#endif
