#include "drivetel/rng.hpp"

#include <cmath>

#include "drivetel/errors.hpp"

namespace drivetel::synth {

std::uint64_t splitmix64_next(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

namespace {

inline std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace

Rng::Rng(std::uint64_t seed) {
    std::uint64_t sm = seed;
    for (auto& s : state_) s = splitmix64_next(sm);
}

Rng Rng::for_stream(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t sm = seed;
    const std::uint64_t base = splitmix64_next(sm);
    std::uint64_t mixed = base ^ (stream + 0x9e3779b97f4a7c15ULL);
    return Rng(splitmix64_next(mixed));
}

std::uint64_t Rng::next_u64() {
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

double Rng::uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

double Rng::normal(double mean, double stddev) {
    if (has_cached_normal_) {
        has_cached_normal_ = false;
        return mean + stddev * cached_normal_;
    }
    double u, v, s;
    do {
        u = 2.0 * uniform() - 1.0;
        v = 2.0 * uniform() - 1.0;
        s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double factor = std::sqrt(-2.0 * std::log(s) / s);
    cached_normal_ = v * factor;
    has_cached_normal_ = true;
    return mean + stddev * u * factor;
}

double Rng::exponential(double mean) { return -mean * std::log1p(-uniform()); }

double Rng::gpd(double sigma, double xi) { return gpd_inverse_cdf(uniform(), sigma, xi); }

double gpd_inverse_cdf(double u, double sigma, double xi) {
    if (!(sigma > 0.0)) throw NumericError("gpd_inverse_cdf: sigma must be positive");
    if (u < 0.0 || u >= 1.0) throw NumericError("gpd_inverse_cdf: u must be in [0,1)");
    if (xi == 0.0) return -sigma * std::log1p(-u);
    return sigma / xi * (std::pow(1.0 - u, -xi) - 1.0);
}

}  // namespace drivetel::synth
