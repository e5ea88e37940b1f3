#include "evoprune/rng.hpp"

#include <cmath>
#include <numbers>

namespace evoprune {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t generation,
                          std::uint64_t agent, Stream op) {
    std::uint64_t h = splitmix64(master_seed ^ (static_cast<std::uint64_t>(kStreamVersion) << 56));
    h = splitmix64(h ^ generation);
    h = splitmix64(h ^ agent);
    h = splitmix64(h ^ static_cast<std::uint64_t>(op));
    return h;
}

double Rng::uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

std::int64_t Rng::uniform_int(std::int64_t lo, std::int64_t hi) {
    const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
    if (span == 0) return static_cast<std::int64_t>(engine_());
    // reject the low (2^64 mod span) values so every residue is equally likely
    const std::uint64_t threshold = (0 - span) % span;
    std::uint64_t r;
    do {
        r = engine_();
    } while (r < threshold);
    return lo + static_cast<std::int64_t>(r % span);
}

double Rng::gaussian(double mean, double stddev) {
    if (has_spare_) {
        has_spare_ = false;
        return mean + stddev * spare_;
    }
    double u1 = 0.0;
    do {
        u1 = uniform();
    } while (u1 <= 0.0);
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return mean + stddev * radius * std::cos(angle);
}

}  // namespace evoprune
