#pragma once

#include <cstdint>
#include <random>

namespace evoprune {

// Operator ids feeding stream derivation. Values are part of the on-disk
// reproducibility contract; append only.
enum class Stream : std::uint64_t {
    Init = 1,
    Weights = 2,
    Rate = 3,
    Connections = 4,
    Threshold = 5,
    Selection = 6,
    Maze = 7,
    MazeSeeds = 8,
};

inline constexpr int kStreamVersion = 1;

std::uint64_t splitmix64(std::uint64_t x);

/// Seed of the stream owned by (master seed, generation, agent, operator).
std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t generation,
                          std::uint64_t agent, Stream op);

/// mt19937_64 with hand-written distributions. The standard distribution
/// objects are implementation-defined, which would break golden files
/// across standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    /// Uniform on [0, 1) with 53 bits of resolution.
    double uniform();
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    /// Uniform integer on the closed range [lo, hi].
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);
    bool bernoulli(double p) { return uniform() < p; }
    double gaussian(double mean, double stddev);

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace evoprune
