#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "evoprune/maze.hpp"
#include "evoprune/rng.hpp"

namespace evoprune {

inline constexpr int kInputCount = 7;
inline constexpr int kOutputBegin = 7;
inline constexpr int kOutputCount = 3;
inline constexpr int kBiasIndex = 10;
inline constexpr int kMinNeurons = 11;
inline constexpr int kDefaultNeurons = 16;

/// Dense row-major square matrix; entry (i, j) is the weight from source j
/// into target i.
class SquareMatrix {
public:
    SquareMatrix() = default;
    explicit SquareMatrix(int n, double fill = 0.0)
        : n_(n), data_(static_cast<std::size_t>(n) * n, fill) {}

    int size() const { return n_; }
    double& operator()(int i, int j) { return data_[static_cast<std::size_t>(i) * n_ + j]; }
    double operator()(int i, int j) const { return data_[static_cast<std::size_t>(i) * n_ + j]; }
    std::span<double> values() { return data_; }
    std::span<const double> values() const { return data_; }

    friend bool operator==(const SquareMatrix&, const SquareMatrix&) = default;

private:
    int n_ = 0;
    std::vector<double> data_;
};

/// Neurons 0-6 are inputs, 7-9 outputs (Straight, TurnRight, TurnLeft), the
/// rest hidden. With bias_neuron set, neuron 10 is clamped to 1 every step.
///
/// Invariant: mask(i, j) == false implies weights(i, j) == 0 exactly.
struct Genome {
    int n = kDefaultNeurons;
    SquareMatrix weights;
    std::vector<std::uint8_t> mask;
    double sigma_mut = 0.0;  // stored signed, used as |sigma_mut|
    double tau = 0.0;        // prune threshold, 0 disables
    bool bias_neuron = true;

    bool connected(int i, int j) const { return mask[static_cast<std::size_t>(i) * n + j] != 0; }
    void set_connected(int i, int j, bool on) { mask[static_cast<std::size_t>(i) * n + j] = on ? 1 : 0; }

    friend bool operator==(const Genome&, const Genome&) = default;
};

/// Half-width of the uniform initialisation interval: 4 * sqrt(6 / 2n) / 10.
double init_sigma(int n);

struct GenomeOptions {
    int n = kDefaultNeurons;
    double sigma_mut = 0.01;
    bool bias_neuron = true;
    bool threshold_mutation = false;
};

Genome init_genome(Rng& rng, const GenomeOptions& options);

/// Masked weights with |w| < tau zeroed.
SquareMatrix effective_weights(const Genome& genome);

Action select_action(std::span<const double> outputs);

struct StepOutput {
    std::vector<double> state;
    Action action = Action::Straight;
};

/// Clamps sensors (and bias) into `state`, then s' = ReLU(W_eff * s).
StepOutput forward_step(const Genome& genome, std::span<const double> state, const SensorReading& sensors);

/// Pre-computed effective weights for repeated stepping inside an episode.
class CompiledNetwork {
public:
    explicit CompiledNetwork(const Genome& genome);

    int size() const { return n_; }
    /// Clamps inputs into `state` in place, writes ReLU(W * state) to `next`.
    void step(std::span<double> state, const SensorReading& sensors, std::span<double> next) const;

private:
    int n_;
    bool bias_;
    std::vector<double> columns_;
};

int nonzero_count(const Genome& genome);
/// 1 - nonzero / n^2 over the full matrix, inputs' incoming rows included.
double sparsity(const Genome& genome);

std::string genome_to_text(const Genome& genome);
Genome genome_from_text(const std::string& text);

}  // namespace evoprune
