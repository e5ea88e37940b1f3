#include "evoprune/network.hpp"

#include <cmath>

#include "evoprune/errors.hpp"

namespace evoprune {

namespace {

inline double relu(double x) { return x > 0.0 ? x : 0.0; }

}  // namespace

double init_sigma(int n) { return 4.0 * std::sqrt(6.0 / (n + n)) / 10.0; }

Genome init_genome(Rng& rng, const GenomeOptions& options) {
    if (options.n < kMinNeurons)
        throw ConfigError("network needs at least " + std::to_string(kMinNeurons) + " neurons, got " +
                          std::to_string(options.n));
    Genome g;
    g.n = options.n;
    g.weights = SquareMatrix(options.n);
    g.mask.assign(static_cast<std::size_t>(options.n) * options.n, 1);
    const double sigma = init_sigma(options.n);
    for (double& w : g.weights.values()) w = rng.uniform(-sigma, sigma);
    g.sigma_mut = options.sigma_mut;
    g.tau = options.threshold_mutation ? sigma / 10.0 : 0.0;
    g.bias_neuron = options.bias_neuron;
    return g;
}

SquareMatrix effective_weights(const Genome& genome) {
    SquareMatrix out(genome.n);
    for (int i = 0; i < genome.n; ++i)
        for (int j = 0; j < genome.n; ++j) {
            const double w = genome.weights(i, j);
            if (genome.connected(i, j) && std::abs(w) >= genome.tau) out(i, j) = w;
        }
    return out;
}

Action select_action(std::span<const double> outputs) {
    // strict comparison: ties and the all-zero vector resolve to the lowest index
    std::size_t best = 0;
    for (std::size_t k = 1; k < outputs.size() && k < kOutputCount; ++k)
        if (outputs[k] > outputs[best]) best = k;
    return static_cast<Action>(best);
}

StepOutput forward_step(const Genome& genome, std::span<const double> state, const SensorReading& sensors) {
    if (static_cast<int>(state.size()) != genome.n) throw ConfigError("state length does not match genome");
    std::vector<double> clamped(state.begin(), state.end());
    const auto inputs = sensors.inputs();
    for (int k = 0; k < kInputCount; ++k) clamped[k] = inputs[k];
    if (genome.bias_neuron) clamped[kBiasIndex] = 1.0;
    const auto w = effective_weights(genome);
    StepOutput out;
    out.state.assign(genome.n, 0.0);
    for (int i = 0; i < genome.n; ++i) {
        double acc = 0.0;
        for (int j = 0; j < genome.n; ++j) acc += w(i, j) * clamped[j];
        out.state[i] = relu(acc);
    }
    out.action = select_action(std::span<const double>(out.state).subspan(kOutputBegin, kOutputCount));
    return out;
}

CompiledNetwork::CompiledNetwork(const Genome& genome) : n_(genome.n), bias_(genome.bias_neuron) {
    const auto w = effective_weights(genome);
    columns_.assign(static_cast<std::size_t>(n_) * n_, 0.0);
    for (int i = 0; i < n_; ++i)
        for (int j = 0; j < n_; ++j) columns_[static_cast<std::size_t>(j) * n_ + i] = w(i, j);
}

namespace {

// Column-major accumulation: every target still sums its sources in
// ascending order, so results match the row-wise product exactly. Silent
// sources contribute an exact zero and are skipped.
template <int N>
void accumulate_columns(const double* columns, const double* state, double* next) {
    double acc[N] = {};
    for (int j = 0; j < N; ++j) {
        const double s = state[j];
        if (s == 0.0) continue;
        const double* col = columns + j * N;
        for (int i = 0; i < N; ++i) acc[i] += col[i] * s;
    }
    for (int i = 0; i < N; ++i) next[i] = relu(acc[i]);
}

void accumulate_columns(int n, const double* columns, const double* state, double* next) {
    for (int i = 0; i < n; ++i) next[i] = 0.0;
    for (int j = 0; j < n; ++j) {
        const double s = state[j];
        if (s == 0.0) continue;
        const double* col = columns + static_cast<std::ptrdiff_t>(j) * n;
        for (int i = 0; i < n; ++i) next[i] += col[i] * s;
    }
    for (int i = 0; i < n; ++i) next[i] = relu(next[i]);
}

}  // namespace

void CompiledNetwork::step(std::span<double> state, const SensorReading& sensors, std::span<double> next) const {
    const auto inputs = sensors.inputs();
    for (int k = 0; k < kInputCount; ++k) state[k] = inputs[k];
    if (bias_) state[kBiasIndex] = 1.0;
    if (n_ == kDefaultNeurons)
        accumulate_columns<kDefaultNeurons>(columns_.data(), state.data(), next.data());
    else
        accumulate_columns(n_, columns_.data(), state.data(), next.data());
}

int nonzero_count(const Genome& genome) {
    int count = 0;
    for (int i = 0; i < genome.n; ++i)
        for (int j = 0; j < genome.n; ++j) {
            const double w = genome.weights(i, j);
            if (genome.connected(i, j) && w != 0.0 && std::abs(w) >= genome.tau) ++count;
        }
    return count;
}

double sparsity(const Genome& genome) {
    const double possible = static_cast<double>(genome.n) * genome.n;
    return 1.0 - nonzero_count(genome) / possible;
}

}  // namespace evoprune
