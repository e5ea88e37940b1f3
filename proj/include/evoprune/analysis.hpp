#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "evoprune/episode.hpp"
#include "evoprune/evolution.hpp"
#include "evoprune/experiments.hpp"
#include "evoprune/network.hpp"

namespace evoprune {

struct Histogram {
    std::vector<double> edges;          // bins + 1 ascending edges
    std::vector<std::size_t> counts;
    std::size_t total = 0;              // non-zero effective weights counted
    double negative_fraction = 0.0;
};

/// Histogram of non-zero effective weights; zeros are excluded. An empty
/// range (lo == hi) spans the data.
Histogram weight_histogram(std::span<const Genome> genomes, int bins, double lo = 0.0, double hi = 0.0);
Histogram weight_histogram(const Genome& genome, int bins, double lo = 0.0, double hi = 0.0);

std::vector<double> sparsity_trajectory(const RunRecord& run);
/// Sparsity of the densest agent per generation.
std::vector<double> min_sparsity_trajectory(const RunRecord& run);

/// Kendall's tau-b via merge-sort discordance counting, O(n log n).
double rank_correlation(std::span<const double> x, std::span<const double> y);

struct CorrelationResult {
    std::vector<std::string> labels;  // condition / seed per pair
    std::vector<double> sparsity;
    std::vector<double> validation;
    double coefficient = 0.0;
};

/// Final mean sparsity against final validation performance, one pair per run.
CorrelationResult sparsity_vs_validation(std::span<const RunRecord> runs);

struct Connection {
    int target = 0;
    int source = 0;
    friend bool operator==(const Connection&, const Connection&) = default;
};

struct ActiveConnections {
    int nonzero = 0;
    int active_count = 0;
    double baseline_fitness = 0.0;
    std::vector<Connection> prunable;
};

/// Single-ablation probe of every non-zero effective connection; a
/// connection is prunable when fitness stays >= baseline - epsilon.
ActiveConnections active_connections(const Genome& genome, std::span<const Maze> mazes,
                                     const MutationParams& params = {}, const EpisodeOptions& episode = {},
                                     double epsilon = 0.0, int threads = 1);

struct PruneCurve {
    std::vector<double> thresholds;
    std::vector<int> remaining_connections;
    std::vector<double> validation_performance;
};

/// 0 followed by one threshold just above each distinct |w|, ascending.
std::vector<double> prune_thresholds(const Genome& genome);

/// Zeroes every |w| < threshold and measures mean validation distance.
PruneCurve threshold_prune_curve(const Genome& genome, std::span<const Maze> validation_mazes,
                                 std::span<const double> thresholds, const EpisodeOptions& episode = {});

/// Largest fraction of the baseline's non-zero connections removable while
/// performance stays >= (1 - max_loss) * baseline; also the remaining count.
struct PruneBudget {
    double removed_fraction = 0.0;
    int remaining = 0;
    double performance = 0.0;
};
PruneBudget prune_budget(const PruneCurve& curve, double max_loss);

struct Components {
    std::vector<int> label;         // component id per neuron, ids in order of first neuron
    int count = 0;
    std::vector<bool> pseudo;       // component touches no input and no output neuron
    std::vector<int> edges;         // non-zero connections inside each component
};

/// Weakly connected components over non-zero effective connections.
Components subnetwork_components(const Genome& genome);

// CSV renderings with headers.
std::string histogram_csv(const Histogram& h);
std::string prune_curve_csv(const PruneCurve& c);
std::string components_csv(const Components& c);
std::string correlation_csv(const CorrelationResult& r);
std::string active_csv(const ActiveConnections& a);

}  // namespace evoprune
