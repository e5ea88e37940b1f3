#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "evoprune/episode.hpp"
#include "evoprune/maze.hpp"
#include "evoprune/network.hpp"
#include "evoprune/rng.hpp"

namespace evoprune {

inline constexpr double kDefaultSelectionCap = 0.1;

/// Units of the sparsity reward: number of zero effective weights, or the
/// [0, 1] sparsity fraction.
enum class SparsityUnit { Count, Fraction };

struct MutationParams {
    double p_disconnect = 0.0;
    double p_connect = 0.0;
    double f_sparsity = 0.0;
    bool weight_mutation_on = true;
    bool threshold_mutation_on = false;
    SparsityUnit sparsity_unit = SparsityUnit::Count;
};

struct EvaluationOptions {
    EpisodeOptions episode;
    int threads = 1;
};

struct FitnessBreakdown {
    std::vector<int> distances;
    double smr = 0.0;
    double activation_penalty = 0.0;
    double sparsity_term = 0.0;
    double total = 0.0;

    /// Mean covered distance over the mazes.
    double performance() const;
};

struct Population {
    std::vector<Genome> agents;
    int generation = 0;
    std::uint64_t master_seed = 0;
};

/// Squared mean of square-rooted distances.
double smr(std::span<const double> distances);
double smr(std::span<const int> distances);

FitnessBreakdown evaluate_genome(const Genome& genome, std::span<const Maze> mazes, const MutationParams& params,
                                 const EpisodeOptions& episode = {});

std::vector<FitnessBreakdown> evaluate(const Population& pop, std::span<const Maze> mazes,
                                       const MutationParams& params, const EvaluationOptions& options = {});

/// Survivor ranking and parent distribution for one generation.
struct SelectionPlan {
    std::vector<double> probabilities;   // per agent; zero outside the top half
    std::vector<std::size_t> survivors;  // top half, best first
    std::vector<std::size_t> replaced;   // bottom half, ascending index
};

/// Best half (ties by lower index) gets shares proportional to shifted
/// fitness, each capped at `cap` with the excess redistributed. `cap` <= 0
/// disables capping.
SelectionPlan plan_selection(std::span<const double> fitnesses, double cap = kDefaultSelectionCap);

std::vector<double> reproduction_probabilities(std::span<const double> fitnesses,
                                               double cap = kDefaultSelectionCap);

/// Survivors keep their slots; every replaced slot receives a copy of a
/// parent drawn from the plan using that slot's selection stream.
Population reproduce(const Population& pop, const SelectionPlan& plan);

Genome mutate_weights(Genome genome, Rng& rng);
Genome mutate_rate(Genome genome, Rng& rng);
Genome mutate_connections(Genome genome, const MutationParams& params, Rng& rng);
Genome mutate_threshold(Genome genome, Rng& rng);

/// All enabled operators in the fixed order weights, rate, connections,
/// threshold, each on its own derived stream.
Genome mutate_agent(Genome genome, const MutationParams& params, std::uint64_t master_seed, int generation,
                    std::size_t agent);

struct GenerationMetrics {
    int generation = 0;
    double best_fitness = 0.0;
    double mean_fitness = 0.0;
    double best_train_perf = 0.0;
    double mean_train_perf = 0.0;
    double mean_sparsity = 0.0;
    double min_sparsity = 0.0;
    double mean_sigma_mut = 0.0;
    std::size_t best_agent = 0;
};

GenerationMetrics summarize(const Population& pop, std::span<const FitnessBreakdown> fitness);

struct GenerationResult {
    Population next;
    GenerationMetrics metrics;
    std::vector<FitnessBreakdown> fitness;  // of the input population
};

struct EvolutionSettings {
    MutationParams mutation;
    EvaluationOptions evaluation;
    double selection_cap = kDefaultSelectionCap;
};

/// evaluate -> select -> reproduce -> mutate every agent.
GenerationResult step_generation(const Population& pop, std::span<const Maze> mazes,
                                 const EvolutionSettings& settings);

std::string metrics_csv_header();
std::string metrics_csv_row(const GenerationMetrics& m);

}  // namespace evoprune
