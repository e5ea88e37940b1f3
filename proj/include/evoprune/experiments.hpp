#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "evoprune/episode.hpp"
#include "evoprune/evolution.hpp"
#include "evoprune/maze.hpp"

namespace evoprune {

enum class Profile { Desk, Paper };

Profile parse_profile(std::string_view name);
const char* to_string(Profile p);
const char* to_string(SparsityUnit u);
const char* to_string(DistanceMode m);

/// One experimental condition plus everything needed to replay it.
struct ExperimentConfig {
    std::string name = "control";
    std::string profile = "desk";
    double sigma_mut_init = 0.01;
    double p_disconnect = 0.0;
    double p_connect = 0.0;
    double f_sparsity = 0.0;
    bool weight_mutation = true;
    bool threshold_mutation = false;
    bool bias_neuron = true;
    SparsityUnit sparsity_unit = SparsityUnit::Count;
    DistanceMode distance_mode = DistanceMode::Final;
    int pool_size = 200;
    int generations = 500;
    int n_neurons = kDefaultNeurons;
    int steps = kDefaultSteps;
    int validation_every = 10;
    int checkpoint_every = 50;
    double selection_cap = kDefaultSelectionCap;
    MazeParams maze;
    std::vector<std::uint64_t> training_maze_seeds;
    std::vector<std::uint64_t> validation_maze_seeds;
    std::vector<std::uint64_t> run_seeds;

    MutationParams mutation() const;
    GenomeOptions genome_options() const;
    EpisodeOptions episode_options() const;

    /// Throws ConfigError on inconsistent fields, overlapping maze seed sets,
    /// or a Table-1 name whose mutation settings differ from its row.
    void check() const;

    friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

const std::vector<std::string>& table1_names();

/// Table-1 row `name` on the given profile's pool size, horizon and seeds.
ExperimentConfig table1_config(std::string_view name, Profile profile = Profile::Desk);

nlohmann::ordered_json config_to_json(const ExperimentConfig& config);
/// Rejects unknown keys; missing keys keep their defaults.
ExperimentConfig config_from_json(const nlohmann::json& j);
std::string config_to_text(const ExperimentConfig& config);
ExperimentConfig config_from_text(const std::string& text);

std::vector<Maze> make_mazes(std::span<const std::uint64_t> seeds, const MazeParams& params);

/// Five-number summary over a distribution.
struct DistributionSummary {
    double min = 0.0;
    double p25 = 0.0;
    double mean = 0.0;
    double p75 = 0.0;
    double max = 0.0;
    friend bool operator==(const DistributionSummary&, const DistributionSummary&) = default;
};

/// Percentiles use linear interpolation between closest ranks.
DistributionSummary summarize_distribution(std::vector<double> values);

struct ValidationSummary {
    int generation = 0;
    std::vector<std::uint64_t> maze_seeds;
    std::vector<DistributionSummary> per_maze;
    std::vector<double> agent_means;  // per agent, mean over mazes
    double overall = 0.0;             // mean over agents and mazes
    friend bool operator==(const ValidationSummary&, const ValidationSummary&) = default;
};

ValidationSummary validate(const Population& pop, std::span<const Maze> validation_mazes,
                           const EpisodeOptions& episode = {}, int threads = 1);

struct RunRecord {
    ExperimentConfig config;
    std::uint64_t run_seed = 0;
    std::string sweep_axis;
    std::string sweep_value;
    std::vector<GenerationMetrics> metrics;
    std::vector<double> wall_times;  // seconds per metrics row, not part of equality
    std::vector<ValidationSummary> validations;
    Population final_population;
    std::vector<FitnessBreakdown> final_fitness;
    bool completed = false;

    std::size_t best_agent() const;
    const Genome& best_genome() const { return final_population.agents.at(best_agent()); }
    const ValidationSummary& final_validation() const { return validations.back(); }

    /// Deterministic content only (wall time excluded).
    bool same_outcome(const RunRecord& other) const;
};

struct Checkpoint {
    ExperimentConfig config;
    std::uint64_t run_seed = 0;
    Population population;  // population at `population.generation`, not yet evaluated
    std::vector<GenerationMetrics> metrics;
    std::vector<ValidationSummary> validations;
    std::vector<double> wall_times;
};

std::string checkpoint_to_text(const Checkpoint& cp);
Checkpoint checkpoint_from_text(const std::string& text);

/// Reads either a checkpoint or a population file.
Population population_from_text(const std::string& text);
std::string population_to_text(const Population& pop, const ExperimentConfig& config);

struct RunOptions {
    int threads = 1;
    std::optional<std::filesystem::path> out_dir;  // per-run directory
    std::optional<Checkpoint> resume;
    /// Stop with a checkpoint once this generation is reached (simulated
    /// resource limit). The returned record has completed == false.
    std::optional<int> stop_at_generation;
};

/// One run seed of a condition.
RunRecord run_single(const ExperimentConfig& config, std::uint64_t run_seed, const RunOptions& options = {});

/// All run seeds; with out_dir set, each seed writes to out_dir/seed_<s>.
std::vector<RunRecord> run_experiment(const ExperimentConfig& config, const RunOptions& options = {});

std::string slug(std::string_view name);

std::vector<RunRecord> sweep_connect_ratio(const ExperimentConfig& base, std::span<const double> p_connect_values,
                                           const RunOptions& options = {});
std::vector<RunRecord> sweep_network_size(const ExperimentConfig& base, std::span<const int> sizes,
                                          const RunOptions& options = {});
std::vector<RunRecord> sweep_population_size(const ExperimentConfig& base, std::span<const int> sizes,
                                             const RunOptions& options = {});

inline const std::vector<double> kDefaultConnectValues{0.0, 0.001, 0.01, 0.1};

/// Maze seeds for cross-validation bunches; never collide with `excluded`.
std::vector<std::uint64_t> cross_validation_seeds(int bunches, int mazes_per_bunch, std::uint64_t seed,
                                                  std::span<const std::uint64_t> excluded);

/// Mean covered distance of `genome` in each bunch of unseen mazes.
std::vector<double> cross_validate(const Genome& genome, int bunches, int mazes_per_bunch, std::uint64_t seed,
                                   std::span<const std::uint64_t> excluded_seeds, const MazeParams& maze = {},
                                   const EpisodeOptions& episode = {});

// Results-directory writers (tables carry '#' header lines with the config).
std::string metrics_table(const RunRecord& record);
std::string timing_table(const RunRecord& record);
std::string validation_table(const RunRecord& record);
void write_run(const RunRecord& record, const std::filesystem::path& dir);

/// Loads a directory written by write_run (final fitness is not stored).
RunRecord read_run(const std::filesystem::path& dir);

/// Every run directory (one holding run.json) at or below `root`, sorted.
std::vector<std::filesystem::path> find_runs(const std::filesystem::path& root);

}  // namespace evoprune
