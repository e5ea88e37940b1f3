// evoprune command-line driver: maze generation, training, sweeps, validation,
// post-hoc analysis and step-by-step replay.

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "evoprune/analysis.hpp"
#include "evoprune/episode.hpp"
#include "evoprune/errors.hpp"
#include "evoprune/experiments.hpp"
#include "evoprune/format.hpp"
#include "evoprune/maze.hpp"
#include "evoprune/serialization.hpp"

namespace fs = std::filesystem;
using namespace evoprune;

namespace {

constexpr const char* kOutDirEnv = "EVOPRUNE_OUT_DIR";

// Status returned when a run was stopped early and left a checkpoint.
constexpr int kStopped = 3;

fs::path default_out_dir() {
    const char* env = std::getenv(kOutDirEnv);
    return env && *env ? fs::path(env) : fs::path("results");
}

fs::path out_or_default(const std::string& out, const std::string& name) {
    return out.empty() ? default_out_dir() / name : fs::path(out);
}

void write_artifact(const fs::path& path, const std::string& contents) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    write_file(path.string(), contents);
    std::cout << path.string() << "\n";
}

struct TrainFlags {
    std::string experiment = "control";
    std::string config_file;
    std::string name;
    std::string profile = "desk";
    std::optional<double> sigma_mut;
    std::optional<double> p_disconnect;
    std::optional<double> p_connect;
    std::optional<double> f_sparsity;
    std::optional<int> pool_size;
    std::optional<int> generations;
    std::optional<int> n_neurons;
    std::optional<int> steps;
    std::optional<int> validation_every;
    std::optional<int> checkpoint_every;
    std::optional<std::string> sparsity_unit;
    std::optional<std::string> distance_mode;
    bool threshold_mutation = false;
    bool no_weight_mutation = false;
    bool no_bias = false;
    std::vector<std::uint64_t> seeds;
    int threads = 1;
    std::string out_dir;
    std::string resume;
    std::optional<int> stop_at;
};

// Options that shape the experiment; they are rejected together with --resume
// because a checkpoint carries its own config.
std::vector<CLI::Option*> add_config_flags(CLI::App* cmd, TrainFlags& f) {
    std::vector<CLI::Option*> opts;
    opts.push_back(cmd->add_option("--experiment", f.experiment, "Table 1 condition name")
                       ->check(CLI::IsMember(table1_names())));
    opts.push_back(cmd->add_option("--config", f.config_file, "config file (evoprune-config/1)")
                       ->check(CLI::ExistingFile));
    opts.push_back(cmd->add_option("--name", f.name, "condition name written to outputs"));
    opts.push_back(cmd->add_option("--profile", f.profile, "desk or paper")->check(CLI::IsMember({"desk", "paper"})));
    opts.push_back(cmd->add_option("--sigma-mut", f.sigma_mut, "initial mutation rate")->check(CLI::NonNegativeNumber));
    opts.push_back(cmd->add_option("--p-disconnect", f.p_disconnect)->check(CLI::Range(0.0, 1.0)));
    opts.push_back(cmd->add_option("--p-connect", f.p_connect)->check(CLI::Range(0.0, 1.0)));
    opts.push_back(cmd->add_option("--f-sparsity", f.f_sparsity)->check(CLI::NonNegativeNumber));
    opts.push_back(cmd->add_option("--pool-size", f.pool_size)->check(CLI::Range(2, 1 << 24)));
    opts.push_back(cmd->add_option("--generations", f.generations)->check(CLI::NonNegativeNumber));
    opts.push_back(cmd->add_option("--n-neurons", f.n_neurons)->check(CLI::Range(kMinNeurons, 4096)));
    opts.push_back(cmd->add_option("--steps", f.steps, "steps per episode")->check(CLI::PositiveNumber));
    opts.push_back(cmd->add_option("--validation-every", f.validation_every)->check(CLI::PositiveNumber));
    opts.push_back(cmd->add_option("--checkpoint-every", f.checkpoint_every, "0 disables periodic checkpoints")
                       ->check(CLI::NonNegativeNumber));
    opts.push_back(cmd->add_option("--sparsity-unit", f.sparsity_unit)->check(CLI::IsMember({"count", "fraction"})));
    opts.push_back(cmd->add_option("--distance-mode", f.distance_mode)->check(CLI::IsMember({"final", "max"})));
    opts.push_back(cmd->add_flag("--threshold-mutation", f.threshold_mutation, "evolve a pruning threshold"));
    opts.push_back(cmd->add_flag("--no-weight-mutation", f.no_weight_mutation));
    opts.push_back(cmd->add_flag("--no-bias", f.no_bias, "drop the always-on bias neuron"));
    opts.push_back(cmd->add_option("--seed", f.seeds, "run seed(s)")->delimiter(','));
    opts[1]->excludes(opts[0])->excludes(opts[3]);
    return opts;
}

void add_run_flags(CLI::App* cmd, TrainFlags& f) {
    cmd->add_option("--threads", f.threads, "worker threads; never changes results")->check(CLI::PositiveNumber);
    cmd->add_option("--out-dir", f.out_dir, "results root")->envname(kOutDirEnv);
}

ExperimentConfig build_config(const TrainFlags& f) {
    ExperimentConfig c = f.config_file.empty() ? table1_config(f.experiment, parse_profile(f.profile))
                                               : config_from_text(read_file(f.config_file));
    const ExperimentConfig row = c;
    if (f.sigma_mut) c.sigma_mut_init = *f.sigma_mut;
    if (f.p_disconnect) c.p_disconnect = *f.p_disconnect;
    if (f.p_connect) c.p_connect = *f.p_connect;
    if (f.f_sparsity) c.f_sparsity = *f.f_sparsity;
    if (f.no_weight_mutation) c.weight_mutation = false;
    if (f.pool_size) c.pool_size = *f.pool_size;
    if (f.generations) c.generations = *f.generations;
    if (f.n_neurons) c.n_neurons = *f.n_neurons;
    if (f.steps) c.steps = *f.steps;
    if (f.validation_every) c.validation_every = *f.validation_every;
    if (f.checkpoint_every) c.checkpoint_every = *f.checkpoint_every;
    if (f.sparsity_unit) c.sparsity_unit = *f.sparsity_unit == "count" ? SparsityUnit::Count : SparsityUnit::Fraction;
    if (f.distance_mode) c.distance_mode = *f.distance_mode == "final" ? DistanceMode::Final : DistanceMode::Max;
    if (f.threshold_mutation) c.threshold_mutation = true;
    if (f.no_bias) c.bias_neuron = false;
    if (!f.seeds.empty()) c.run_seeds = f.seeds;

    const bool row_changed = c.sigma_mut_init != row.sigma_mut_init || c.p_disconnect != row.p_disconnect ||
                             c.p_connect != row.p_connect || c.f_sparsity != row.f_sparsity ||
                             c.weight_mutation != row.weight_mutation;
    if (!f.name.empty()) c.name = f.name;
    else if (row_changed) c.name += " [custom]";
    c.check();
    return c;
}

void report(const RunRecord& r) {
    std::cerr << r.config.name << " seed " << r.run_seed;
    if (!r.sweep_axis.empty()) std::cerr << " " << r.sweep_axis << "=" << r.sweep_value;
    if (!r.metrics.empty()) {
        const auto& m = r.metrics.back();
        std::cerr << ": generation " << m.generation << " best perf " << m.best_train_perf << " mean sparsity "
                  << m.mean_sparsity;
    }
    if (r.completed && !r.validations.empty()) std::cerr << " validation " << r.final_validation().overall;
    std::cerr << "\n";
}

int cmd_train(const TrainFlags& f) {
    const fs::path root = f.out_dir.empty() ? default_out_dir() : fs::path(f.out_dir);
    RunOptions opts;
    opts.threads = f.threads;
    opts.stop_at_generation = f.stop_at;
    if (!f.resume.empty()) {
        auto cp = checkpoint_from_text(read_file(f.resume));
        const auto config = cp.config;
        const auto seed = cp.run_seed;
        opts.resume = std::move(cp);
        opts.out_dir = root / slug(config.name) / ("seed_" + std::to_string(seed));
        const auto record = run_single(config, seed, opts);
        report(record);
        std::cout << opts.out_dir->string() << "\n";
        return record.completed ? 0 : kStopped;
    }
    const auto config = build_config(f);
    opts.out_dir = root / slug(config.name);
    bool completed = true;
    for (const auto& record : run_experiment(config, opts)) {
        report(record);
        completed = completed && record.completed;
    }
    std::cout << opts.out_dir->string() << "\n";
    return completed ? 0 : kStopped;
}

template <typename T>
std::vector<T> parse_list(const std::vector<std::string>& items) {
    std::vector<T> out;
    for (const auto& s : items) {
        std::size_t used = 0;
        T v{};
        try {
            if constexpr (std::is_floating_point_v<T>) v = std::stod(s, &used);
            else v = static_cast<T>(std::stoi(s, &used));
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != s.size() || s.empty()) throw ConfigError("bad sweep value '" + s + "'");
        out.push_back(v);
    }
    return out;
}

int cmd_sweep(const TrainFlags& f, const std::string& axis, const std::vector<std::string>& values) {
    const auto base = build_config(f);
    RunOptions opts;
    opts.threads = f.threads;
    opts.out_dir = (f.out_dir.empty() ? default_out_dir() : fs::path(f.out_dir)) / slug(base.name);
    std::vector<RunRecord> records;
    if (axis == "p-connect") {
        const auto v = values.empty() ? kDefaultConnectValues : parse_list<double>(values);
        records = sweep_connect_ratio(base, v, opts);
    } else if (axis == "network-size") {
        const auto v = values.empty() ? std::vector<int>{11, 16} : parse_list<int>(values);
        records = sweep_network_size(base, v, opts);
    } else {
        const auto v = values.empty() ? std::vector<int>{100, 200, 500, 1000} : parse_list<int>(values);
        records = sweep_population_size(base, v, opts);
    }
    for (const auto& r : records) report(r);
    std::cout << opts.out_dir->string() << "\n";
    return 0;
}

int cmd_generate_maze(std::uint64_t seed, int width, int height, const std::string& out) {
    MazeParams p;
    p.width = width;
    p.height = height;
    const auto maze = generate_maze(seed, p);
    write_artifact(out_or_default(out, "maze_" + std::to_string(seed) + ".json"), maze_to_text(maze));
    return 0;
}

int cmd_validate(const std::string& population_path, const std::vector<std::uint64_t>& seeds, int threads,
                 const std::string& out) {
    const auto text = read_file(population_path);
    ExperimentConfig config;
    try {
        config = config_from_json(nlohmann::json::parse(text).at("config"));
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("population file has no config: ") + e.what());
    }
    if (!seeds.empty()) config.validation_maze_seeds = seeds;
    if (config.validation_maze_seeds.empty()) throw ConfigError("no validation maze seeds given");
    config.check();

    RunRecord record;
    record.config = config;
    record.final_population = population_from_text(text);
    record.run_seed = record.final_population.master_seed;
    const auto mazes = make_mazes(config.validation_maze_seeds, config.maze);
    auto summary = validate(record.final_population, mazes, config.episode_options(), threads);
    summary.generation = record.final_population.generation;
    record.validations.push_back(std::move(summary));
    write_artifact(out_or_default(out, "validation.csv"), validation_table(record));
    return 0;
}

std::string analysis_preamble(const std::string& what, const std::vector<RunRecord>& runs) {
    std::string out = "# format " + std::string(kTableFormat) + " " + what + "\n";
    for (const auto& r : runs) {
        out += "# run " + r.config.name + " seed " + std::to_string(r.run_seed);
        if (!r.sweep_axis.empty()) out += " " + r.sweep_axis + "=" + r.sweep_value;
        out += "\n";
    }
    if (runs.size() == 1) out += "# config " + config_to_json(runs.front().config).dump() + "\n";
    return out;
}

struct AnalyzeFlags {
    std::string run_dir;
    std::string what;
    std::string out;
    int bins = 20;
    double max_loss = 0.05;
    double epsilon = 0.0;
    int threads = 1;
};

int cmd_analyze(const AnalyzeFlags& f) {
    std::vector<RunRecord> runs;
    for (const auto& dir : find_runs(f.run_dir)) runs.push_back(read_run(dir));
    if (runs.empty()) throw ConfigError("no run directories under " + f.run_dir);
    auto completed = [&] {
        for (const auto& r : runs)
            if (!r.completed) throw ConfigError("run " + r.config.name + " seed " + std::to_string(r.run_seed) +
                                                " did not finish; resume it first");
    };
    auto single = [&]() -> const RunRecord& {
        if (runs.size() != 1) throw ConfigError("--what " + f.what + " needs --run-dir pointing at a single run");
        completed();
        return runs.front();
    };

    std::string body;
    if (f.what == "histogram") {
        completed();
        std::vector<Genome> genomes;
        for (const auto& r : runs)
            genomes.insert(genomes.end(), r.final_population.agents.begin(), r.final_population.agents.end());
        body = histogram_csv(weight_histogram(genomes, f.bins));
    } else if (f.what == "sparsity") {
        body = "run,generation,mean_sparsity,min_sparsity\n";
        for (std::size_t k = 0; k < runs.size(); ++k) {
            const auto mean = sparsity_trajectory(runs[k]);
            const auto densest = min_sparsity_trajectory(runs[k]);
            for (std::size_t g = 0; g < mean.size(); ++g)
                body += std::to_string(k) + ',' + std::to_string(runs[k].metrics[g].generation) + ',' +
                        format_double(mean[g]) + ',' + format_double(densest[g]) + '\n';
        }
    } else if (f.what == "correlation") {
        completed();
        body = correlation_csv(sparsity_vs_validation(runs));
    } else if (f.what == "active") {
        const auto& r = single();
        const auto mazes = make_mazes(r.config.training_maze_seeds, r.config.maze);
        body = active_csv(active_connections(r.best_genome(), mazes, r.config.mutation(), r.config.episode_options(),
                                             f.epsilon, f.threads));
    } else if (f.what == "prune-curve") {
        const auto& r = single();
        const auto mazes = make_mazes(r.config.validation_maze_seeds, r.config.maze);
        const auto curve = threshold_prune_curve(r.best_genome(), mazes, prune_thresholds(r.best_genome()),
                                                 r.config.episode_options());
        const auto budget = prune_budget(curve, f.max_loss);
        body = prune_curve_csv(curve) + "# budget max_loss " + format_double(f.max_loss) + " removed_fraction " +
               format_double(budget.removed_fraction) + " remaining " + std::to_string(budget.remaining) + "\n";
    } else {
        body = components_csv(subnetwork_components(single().best_genome()));
    }
    write_artifact(out_or_default(f.out, f.what + ".csv"), analysis_preamble(f.what, runs) + body);
    return 0;
}

Maze load_maze(const std::string& spec) {
    if (fs::is_regular_file(spec)) return maze_from_text(read_file(spec));
    std::size_t used = 0;
    std::uint64_t seed = 0;
    try {
        seed = std::stoull(spec, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != spec.size()) throw ConfigError("--maze is neither a file nor a seed: " + spec);
    return generate_maze(seed);
}

int cmd_replay(const std::string& genome_path, const std::string& maze_spec, int steps, const std::string& mode,
               const std::string& out) {
    Genome genome;
    try {
        genome = genome_from_json(nlohmann::json::parse(read_file(genome_path)));
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("malformed genome file: ") + e.what());
    }
    const auto maze = load_maze(maze_spec);
    EpisodeOptions opts;
    opts.steps = steps;
    opts.distance_mode = mode == "max" ? DistanceMode::Max : DistanceMode::Final;
    opts.record_trajectory = true;
    const auto result = run_episode(maze, genome, opts);
    write_artifact(out_or_default(out, "trace.tsv"), trace_to_text(maze, genome, result));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Evolutionary pruning of maze-navigating recurrent networks"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(kConfigFormat));

    std::uint64_t maze_seed = 0;
    int maze_width = MazeParams{}.width, maze_height = MazeParams{}.height;
    std::string maze_out;
    auto* gen = app.add_subcommand("generate-maze", "write one maze file");
    gen->add_option("--seed", maze_seed);
    gen->add_option("--width", maze_width)->check(CLI::Range(3, 1 << 16));
    gen->add_option("--height", maze_height)->check(CLI::Range(3, 1 << 16));
    gen->add_option("--out", maze_out, "output file");

    TrainFlags train_flags;
    auto* train = app.add_subcommand("train", "evolve one condition for every run seed");
    const auto train_config_opts = add_config_flags(train, train_flags);
    add_run_flags(train, train_flags);
    auto* resume = train->add_option("--resume", train_flags.resume, "checkpoint to continue from")
                       ->check(CLI::ExistingFile);
    for (auto* o : train_config_opts) resume->excludes(o);
    train->add_option("--stop-at", train_flags.stop_at, "checkpoint and stop at this generation")
        ->check(CLI::PositiveNumber);

    TrainFlags sweep_flags;
    std::string axis;
    std::vector<std::string> values;
    auto* sweep = app.add_subcommand("sweep", "one run set per value along an axis");
    add_config_flags(sweep, sweep_flags);
    add_run_flags(sweep, sweep_flags);
    sweep->add_option("--axis", axis)->required()->check(CLI::IsMember({"p-connect", "network-size", "population-size"}));
    sweep->add_option("--values", values, "comma-separated values")->delimiter(',');

    std::string population_path, validate_out;
    std::vector<std::uint64_t> validate_seeds;
    int validate_threads = 1;
    auto* val = app.add_subcommand("validate", "summarize a population on held-out mazes");
    val->add_option("--population", population_path, "population or checkpoint file")
        ->required()
        ->check(CLI::ExistingFile);
    val->add_option("--maze-seeds", validate_seeds, "validation maze seeds")->delimiter(',');
    val->add_option("--threads", validate_threads)->check(CLI::PositiveNumber);
    val->add_option("--out", validate_out, "output table");

    AnalyzeFlags analyze_flags;
    auto* analyze = app.add_subcommand("analyze", "post-hoc tables from results directories");
    analyze->add_option("--run-dir", analyze_flags.run_dir)->required()->check(CLI::ExistingDirectory);
    analyze->add_option("--what", analyze_flags.what)
        ->required()
        ->check(CLI::IsMember({"histogram", "sparsity", "correlation", "active", "prune-curve", "components"}));
    analyze->add_option("--out", analyze_flags.out, "output table");
    analyze->add_option("--bins", analyze_flags.bins)->check(CLI::PositiveNumber);
    analyze->add_option("--max-loss", analyze_flags.max_loss, "allowed relative loss for the prune budget")
        ->check(CLI::Range(0.0, 1.0));
    analyze->add_option("--epsilon", analyze_flags.epsilon, "fitness tolerance for active connections")
        ->check(CLI::NonNegativeNumber);
    analyze->add_option("--threads", analyze_flags.threads)->check(CLI::PositiveNumber);

    std::string genome_path, maze_spec, replay_mode = "final", replay_out;
    int replay_steps = kDefaultSteps;
    auto* replay = app.add_subcommand("replay", "per-step trace of one genome in one maze");
    replay->add_option("--genome", genome_path)->required()->check(CLI::ExistingFile);
    replay->add_option("--maze", maze_spec, "maze file or seed")->required();
    replay->add_option("--steps", replay_steps)->check(CLI::PositiveNumber);
    replay->add_option("--distance-mode", replay_mode)->check(CLI::IsMember({"final", "max"}));
    replay->add_option("--out", replay_out, "output trace");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*gen) return cmd_generate_maze(maze_seed, maze_width, maze_height, maze_out);
        if (*train) return cmd_train(train_flags);
        if (*sweep) return cmd_sweep(sweep_flags, axis, values);
        if (*val) return cmd_validate(population_path, validate_seeds, validate_threads, validate_out);
        if (*analyze) return cmd_analyze(analyze_flags);
        if (*replay) return cmd_replay(genome_path, maze_spec, replay_steps, replay_mode, replay_out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
