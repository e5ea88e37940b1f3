#include "evoprune/experiments.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <set>
#include <sstream>

#include "evoprune/errors.hpp"
#include "evoprune/format.hpp"
#include "evoprune/parallel.hpp"
#include "evoprune/serialization.hpp"

namespace evoprune {

namespace fs = std::filesystem;

Profile parse_profile(std::string_view name) {
    if (name == "desk") return Profile::Desk;
    if (name == "paper") return Profile::Paper;
    throw ConfigError("unknown profile '" + std::string(name) + "' (expected desk or paper)");
}

const char* to_string(Profile p) { return p == Profile::Desk ? "desk" : "paper"; }
const char* to_string(SparsityUnit u) { return u == SparsityUnit::Count ? "count" : "fraction"; }
const char* to_string(DistanceMode m) { return m == DistanceMode::Final ? "final" : "max"; }

MutationParams ExperimentConfig::mutation() const {
    MutationParams p;
    p.p_disconnect = p_disconnect;
    p.p_connect = p_connect;
    p.f_sparsity = f_sparsity;
    p.weight_mutation_on = weight_mutation;
    p.threshold_mutation_on = threshold_mutation;
    p.sparsity_unit = sparsity_unit;
    return p;
}

GenomeOptions ExperimentConfig::genome_options() const {
    return {n_neurons, sigma_mut_init, bias_neuron, threshold_mutation};
}

EpisodeOptions ExperimentConfig::episode_options() const { return {steps, distance_mode, false}; }

namespace {

struct Table1Row {
    const char* name;
    double sigma_mut;
    bool weight_mutation;
    double p;
    double f_sparsity;
};

// "-" entries of the table map to 0 / disabled.
constexpr Table1Row kTable1[] = {
    {"control", 0.01, true, 0.0, 0.0},
    {"connection severance", 0.01, true, 0.01, 0.0},
    {"connection severance (low rate)", 0.01, true, 0.001, 0.0},
    {"connection severance no mut", 0.0, false, 0.01, 0.0},
    {"connection severance sparsity reward", 0.01, true, 0.01, 0.1},
    {"sparsity reward", 0.01, true, 0.0, 0.1},
};

const Table1Row* find_row(std::string_view name) {
    for (const auto& row : kTable1)
        if (name == row.name) return &row;
    return nullptr;
}

std::vector<std::uint64_t> seed_range(std::uint64_t first, std::uint64_t count) {
    std::vector<std::uint64_t> out;
    for (std::uint64_t k = 0; k < count; ++k) out.push_back(first + k);
    return out;
}

}  // namespace

const std::vector<std::string>& table1_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> v;
        for (const auto& row : kTable1) v.emplace_back(row.name);
        return v;
    }();
    return names;
}

ExperimentConfig table1_config(std::string_view name, Profile profile) {
    const Table1Row* row = find_row(name);
    if (!row) throw ConfigError("unknown experiment '" + std::string(name) + "'");
    ExperimentConfig c;
    c.name = row->name;
    c.profile = to_string(profile);
    c.sigma_mut_init = row->sigma_mut;
    c.weight_mutation = row->weight_mutation;
    c.p_disconnect = row->p;
    c.p_connect = row->p;
    c.f_sparsity = row->f_sparsity;
    c.training_maze_seeds = seed_range(1000, 10);
    c.validation_maze_seeds = seed_range(2000, 10);
    if (profile == Profile::Desk) {
        c.pool_size = 200;
        c.generations = 500;
        c.run_seeds = seed_range(1, 3);
    } else {
        c.pool_size = 1000;
        c.generations = 5000;
        c.run_seeds = seed_range(1, 5);
    }
    return c;
}

void ExperimentConfig::check() const {
    if (pool_size < 2) throw ConfigError("pool_size must be at least 2");
    if (generations < 0) throw ConfigError("generations must be non-negative");
    if (n_neurons < kMinNeurons) throw ConfigError("n_neurons must be at least 11");
    if (steps < 1) throw ConfigError("steps must be at least 1");
    if (validation_every < 1) throw ConfigError("validation_every must be at least 1");
    if (checkpoint_every < 0) throw ConfigError("checkpoint_every must be non-negative");
    for (double p : {p_disconnect, p_connect})
        if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("connection probabilities must lie in [0, 1]");
    if (!(f_sparsity >= 0.0)) throw ConfigError("f_sparsity must be non-negative");
    if (training_maze_seeds.empty()) throw ConfigError("at least one training maze is required");
    if (run_seeds.empty()) throw ConfigError("at least one run seed is required");
    const std::set<std::uint64_t> train(training_maze_seeds.begin(), training_maze_seeds.end());
    for (auto s : validation_maze_seeds)
        if (train.contains(s))
            throw ConfigError("validation maze seed " + std::to_string(s) + " is also a training maze seed");
    parse_profile(profile);
    if (const Table1Row* row = find_row(name)) {
        if (sigma_mut_init != row->sigma_mut || weight_mutation != row->weight_mutation ||
            p_disconnect != row->p || p_connect != row->p || f_sparsity != row->f_sparsity)
            throw ConfigError("config named '" + name + "' does not match its Table 1 settings; rename it");
    }
}

ordered_json config_to_json(const ExperimentConfig& c) {
    ordered_json j;
    j["format"] = kConfigFormat;
    j["name"] = c.name;
    j["profile"] = c.profile;
    j["sigma_mut_init"] = c.sigma_mut_init;
    j["p_disconnect"] = c.p_disconnect;
    j["p_connect"] = c.p_connect;
    j["f_sparsity"] = c.f_sparsity;
    j["weight_mutation"] = c.weight_mutation;
    j["threshold_mutation"] = c.threshold_mutation;
    j["bias_neuron"] = c.bias_neuron;
    j["sparsity_unit"] = to_string(c.sparsity_unit);
    j["distance_mode"] = to_string(c.distance_mode);
    j["pool_size"] = c.pool_size;
    j["generations"] = c.generations;
    j["n_neurons"] = c.n_neurons;
    j["steps"] = c.steps;
    j["validation_every"] = c.validation_every;
    j["checkpoint_every"] = c.checkpoint_every;
    j["selection_cap"] = c.selection_cap;
    j["maze"] = {{"width", c.maze.width},
                 {"height", c.maze.height},
                 {"spacing", {c.maze.spacing.lo, c.maze.spacing.hi}},
                 {"length", {c.maze.length.lo, c.maze.length.hi}},
                 {"same_side_prob", c.maze.same_side_prob}};
    j["training_maze_seeds"] = c.training_maze_seeds;
    j["validation_maze_seeds"] = c.validation_maze_seeds;
    j["run_seeds"] = c.run_seeds;
    j["stream_version"] = kStreamVersion;
    return j;
}

ExperimentConfig config_from_json(const nlohmann::json& j) {
    check_format(j, kConfigFormat);
    ExperimentConfig c;
    try {
        for (const auto& [key, value] : j.items()) {
            if (key == "format") continue;
            else if (key == "name") c.name = value.get<std::string>();
            else if (key == "profile") c.profile = value.get<std::string>();
            else if (key == "sigma_mut_init") c.sigma_mut_init = value.get<double>();
            else if (key == "p_disconnect") c.p_disconnect = value.get<double>();
            else if (key == "p_connect") c.p_connect = value.get<double>();
            else if (key == "f_sparsity") c.f_sparsity = value.get<double>();
            else if (key == "weight_mutation") c.weight_mutation = value.get<bool>();
            else if (key == "threshold_mutation") c.threshold_mutation = value.get<bool>();
            else if (key == "bias_neuron") c.bias_neuron = value.get<bool>();
            else if (key == "sparsity_unit") {
                const auto s = value.get<std::string>();
                if (s == "count") c.sparsity_unit = SparsityUnit::Count;
                else if (s == "fraction") c.sparsity_unit = SparsityUnit::Fraction;
                else throw ConfigError("sparsity_unit must be count or fraction");
            } else if (key == "distance_mode") {
                const auto s = value.get<std::string>();
                if (s == "final") c.distance_mode = DistanceMode::Final;
                else if (s == "max") c.distance_mode = DistanceMode::Max;
                else throw ConfigError("distance_mode must be final or max");
            }
            else if (key == "pool_size") c.pool_size = value.get<int>();
            else if (key == "generations") c.generations = value.get<int>();
            else if (key == "n_neurons") c.n_neurons = value.get<int>();
            else if (key == "steps") c.steps = value.get<int>();
            else if (key == "validation_every") c.validation_every = value.get<int>();
            else if (key == "checkpoint_every") c.checkpoint_every = value.get<int>();
            else if (key == "selection_cap") c.selection_cap = value.get<double>();
            else if (key == "maze") {
                for (const auto& [mk, mv] : value.items()) {
                    if (mk == "width") c.maze.width = mv.get<int>();
                    else if (mk == "height") c.maze.height = mv.get<int>();
                    else if (mk == "spacing") c.maze.spacing = {mv.at(0).get<int>(), mv.at(1).get<int>()};
                    else if (mk == "length") c.maze.length = {mv.at(0).get<int>(), mv.at(1).get<int>()};
                    else if (mk == "same_side_prob") c.maze.same_side_prob = mv.get<double>();
                    else throw ConfigError("unknown maze config key '" + mk + "'");
                }
            }
            else if (key == "training_maze_seeds") c.training_maze_seeds = value.get<std::vector<std::uint64_t>>();
            else if (key == "validation_maze_seeds") c.validation_maze_seeds = value.get<std::vector<std::uint64_t>>();
            else if (key == "run_seeds") c.run_seeds = value.get<std::vector<std::uint64_t>>();
            else if (key == "stream_version") {
                if (value.get<int>() != kStreamVersion) throw ConfigError("config was written with another RNG stream version");
            }
            else throw ConfigError("unknown config key '" + key + "'");
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("bad config value: ") + e.what());
    }
    c.check();
    return c;
}

std::string config_to_text(const ExperimentConfig& config) { return config_to_json(config).dump(2) + "\n"; }

ExperimentConfig config_from_text(const std::string& text) {
    try {
        return config_from_json(nlohmann::json::parse(text));
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
}

std::vector<Maze> make_mazes(std::span<const std::uint64_t> seeds, const MazeParams& params) {
    std::vector<Maze> mazes;
    mazes.reserve(seeds.size());
    for (auto s : seeds) mazes.push_back(generate_maze(s, params));
    return mazes;
}

DistributionSummary summarize_distribution(std::vector<double> values) {
    DistributionSummary s;
    if (values.empty()) return s;
    std::sort(values.begin(), values.end());
    auto quantile = [&](double q) {
        const double pos = q * static_cast<double>(values.size() - 1);
        const auto lo = static_cast<std::size_t>(std::floor(pos));
        const std::size_t hi = std::min(lo + 1, values.size() - 1);
        const double frac = pos - static_cast<double>(lo);
        return values[lo] + frac * (values[hi] - values[lo]);
    };
    s.min = values.front();
    s.max = values.back();
    s.p25 = quantile(0.25);
    s.p75 = quantile(0.75);
    double sum = 0.0;
    for (double v : values) sum += v;
    s.mean = sum / static_cast<double>(values.size());
    return s;
}

ValidationSummary validate(const Population& pop, std::span<const Maze> validation_mazes, const EpisodeOptions& episode,
                           int threads) {
    ValidationSummary summary;
    summary.generation = pop.generation;
    const std::size_t agents = pop.agents.size();
    const std::size_t mazes = validation_mazes.size();
    for (const auto& m : validation_mazes) summary.maze_seeds.push_back(m.seed());
    std::vector<double> distance(agents * mazes, 0.0);
    parallel_for(agents, threads, [&](std::size_t a) {
        const CompiledNetwork net(pop.agents[a]);
        for (std::size_t m = 0; m < mazes; ++m)
            distance[a * mazes + m] = run_episode(validation_mazes[m], net, episode).distance;
    });
    summary.agent_means.assign(agents, 0.0);
    double total = 0.0;
    for (std::size_t a = 0; a < agents; ++a) {
        double sum = 0.0;
        for (std::size_t m = 0; m < mazes; ++m) sum += distance[a * mazes + m];
        total += sum;
        summary.agent_means[a] = mazes ? sum / static_cast<double>(mazes) : 0.0;
    }
    for (std::size_t m = 0; m < mazes; ++m) {
        std::vector<double> column(agents);
        for (std::size_t a = 0; a < agents; ++a) column[a] = distance[a * mazes + m];
        summary.per_maze.push_back(summarize_distribution(std::move(column)));
    }
    summary.overall = agents && mazes ? total / static_cast<double>(agents * mazes) : 0.0;
    return summary;
}

std::size_t RunRecord::best_agent() const {
    if (final_fitness.empty() && !metrics.empty()) return static_cast<std::size_t>(metrics.back().best_agent);
    std::size_t best = 0;
    for (std::size_t i = 1; i < final_fitness.size(); ++i)
        if (final_fitness[i].total > final_fitness[best].total) best = i;
    return best;
}

bool RunRecord::same_outcome(const RunRecord& other) const {
    if (!(config == other.config) || run_seed != other.run_seed || metrics.size() != other.metrics.size())
        return false;
    for (std::size_t i = 0; i < metrics.size(); ++i)
        if (metrics_csv_row(metrics[i]) != metrics_csv_row(other.metrics[i])) return false;
    if (validations != other.validations) return false;
    if (final_population.generation != other.final_population.generation ||
        final_population.agents != other.final_population.agents)
        return false;
    if (final_fitness.size() != other.final_fitness.size()) return false;
    for (std::size_t i = 0; i < final_fitness.size(); ++i)
        if (final_fitness[i].distances != other.final_fitness[i].distances ||
            final_fitness[i].total != other.final_fitness[i].total)
            return false;
    return true;
}

namespace {

double parse_double(std::string_view text) {
    double value = 0.0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
    if (res.ec != std::errc() || res.ptr != text.data() + text.size())
        throw FormatError("bad number '" + std::string(text) + "'");
    return value;
}

GenerationMetrics parse_metrics_row(const std::string& row) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream in(row);
    while (std::getline(in, field, ',')) fields.push_back(field);
    if (fields.size() != 8) throw FormatError("metrics row has wrong column count: " + row);
    GenerationMetrics m;
    m.generation = std::stoi(fields[0]);
    m.best_fitness = parse_double(fields[1]);
    m.mean_fitness = parse_double(fields[2]);
    m.best_train_perf = parse_double(fields[3]);
    m.mean_train_perf = parse_double(fields[4]);
    m.mean_sparsity = parse_double(fields[5]);
    m.min_sparsity = parse_double(fields[6]);
    m.mean_sigma_mut = parse_double(fields[7]);
    return m;
}

ordered_json validation_to_json(const ValidationSummary& v) {
    ordered_json j;
    j["generation"] = v.generation;
    j["maze_seeds"] = v.maze_seeds;
    auto per_maze = ordered_json::array();
    for (const auto& s : v.per_maze) per_maze.push_back({s.min, s.p25, s.mean, s.p75, s.max});
    j["per_maze"] = std::move(per_maze);
    j["agent_means"] = v.agent_means;
    j["overall"] = v.overall;
    return j;
}

ValidationSummary validation_from_json(const nlohmann::json& j) {
    ValidationSummary v;
    v.generation = j.at("generation").get<int>();
    v.maze_seeds = j.at("maze_seeds").get<std::vector<std::uint64_t>>();
    for (const auto& s : j.at("per_maze"))
        v.per_maze.push_back({s.at(0).get<double>(), s.at(1).get<double>(), s.at(2).get<double>(),
                              s.at(3).get<double>(), s.at(4).get<double>()});
    v.agent_means = j.at("agent_means").get<std::vector<double>>();
    v.overall = j.at("overall").get<double>();
    return v;
}

ordered_json agents_to_json(const std::vector<Genome>& agents) {
    auto arr = ordered_json::array();
    for (const auto& g : agents) arr.push_back(genome_to_json(g));
    return arr;
}

std::vector<Genome> agents_from_json(const nlohmann::json& j) {
    std::vector<Genome> agents;
    for (const auto& g : j) agents.push_back(genome_from_json(g));
    return agents;
}

}  // namespace

std::string checkpoint_to_text(const Checkpoint& cp) {
    ordered_json j;
    j["format"] = kCheckpointFormat;
    j["generation"] = cp.population.generation;
    j["master_seed"] = cp.population.master_seed;
    j["run_seed"] = cp.run_seed;
    j["stream_version"] = kStreamVersion;
    j["config"] = config_to_json(cp.config);
    auto rows = ordered_json::array();
    for (const auto& m : cp.metrics) {
        auto row = metrics_csv_row(m);
        row.pop_back();
        rows.push_back(row);
    }
    j["metrics"] = std::move(rows);
    j["wall_times"] = cp.wall_times;
    auto vals = ordered_json::array();
    for (const auto& v : cp.validations) vals.push_back(validation_to_json(v));
    j["validations"] = std::move(vals);
    j["agents"] = agents_to_json(cp.population.agents);
    return j.dump() + "\n";
}

Checkpoint checkpoint_from_text(const std::string& text) {
    try {
        const auto j = nlohmann::json::parse(text);
        check_format(j, kCheckpointFormat);
        if (j.at("stream_version").get<int>() != kStreamVersion)
            throw FormatError("checkpoint was written with another RNG stream version");
        Checkpoint cp;
        cp.config = config_from_json(j.at("config"));
        cp.run_seed = j.at("run_seed").get<std::uint64_t>();
        cp.population.generation = j.at("generation").get<int>();
        cp.population.master_seed = j.at("master_seed").get<std::uint64_t>();
        for (const auto& row : j.at("metrics")) cp.metrics.push_back(parse_metrics_row(row.get<std::string>()));
        cp.wall_times = j.at("wall_times").get<std::vector<double>>();
        for (const auto& v : j.at("validations")) cp.validations.push_back(validation_from_json(v));
        cp.population.agents = agents_from_json(j.at("agents"));
        return cp;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("malformed checkpoint: ") + e.what());
    }
}

std::string population_to_text(const Population& pop, const ExperimentConfig& config) {
    ordered_json j;
    j["format"] = kPopulationFormat;
    j["generation"] = pop.generation;
    j["master_seed"] = pop.master_seed;
    j["config"] = config_to_json(config);
    j["agents"] = agents_to_json(pop.agents);
    return j.dump() + "\n";
}

Population population_from_text(const std::string& text) {
    try {
        const auto j = nlohmann::json::parse(text);
        if (j.is_object() && j.value("format", "") == kCheckpointFormat) return checkpoint_from_text(text).population;
        check_format(j, kPopulationFormat);
        Population pop;
        pop.generation = j.at("generation").get<int>();
        pop.master_seed = j.at("master_seed").get<std::uint64_t>();
        pop.agents = agents_from_json(j.at("agents"));
        return pop;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("malformed population file: ") + e.what());
    }
}

namespace {

std::string table_preamble(const RunRecord& record, std::string_view table) {
    std::string out;
    out += "# format " + std::string(kTableFormat) + " " + std::string(table) + "\n";
    out += "# run_seed " + std::to_string(record.run_seed) + "\n";
    if (!record.sweep_axis.empty()) out += "# sweep " + record.sweep_axis + "=" + record.sweep_value + "\n";
    out += "# config " + config_to_json(record.config).dump() + "\n";
    return out;
}

std::string checkpoint_name(int generation) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "gen_%06d.json", generation);
    return buf;
}

}  // namespace

std::string metrics_table(const RunRecord& record) {
    std::string out = table_preamble(record, "metrics") + metrics_csv_header();
    for (const auto& m : record.metrics) out += metrics_csv_row(m);
    return out;
}

std::string timing_table(const RunRecord& record) {
    std::string out = table_preamble(record, "timing") + "generation,wall_time\n";
    for (std::size_t i = 0; i < record.wall_times.size() && i < record.metrics.size(); ++i)
        out += std::to_string(record.metrics[i].generation) + ',' + format_double(record.wall_times[i]) + '\n';
    return out;
}

std::string validation_table(const RunRecord& record) {
    std::string out = table_preamble(record, "validation") + "generation,maze_seed,min,p25,mean,p75,max\n";
    for (const auto& v : record.validations) {
        for (std::size_t m = 0; m < v.per_maze.size(); ++m) {
            const auto& s = v.per_maze[m];
            out += std::to_string(v.generation) + ',' + std::to_string(v.maze_seeds[m]) + ',' + format_double(s.min) +
                   ',' + format_double(s.p25) + ',' + format_double(s.mean) + ',' + format_double(s.p75) + ',' +
                   format_double(s.max) + '\n';
        }
        const auto overall = summarize_distribution(v.agent_means);
        out += std::to_string(v.generation) + ",all," + format_double(overall.min) + ',' + format_double(overall.p25) +
               ',' + format_double(v.overall) + ',' + format_double(overall.p75) + ',' + format_double(overall.max) +
               '\n';
    }
    return out;
}

void write_run(const RunRecord& record, const fs::path& dir) {
    fs::create_directories(dir);
    const ordered_json cfg = config_to_json(record.config);
    write_file((dir / "config.json").string(), cfg.dump(2) + "\n");
    ordered_json run;
    run["run_seed"] = record.run_seed;
    if (!record.sweep_axis.empty()) run["sweep"] = {{"axis", record.sweep_axis}, {"value", record.sweep_value}};
    run["completed"] = record.completed;
    run["generations_done"] = record.metrics.size();
    if (record.completed) run["best_agent"] = record.best_agent();
    run["config"] = cfg;
    write_file((dir / "run.json").string(), run.dump(2) + "\n");
    write_file((dir / "metrics.csv").string(), metrics_table(record));
    write_file((dir / "timing.csv").string(), timing_table(record));
    write_file((dir / "validation.csv").string(), validation_table(record));
    ordered_json vals;
    vals["format"] = kValidationFormat;
    vals["run_seed"] = record.run_seed;
    auto arr = ordered_json::array();
    for (const auto& v : record.validations) arr.push_back(validation_to_json(v));
    vals["validations"] = std::move(arr);
    write_file((dir / "validations.json").string(), vals.dump() + "\n");
    if (record.completed) {
        write_file((dir / "final_population.json").string(),
                   population_to_text(record.final_population, record.config));
        ordered_json best = genome_to_json(record.best_genome());
        write_file((dir / "best_genome.json").string(), best.dump(1) + "\n");
    }
}

namespace {

std::vector<std::string> table_rows(const std::string& text) {
    std::vector<std::string> rows;
    std::istringstream in(text);
    std::string line;
    bool header = true;
    while (std::getline(in, line)) {
        if (line.empty() || line.front() == '#') continue;
        if (header) {
            header = false;
            continue;
        }
        rows.push_back(line);
    }
    return rows;
}

std::vector<std::string> split_csv(const std::string& row) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream in(row);
    while (std::getline(in, field, ',')) fields.push_back(field);
    return fields;
}

}  // namespace

RunRecord read_run(const fs::path& dir) {
    RunRecord record;
    nlohmann::json run;
    try {
        record.config = config_from_text(read_file((dir / "config.json").string()));
        run = nlohmann::json::parse(read_file((dir / "run.json").string()));
        record.run_seed = run.at("run_seed").get<std::uint64_t>();
        record.completed = run.at("completed").get<bool>();
        if (run.contains("sweep")) {
            record.sweep_axis = run["sweep"].at("axis").get<std::string>();
            record.sweep_value = run["sweep"].at("value").get<std::string>();
        }
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("malformed run directory " + dir.string() + ": " + e.what());
    }
    for (const auto& row : table_rows(read_file((dir / "metrics.csv").string())))
        record.metrics.push_back(parse_metrics_row(row));
    for (const auto& row : table_rows(read_file((dir / "timing.csv").string()))) {
        const auto f = split_csv(row);
        if (f.size() != 2) throw FormatError("timing row has wrong column count: " + row);
        record.wall_times.push_back(parse_double(f[1]));
    }
    try {
        const auto vals = nlohmann::json::parse(read_file((dir / "validations.json").string()));
        check_format(vals, kValidationFormat);
        for (const auto& v : vals.at("validations")) record.validations.push_back(validation_from_json(v));
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("malformed validations in " + dir.string() + ": " + e.what());
    }
    if (record.completed) {
        record.final_population = population_from_text(read_file((dir / "final_population.json").string()));
        if (!record.metrics.empty()) record.metrics.back().best_agent = run.at("best_agent").get<std::size_t>();
    }
    return record;
}

std::vector<fs::path> find_runs(const fs::path& root) {
    std::vector<fs::path> runs;
    if (fs::exists(root / "run.json")) return {root};
    if (fs::is_directory(root))
        for (const auto& entry : fs::recursive_directory_iterator(root))
            if (entry.is_regular_file() && entry.path().filename() == "run.json")
                runs.push_back(entry.path().parent_path());
    std::sort(runs.begin(), runs.end());
    return runs;
}

RunRecord run_single(const ExperimentConfig& config, std::uint64_t run_seed, const RunOptions& options) {
    config.check();
    const auto training = make_mazes(config.training_maze_seeds, config.maze);
    const auto validation = make_mazes(config.validation_maze_seeds, config.maze);

    RunRecord record;
    record.config = config;
    record.run_seed = run_seed;

    Population pop;
    if (options.resume) {
        const Checkpoint& cp = *options.resume;
        if (!(cp.config == config) || cp.run_seed != run_seed)
            throw ConfigError("checkpoint belongs to a different config or run seed");
        pop = cp.population;
        record.metrics = cp.metrics;
        record.validations = cp.validations;
        record.wall_times = cp.wall_times;
    } else {
        pop.master_seed = run_seed;
        pop.generation = 0;
        pop.agents.reserve(static_cast<std::size_t>(config.pool_size));
        for (int i = 0; i < config.pool_size; ++i) {
            Rng rng(derive_seed(run_seed, 0, static_cast<std::uint64_t>(i), Stream::Init));
            pop.agents.push_back(init_genome(rng, config.genome_options()));
        }
    }

    EvolutionSettings settings;
    settings.mutation = config.mutation();
    settings.evaluation.episode = config.episode_options();
    settings.evaluation.threads = options.threads;
    settings.selection_cap = config.selection_cap;

    auto save_checkpoint = [&](const Population& at) {
        if (!options.out_dir) return;
        Checkpoint cp{config, run_seed, at, record.metrics, record.validations, record.wall_times};
        write_file((*options.out_dir / "checkpoints" / checkpoint_name(at.generation)).string(),
                   checkpoint_to_text(cp));
    };

    const int start = pop.generation;
    for (int g = start; g <= config.generations; ++g) {
        if (options.stop_at_generation && g == *options.stop_at_generation && g != start) {
            save_checkpoint(pop);
            record.final_population = pop;
            if (options.out_dir) write_run(record, *options.out_dir);
            return record;
        }
        if (config.checkpoint_every > 0 && g % config.checkpoint_every == 0 && g != start) save_checkpoint(pop);
        if (g % config.validation_every == 0 || g == config.generations)
            record.validations.push_back(validate(pop, validation, settings.evaluation.episode, options.threads));

        const auto t0 = std::chrono::steady_clock::now();
        if (g == config.generations) {
            record.final_fitness = evaluate(pop, training, settings.mutation, settings.evaluation);
            record.metrics.push_back(summarize(pop, record.final_fitness));
            record.metrics.back().best_agent = record.best_agent();
            record.final_population = pop;
        } else {
            auto step = step_generation(pop, training, settings);
            record.metrics.push_back(step.metrics);
            pop = std::move(step.next);
        }
        record.wall_times.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    }
    record.completed = true;
    if (options.out_dir) write_run(record, *options.out_dir);
    return record;
}

std::string slug(std::string_view name) {
    std::string out;
    for (char ch : name) {
        if (std::isalnum(static_cast<unsigned char>(ch))) out += static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
        else if (!out.empty() && out.back() != '_') out += '_';
    }
    while (!out.empty() && out.back() == '_') out.pop_back();
    return out;
}

std::vector<RunRecord> run_experiment(const ExperimentConfig& config, const RunOptions& options) {
    std::vector<RunRecord> records;
    for (auto seed : config.run_seeds) {
        RunOptions per_seed = options;
        if (options.out_dir) per_seed.out_dir = *options.out_dir / ("seed_" + std::to_string(seed));
        records.push_back(run_single(config, seed, per_seed));
    }
    return records;
}

namespace {

template <typename Value, typename Apply>
std::vector<RunRecord> run_sweep(const ExperimentConfig& base, std::string_view axis, std::span<const Value> values,
                                 const RunOptions& options, Apply apply) {
    std::vector<RunRecord> all;
    for (const Value& v : values) {
        ExperimentConfig cfg = base;
        apply(cfg, v);
        std::string label;
        if constexpr (std::is_floating_point_v<Value>) label = format_double(v);
        else label = std::to_string(v);
        RunOptions sub = options;
        if (options.out_dir) sub.out_dir = *options.out_dir / (std::string(axis) + "_" + label);
        for (auto& rec : run_experiment(cfg, sub)) {
            rec.sweep_axis = axis;
            rec.sweep_value = label;
            if (sub.out_dir) write_run(rec, *sub.out_dir / ("seed_" + std::to_string(rec.run_seed)));
            all.push_back(std::move(rec));
        }
    }
    return all;
}

void rename_if_table1(ExperimentConfig& cfg) {
    if (find_row(cfg.name)) {
        const Table1Row* row = find_row(cfg.name);
        if (cfg.p_connect != row->p || cfg.p_disconnect != row->p) cfg.name += " [sweep]";
    }
}

}  // namespace

std::vector<RunRecord> sweep_connect_ratio(const ExperimentConfig& base, std::span<const double> values,
                                           const RunOptions& options) {
    return run_sweep<double>(base, "p_connect", values, options, [](ExperimentConfig& cfg, double v) {
        cfg.p_connect = v;
        rename_if_table1(cfg);
    });
}

std::vector<RunRecord> sweep_network_size(const ExperimentConfig& base, std::span<const int> sizes,
                                          const RunOptions& options) {
    for (int s : sizes)
        if (s < kMinNeurons) throw ConfigError("network sizes must be at least 11");
    return run_sweep<int>(base, "n_neurons", sizes, options, [](ExperimentConfig& cfg, int v) { cfg.n_neurons = v; });
}

std::vector<RunRecord> sweep_population_size(const ExperimentConfig& base, std::span<const int> sizes,
                                             const RunOptions& options) {
    return run_sweep<int>(base, "pool_size", sizes, options, [](ExperimentConfig& cfg, int v) { cfg.pool_size = v; });
}

std::vector<std::uint64_t> cross_validation_seeds(int bunches, int mazes_per_bunch, std::uint64_t seed,
                                                  std::span<const std::uint64_t> excluded) {
    if (bunches < 1 || mazes_per_bunch < 1) throw ParameterError("bunch counts must be positive");
    std::set<std::uint64_t> used(excluded.begin(), excluded.end());
    Rng rng(derive_seed(seed, 0, 0, Stream::MazeSeeds));
    std::vector<std::uint64_t> out;
    const auto total = static_cast<std::size_t>(bunches) * static_cast<std::size_t>(mazes_per_bunch);
    while (out.size() < total) {
        const std::uint64_t s = rng.next() >> 32;
        if (used.insert(s).second) out.push_back(s);
    }
    return out;
}

std::vector<double> cross_validate(const Genome& genome, int bunches, int mazes_per_bunch, std::uint64_t seed,
                                   std::span<const std::uint64_t> excluded_seeds, const MazeParams& maze,
                                   const EpisodeOptions& episode) {
    const auto seeds = cross_validation_seeds(bunches, mazes_per_bunch, seed, excluded_seeds);
    const CompiledNetwork net(genome);
    std::vector<double> means;
    for (int b = 0; b < bunches; ++b) {
        double sum = 0.0;
        for (int k = 0; k < mazes_per_bunch; ++k) {
            const auto m = generate_maze(seeds[static_cast<std::size_t>(b) * mazes_per_bunch + k], maze);
            sum += run_episode(m, net, episode).distance;
        }
        means.push_back(sum / mazes_per_bunch);
    }
    return means;
}

}  // namespace evoprune
