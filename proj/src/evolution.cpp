#include "evoprune/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "evoprune/errors.hpp"
#include "evoprune/format.hpp"
#include "evoprune/parallel.hpp"

namespace evoprune {

double FitnessBreakdown::performance() const {
    if (distances.empty()) return 0.0;
    double sum = 0.0;
    for (int d : distances) sum += d;
    return sum / static_cast<double>(distances.size());
}

double smr(std::span<const double> distances) {
    if (distances.empty()) return 0.0;
    double root_sum = 0.0;
    for (double d : distances) {
        if (!(d >= 0.0)) throw ParameterError("smr requires non-negative distances");
        root_sum += std::sqrt(d);
    }
    const double mean_root = root_sum / static_cast<double>(distances.size());
    return mean_root * mean_root;
}

double smr(std::span<const int> distances) {
    std::vector<double> as_real(distances.begin(), distances.end());
    return smr(as_real);
}

FitnessBreakdown evaluate_genome(const Genome& genome, std::span<const Maze> mazes, const MutationParams& params,
                                 const EpisodeOptions& episode) {
    if (mazes.empty()) throw ConfigError("fitness evaluation needs at least one maze");
    const CompiledNetwork network(genome);
    FitnessBreakdown fb;
    fb.distances.reserve(mazes.size());
    double penalty = 0.0;
    for (const Maze& maze : mazes) {
        const auto result = run_episode(maze, network, episode);
        fb.distances.push_back(result.distance);
        penalty = std::max(penalty, result.mean_activation);
    }
    fb.smr = smr(std::span<const int>(fb.distances));
    fb.activation_penalty = penalty;
    if (params.f_sparsity != 0.0) {
        const double zeros = static_cast<double>(genome.n) * genome.n - nonzero_count(genome);
        const double amount = params.sparsity_unit == SparsityUnit::Count ? zeros : sparsity(genome);
        fb.sparsity_term = params.f_sparsity * amount;
    }
    fb.total = fb.smr - fb.activation_penalty + fb.sparsity_term;
    return fb;
}

std::vector<FitnessBreakdown> evaluate(const Population& pop, std::span<const Maze> mazes,
                                       const MutationParams& params, const EvaluationOptions& options) {
    std::vector<FitnessBreakdown> out(pop.agents.size());
    parallel_for(pop.agents.size(), options.threads,
                 [&](std::size_t i) { out[i] = evaluate_genome(pop.agents[i], mazes, params, options.episode); });
    return out;
}

SelectionPlan plan_selection(std::span<const double> fitnesses, double cap) {
    const std::size_t n = fitnesses.size();
    if (n < 2) throw ParameterError("selection needs at least two agents");
    auto key = [&](std::size_t i) {
        const double f = fitnesses[i];
        return std::isnan(f) ? -std::numeric_limits<double>::infinity() : f;
    };
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return key(a) > key(b); });

    SelectionPlan plan;
    const std::size_t top = n / 2;
    plan.survivors.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(top));
    plan.replaced.assign(order.begin() + static_cast<std::ptrdiff_t>(top), order.end());
    std::sort(plan.replaced.begin(), plan.replaced.end());

    // Shift so the lowest finite survivor sits at zero when fitness is negative.
    double lowest = std::numeric_limits<double>::infinity();
    for (std::size_t i : plan.survivors)
        if (std::isfinite(fitnesses[i])) lowest = std::min(lowest, fitnesses[i]);
    const double shift = std::isfinite(lowest) ? std::min(0.0, lowest) : 0.0;
    std::vector<double> weight(top, 0.0);
    double total = 0.0;
    for (std::size_t k = 0; k < top; ++k) {
        const double f = fitnesses[plan.survivors[k]];
        weight[k] = std::isfinite(f) ? f - shift : 0.0;
        total += weight[k];
    }
    if (!(total > 0.0) || !std::isfinite(total)) {
        std::fill(weight.begin(), weight.end(), 1.0);
    }

    const double limit = cap > 0.0 ? std::max(cap, 1.0 / static_cast<double>(top)) : 1.0;
    std::vector<double> share(top, 0.0);
    std::vector<bool> capped(top, false);
    std::size_t n_capped = 0;
    while (true) {
        const double remaining = 1.0 - limit * static_cast<double>(n_capped);
        double free_weight = 0.0;
        for (std::size_t k = 0; k < top; ++k)
            if (!capped[k]) free_weight += weight[k];
        bool changed = false;
        for (std::size_t k = 0; k < top; ++k) {
            if (capped[k]) continue;
            share[k] = free_weight > 0.0 ? remaining * weight[k] / free_weight
                                         : remaining / static_cast<double>(top - n_capped);
        }
        for (std::size_t k = 0; k < top; ++k) {
            if (!capped[k] && share[k] > limit) {
                capped[k] = true;
                share[k] = limit;
                ++n_capped;
                changed = true;
            }
        }
        if (!changed) break;
    }

    plan.probabilities.assign(n, 0.0);
    for (std::size_t k = 0; k < top; ++k) plan.probabilities[plan.survivors[k]] = share[k];
    return plan;
}

std::vector<double> reproduction_probabilities(std::span<const double> fitnesses, double cap) {
    return plan_selection(fitnesses, cap).probabilities;
}

Population reproduce(const Population& pop, const SelectionPlan& plan) {
    if (plan.probabilities.size() != pop.agents.size())
        throw ParameterError("selection plan does not match population size");
    std::vector<double> cumulative(plan.probabilities.size());
    std::partial_sum(plan.probabilities.begin(), plan.probabilities.end(), cumulative.begin());
    std::size_t last_positive = 0;
    for (std::size_t i = 0; i < plan.probabilities.size(); ++i)
        if (plan.probabilities[i] > 0.0) last_positive = i;

    Population next = pop;
    for (std::size_t slot : plan.replaced) {
        Rng rng(derive_seed(pop.master_seed, static_cast<std::uint64_t>(pop.generation), slot, Stream::Selection));
        const double u = rng.uniform() * cumulative.back();
        auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
        std::size_t parent = it == cumulative.end() ? last_positive : static_cast<std::size_t>(it - cumulative.begin());
        if (plan.probabilities[parent] <= 0.0) parent = last_positive;
        next.agents[slot] = pop.agents[parent];
    }
    return next;
}

Genome mutate_weights(Genome genome, Rng& rng) {
    const double sd = std::abs(genome.sigma_mut);
    auto values = genome.weights.values();
    for (std::size_t k = 0; k < values.size(); ++k)
        if (genome.mask[k]) values[k] += rng.gaussian(0.0, sd);
    return genome;
}

Genome mutate_rate(Genome genome, Rng& rng) {
    genome.sigma_mut *= rng.gaussian(1.0, std::abs(genome.sigma_mut));
    return genome;
}

Genome mutate_connections(Genome genome, const MutationParams& params, Rng& rng) {
    const double sigma = init_sigma(genome.n);
    const std::vector<std::uint8_t> before = genome.mask;
    auto values = genome.weights.values();
    for (std::size_t k = 0; k < before.size(); ++k) {
        const double u = rng.uniform();
        if (before[k]) {
            if (u < params.p_disconnect) {
                genome.mask[k] = 0;
                values[k] = 0.0;
            }
        } else if (u < params.p_connect) {
            genome.mask[k] = 1;
            values[k] = rng.uniform(-sigma, sigma);
        }
    }
    return genome;
}

Genome mutate_threshold(Genome genome, Rng& rng) {
    // multiplicative mutation cannot leave an exact zero
    if (genome.tau == 0.0) genome.tau = init_sigma(genome.n) / 10.0;
    genome.tau = std::abs(genome.tau * rng.gaussian(1.0, std::abs(genome.sigma_mut)));
    return genome;
}

Genome mutate_agent(Genome genome, const MutationParams& params, std::uint64_t master_seed, int generation,
                    std::size_t agent) {
    const auto gen = static_cast<std::uint64_t>(generation);
    if (params.weight_mutation_on) {
        Rng weights(derive_seed(master_seed, gen, agent, Stream::Weights));
        genome = mutate_weights(std::move(genome), weights);
        Rng rate(derive_seed(master_seed, gen, agent, Stream::Rate));
        genome = mutate_rate(std::move(genome), rate);
    }
    if (params.p_disconnect > 0.0 || params.p_connect > 0.0) {
        Rng connections(derive_seed(master_seed, gen, agent, Stream::Connections));
        genome = mutate_connections(std::move(genome), params, connections);
    }
    if (params.threshold_mutation_on) {
        Rng threshold(derive_seed(master_seed, gen, agent, Stream::Threshold));
        genome = mutate_threshold(std::move(genome), threshold);
    }
    return genome;
}

GenerationMetrics summarize(const Population& pop, std::span<const FitnessBreakdown> fitness) {
    GenerationMetrics m;
    m.generation = pop.generation;
    const std::size_t n = pop.agents.size();
    if (n == 0) return m;
    m.best_fitness = -std::numeric_limits<double>::infinity();
    m.best_train_perf = -std::numeric_limits<double>::infinity();
    m.min_sparsity = std::numeric_limits<double>::infinity();
    double fit_sum = 0.0, perf_sum = 0.0, sparsity_sum = 0.0, sigma_sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double f = fitness[i].total;
        const double perf = fitness[i].performance();
        const double s = sparsity(pop.agents[i]);
        if (f > m.best_fitness) {
            m.best_fitness = f;
            m.best_agent = i;
        }
        m.best_train_perf = std::max(m.best_train_perf, perf);
        m.min_sparsity = std::min(m.min_sparsity, s);
        fit_sum += f;
        perf_sum += perf;
        sparsity_sum += s;
        sigma_sum += std::abs(pop.agents[i].sigma_mut);
    }
    const auto count = static_cast<double>(n);
    m.mean_fitness = fit_sum / count;
    m.mean_train_perf = perf_sum / count;
    m.mean_sparsity = sparsity_sum / count;
    m.mean_sigma_mut = sigma_sum / count;
    return m;
}

GenerationResult step_generation(const Population& pop, std::span<const Maze> mazes,
                                 const EvolutionSettings& settings) {
    GenerationResult result;
    result.fitness = evaluate(pop, mazes, settings.mutation, settings.evaluation);
    result.metrics = summarize(pop, result.fitness);

    std::vector<double> totals(result.fitness.size());
    for (std::size_t i = 0; i < totals.size(); ++i) totals[i] = result.fitness[i].total;
    const SelectionPlan plan = plan_selection(totals, settings.selection_cap);
    result.next = reproduce(pop, plan);
    parallel_for(result.next.agents.size(), settings.evaluation.threads, [&](std::size_t i) {
        result.next.agents[i] =
            mutate_agent(std::move(result.next.agents[i]), settings.mutation, pop.master_seed, pop.generation, i);
    });
    result.next.generation = pop.generation + 1;
    return result;
}

std::string metrics_csv_header() {
    return "generation,best_fitness,mean_fitness,best_train_perf,mean_train_perf,mean_sparsity,min_sparsity,"
           "mean_sigma_mut\n";
}

std::string metrics_csv_row(const GenerationMetrics& m) {
    return std::to_string(m.generation) + ',' + format_double(m.best_fitness) + ',' + format_double(m.mean_fitness) +
           ',' + format_double(m.best_train_perf) + ',' + format_double(m.mean_train_perf) + ',' +
           format_double(m.mean_sparsity) + ',' + format_double(m.min_sparsity) + ',' +
           format_double(m.mean_sigma_mut) + '\n';
}

}  // namespace evoprune
