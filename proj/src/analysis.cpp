#include "evoprune/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>

#include "evoprune/errors.hpp"
#include "evoprune/format.hpp"
#include "evoprune/parallel.hpp"

namespace evoprune {

Histogram weight_histogram(std::span<const Genome> genomes, int bins, double lo, double hi) {
    if (bins < 1) throw ParameterError("histogram needs at least one bin");
    std::vector<double> values;
    for (const auto& g : genomes) {
        const auto w = effective_weights(g);
        for (double v : w.values())
            if (v != 0.0) values.push_back(v);
    }
    Histogram h;
    h.total = values.size();
    h.counts.assign(static_cast<std::size_t>(bins), 0);
    if (lo == hi) {
        if (values.empty()) {
            lo = -1.0;
            hi = 1.0;
        } else {
            const auto [mn, mx] = std::minmax_element(values.begin(), values.end());
            const double bound = std::max(std::abs(*mn), std::abs(*mx));
            lo = -bound;
            hi = bound;
        }
    }
    h.edges.resize(static_cast<std::size_t>(bins) + 1);
    for (int b = 0; b <= bins; ++b) h.edges[b] = lo + (hi - lo) * b / bins;
    std::size_t negative = 0;
    for (double v : values) {
        if (v < 0.0) ++negative;
        auto b = static_cast<long>(std::floor((v - lo) / (hi - lo) * bins));
        b = std::clamp(b, 0L, static_cast<long>(bins) - 1);
        ++h.counts[static_cast<std::size_t>(b)];
    }
    h.negative_fraction = values.empty() ? 0.0 : static_cast<double>(negative) / static_cast<double>(values.size());
    return h;
}

Histogram weight_histogram(const Genome& genome, int bins, double lo, double hi) {
    return weight_histogram(std::span<const Genome>(&genome, 1), bins, lo, hi);
}

std::vector<double> sparsity_trajectory(const RunRecord& run) {
    std::vector<double> out;
    out.reserve(run.metrics.size());
    for (const auto& m : run.metrics) out.push_back(m.mean_sparsity);
    return out;
}

std::vector<double> min_sparsity_trajectory(const RunRecord& run) {
    std::vector<double> out;
    out.reserve(run.metrics.size());
    for (const auto& m : run.metrics) out.push_back(m.min_sparsity);
    return out;
}

namespace {

std::int64_t tie_pairs(const std::vector<double>& sorted) {
    std::int64_t pairs = 0;
    std::size_t i = 0;
    while (i < sorted.size()) {
        std::size_t j = i;
        while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
        const auto run = static_cast<std::int64_t>(j - i);
        pairs += run * (run - 1) / 2;
        i = j;
    }
    return pairs;
}

// Sorts `v` ascending, returning the number of strict inversions.
std::int64_t merge_count(std::vector<double>& v, std::vector<double>& scratch, std::size_t lo, std::size_t hi) {
    if (hi - lo < 2) return 0;
    const std::size_t mid = lo + (hi - lo) / 2;
    std::int64_t swaps = merge_count(v, scratch, lo, mid) + merge_count(v, scratch, mid, hi);
    std::size_t a = lo, b = mid, k = lo;
    while (a < mid && b < hi) {
        if (v[a] <= v[b]) {
            scratch[k++] = v[a++];
        } else {
            swaps += static_cast<std::int64_t>(mid - a);
            scratch[k++] = v[b++];
        }
    }
    while (a < mid) scratch[k++] = v[a++];
    while (b < hi) scratch[k++] = v[b++];
    std::copy(scratch.begin() + static_cast<std::ptrdiff_t>(lo), scratch.begin() + static_cast<std::ptrdiff_t>(hi),
              v.begin() + static_cast<std::ptrdiff_t>(lo));
    return swaps;
}

}  // namespace

double rank_correlation(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw ParameterError("rank correlation needs paired samples");
    const std::size_t n = x.size();
    if (n < 2) return 0.0;
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return x[a] < x[b] || (x[a] == x[b] && y[a] < y[b]);
    });
    std::vector<double> xs(n), ys(n);
    for (std::size_t k = 0; k < n; ++k) {
        xs[k] = x[order[k]];
        ys[k] = y[order[k]];
    }
    const auto total = static_cast<std::int64_t>(n * (n - 1) / 2);
    const std::int64_t x_ties = tie_pairs(xs);
    std::int64_t joint_ties = 0;
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j < n && xs[j] == xs[i] && ys[j] == ys[i]) ++j;
        const auto run = static_cast<std::int64_t>(j - i);
        joint_ties += run * (run - 1) / 2;
        i = j;
    }
    std::vector<double> scratch(n);
    const std::int64_t swaps = merge_count(ys, scratch, 0, n);
    const std::int64_t y_ties = tie_pairs(ys);
    const std::int64_t numerator = total - x_ties - y_ties + joint_ties - 2 * swaps;
    const double denom = std::sqrt(static_cast<double>(total - x_ties) * static_cast<double>(total - y_ties));
    if (denom == 0.0) return 0.0;
    return static_cast<double>(numerator) / denom;
}

CorrelationResult sparsity_vs_validation(std::span<const RunRecord> runs) {
    if (runs.size() < 3) throw ParameterError("correlation needs at least three runs");
    CorrelationResult r;
    for (const auto& run : runs) {
        if (run.metrics.empty() || run.validations.empty()) throw ParameterError("run has no metrics or validation");
        std::string label = run.config.name + "/seed" + std::to_string(run.run_seed);
        if (!run.sweep_axis.empty()) label += "/" + run.sweep_axis + "=" + run.sweep_value;
        r.labels.push_back(std::move(label));
        r.sparsity.push_back(run.metrics.back().mean_sparsity);
        r.validation.push_back(run.final_validation().overall);
    }
    r.coefficient = rank_correlation(r.sparsity, r.validation);
    return r;
}

ActiveConnections active_connections(const Genome& genome, std::span<const Maze> mazes, const MutationParams& params,
                                     const EpisodeOptions& episode, double epsilon, int threads) {
    if (mazes.empty()) throw ParameterError("active-connection probing needs at least one maze");
    ActiveConnections out;
    out.baseline_fitness = evaluate_genome(genome, mazes, params, episode).total;
    const auto w = effective_weights(genome);
    std::vector<Connection> candidates;
    for (int i = 0; i < genome.n; ++i)
        for (int j = 0; j < genome.n; ++j)
            if (w(i, j) != 0.0) candidates.push_back({i, j});
    out.nonzero = static_cast<int>(candidates.size());
    std::vector<std::uint8_t> prunable(candidates.size(), 0);
    parallel_for(candidates.size(), threads, [&](std::size_t k) {
        Genome probe = genome;
        probe.weights(candidates[k].target, candidates[k].source) = 0.0;
        probe.set_connected(candidates[k].target, candidates[k].source, false);
        const double f = evaluate_genome(probe, mazes, params, episode).total;
        prunable[k] = f >= out.baseline_fitness - epsilon ? 1 : 0;
    });
    for (std::size_t k = 0; k < candidates.size(); ++k)
        if (prunable[k]) out.prunable.push_back(candidates[k]);
    out.active_count = out.nonzero - static_cast<int>(out.prunable.size());
    return out;
}

std::vector<double> prune_thresholds(const Genome& genome) {
    std::vector<double> magnitudes;
    const auto effective = effective_weights(genome);
    for (double v : effective.values())
        if (v != 0.0) magnitudes.push_back(std::abs(v));
    std::sort(magnitudes.begin(), magnitudes.end());
    magnitudes.erase(std::unique(magnitudes.begin(), magnitudes.end()), magnitudes.end());
    std::vector<double> out{0.0};
    for (double m : magnitudes) out.push_back(std::nextafter(m, std::numeric_limits<double>::infinity()));
    return out;
}

PruneCurve threshold_prune_curve(const Genome& genome, std::span<const Maze> validation_mazes,
                                 std::span<const double> thresholds, const EpisodeOptions& episode) {
    if (validation_mazes.empty()) throw ParameterError("prune curve needs validation mazes");
    if (!std::is_sorted(thresholds.begin(), thresholds.end()))
        throw ParameterError("prune thresholds must be ascending");
    PruneCurve curve;
    const auto base = effective_weights(genome);
    for (double t : thresholds) {
        Genome pruned = genome;
        int remaining = 0;
        for (int i = 0; i < genome.n; ++i)
            for (int j = 0; j < genome.n; ++j) {
                const double v = base(i, j);
                if (v != 0.0 && std::abs(v) >= t) {
                    ++remaining;
                } else {
                    pruned.weights(i, j) = 0.0;
                    pruned.set_connected(i, j, false);
                }
            }
        const CompiledNetwork net(pruned);
        double sum = 0.0;
        for (const auto& m : validation_mazes) sum += run_episode(m, net, episode).distance;
        curve.thresholds.push_back(t);
        curve.remaining_connections.push_back(remaining);
        curve.validation_performance.push_back(sum / static_cast<double>(validation_mazes.size()));
    }
    return curve;
}

PruneBudget prune_budget(const PruneCurve& curve, double max_loss) {
    PruneBudget best;
    if (curve.thresholds.empty()) return best;
    const int original = curve.remaining_connections.front();
    const double baseline = curve.validation_performance.front();
    best.remaining = original;
    best.performance = baseline;
    for (std::size_t k = 0; k < curve.thresholds.size(); ++k) {
        if (curve.validation_performance[k] < (1.0 - max_loss) * baseline) continue;
        if (curve.remaining_connections[k] < best.remaining) {
            best.remaining = curve.remaining_connections[k];
            best.performance = curve.validation_performance[k];
        }
    }
    best.removed_fraction = original > 0 ? static_cast<double>(original - best.remaining) / original : 0.0;
    return best;
}

Components subnetwork_components(const Genome& genome) {
    const int n = genome.n;
    std::vector<int> parent(static_cast<std::size_t>(n));
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int v) {
        while (parent[v] != v) {
            parent[v] = parent[parent[v]];
            v = parent[v];
        }
        return v;
    };
    const auto w = effective_weights(genome);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (w(i, j) != 0.0) {
                const int a = find(i), b = find(j);
                if (a != b) parent[std::max(a, b)] = std::min(a, b);
            }
    Components c;
    c.label.assign(static_cast<std::size_t>(n), -1);
    std::vector<int> id_of_root(static_cast<std::size_t>(n), -1);
    for (int v = 0; v < n; ++v) {
        const int root = find(v);
        if (id_of_root[root] < 0) {
            id_of_root[root] = c.count++;
            c.pseudo.push_back(true);
            c.edges.push_back(0);
        }
        c.label[v] = id_of_root[root];
        if (v < kOutputBegin + kOutputCount) c.pseudo[c.label[v]] = false;
    }
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (w(i, j) != 0.0) ++c.edges[c.label[i]];
    return c;
}

std::string histogram_csv(const Histogram& h) {
    std::string out = "bin,lower_edge,upper_edge,count\n";
    for (std::size_t b = 0; b < h.counts.size(); ++b)
        out += std::to_string(b) + ',' + format_double(h.edges[b]) + ',' + format_double(h.edges[b + 1]) + ',' +
               std::to_string(h.counts[b]) + '\n';
    out += "# total " + std::to_string(h.total) + " negative_fraction " + format_double(h.negative_fraction) + "\n";
    return out;
}

std::string prune_curve_csv(const PruneCurve& c) {
    std::string out = "threshold,remaining_connections,validation_performance\n";
    for (std::size_t k = 0; k < c.thresholds.size(); ++k)
        out += format_double(c.thresholds[k]) + ',' + std::to_string(c.remaining_connections[k]) + ',' +
               format_double(c.validation_performance[k]) + '\n';
    return out;
}

std::string components_csv(const Components& c) {
    std::string out = "neuron,component,component_edges,pseudo\n";
    for (std::size_t v = 0; v < c.label.size(); ++v) {
        const int id = c.label[v];
        out += std::to_string(v) + ',' + std::to_string(id) + ',' + std::to_string(c.edges[id]) + ',' +
               (c.pseudo[id] ? "1" : "0") + '\n';
    }
    return out;
}

std::string correlation_csv(const CorrelationResult& r) {
    std::string out = "run,final_mean_sparsity,validation_performance\n";
    for (std::size_t k = 0; k < r.labels.size(); ++k)
        out += '"' + r.labels[k] + "\"," + format_double(r.sparsity[k]) + ',' + format_double(r.validation[k]) + '\n';
    out += "# rank_correlation " + format_double(r.coefficient) + "\n";
    return out;
}

std::string active_csv(const ActiveConnections& a) {
    std::string out = "target,source,prunable\n";
    for (const auto& c : a.prunable) out += std::to_string(c.target) + ',' + std::to_string(c.source) + ",1\n";
    out += "# nonzero " + std::to_string(a.nonzero) + " active " + std::to_string(a.active_count) +
           " baseline_fitness " + format_double(a.baseline_fitness) + "\n";
    return out;
}

}  // namespace evoprune
