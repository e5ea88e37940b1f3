#include "evoprune/episode.hpp"

#include <algorithm>
#include <sstream>

#include "evoprune/errors.hpp"
#include "evoprune/format.hpp"

namespace evoprune {

EpisodeResult run_episode(const Maze& maze, const Genome& genome, const EpisodeOptions& options) {
    if (genome.n < kMinNeurons) throw ConfigError("genome is too small for the 7-input/3-output layout");
    if (static_cast<int>(genome.mask.size()) != genome.n * genome.n || genome.weights.size() != genome.n)
        throw ConfigError("genome matrix dimensions disagree with n");
    return run_episode(maze, CompiledNetwork(genome), options);
}

EpisodeResult run_episode(const Maze& maze, const CompiledNetwork& network, const EpisodeOptions& options) {
    if (options.steps < 1) throw ConfigError("episode needs at least one step");
    const int n = network.size();
    std::vector<double> state(n, 0.0);
    std::vector<double> next(n, 0.0);
    AgentState agent = start_state(maze);
    const int start_x = agent.x;
    int max_x = agent.x;
    double activation_sum = 0.0;
    EpisodeResult result;
    if (options.record_trajectory) result.trajectory.reserve(options.steps);

    for (int t = 0; t < options.steps; ++t) {
        const SensorReading sensors = sense(maze, agent);
        network.step(state, sensors, next);
        for (double v : next) activation_sum += v;
        const Action action = select_action(std::span<const double>(next).subspan(kOutputBegin, kOutputCount));
        if (options.record_trajectory)
            result.trajectory.push_back({t, agent, sensors, next, action});
        agent = apply_action(maze, agent, action);
        max_x = std::max(max_x, agent.x);
        std::swap(state, next);
    }
    result.distance = (options.distance_mode == DistanceMode::Final ? agent.x : max_x) - start_x;
    result.mean_activation = activation_sum / (static_cast<double>(options.steps) * n);
    return result;
}

std::string trace_to_text(const Maze& maze, const Genome& genome, const EpisodeResult& result) {
    std::ostringstream out;
    const auto w = effective_weights(genome);
    out << "# format " << kTraceFormat << "\n";
    out << "# maze_seed " << maze.seed() << " width " << maze.width() << " height " << maze.height() << "\n";
    out << "# neurons " << genome.n << " bias_neuron " << (genome.bias_neuron ? 1 : 0) << " tau "
        << format_double(genome.tau) << " steps " << result.trajectory.size() << " distance " << result.distance
        << "\n";
    out << "# step\tx\ty\theading\td_front\td_left\td_right\tc_e\tc_n\tc_w\tc_s";
    for (int i = 0; i < genome.n; ++i) out << "\ta" << i;
    out << "\taction\tflows\n";
    for (const auto& rec : result.trajectory) {
        out << rec.step << '\t' << rec.pose.x << '\t' << rec.pose.y << '\t' << to_string(rec.pose.heading);
        for (double v : rec.sensors.inputs()) out << '\t' << format_double(v);
        for (double a : rec.activations) out << '\t' << format_double(a);
        out << '\t' << to_string(rec.action) << '\t';
        // weight times the activation of the target node, per non-zero connection
        bool first = true;
        for (int i = 0; i < genome.n; ++i)
            for (int j = 0; j < genome.n; ++j) {
                if (w(i, j) == 0.0) continue;
                if (!first) out << ',';
                first = false;
                out << j << '>' << i << ':' << format_double(w(i, j) * rec.activations[i] + 0.0);
            }
        out << '\n';
    }
    return out.str();
}

}  // namespace evoprune
