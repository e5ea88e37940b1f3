#pragma once

#include <optional>
#include <string>
#include <vector>

#include "evoprune/maze.hpp"
#include "evoprune/network.hpp"

namespace evoprune {

inline constexpr int kDefaultSteps = 400;

/// How the covered x-distance is read off an episode.
enum class DistanceMode { Final, Max };

struct StepRecord {
    int step = 0;
    AgentState pose;
    SensorReading sensors;
    std::vector<double> activations;  // post-forward state
    Action action = Action::Straight;
};

struct EpisodeResult {
    int distance = 0;
    double mean_activation = 0.0;
    std::vector<StepRecord> trajectory;
};

struct EpisodeOptions {
    int steps = kDefaultSteps;
    DistanceMode distance_mode = DistanceMode::Final;
    bool record_trajectory = false;
};

/// Deterministic clamp -> forward -> act loop from start_state(maze).
EpisodeResult run_episode(const Maze& maze, const Genome& genome, const EpisodeOptions& options = {});

/// Same loop on an already compiled network.
EpisodeResult run_episode(const Maze& maze, const CompiledNetwork& network, const EpisodeOptions& options = {});

/// Line-delimited trace: '#' header lines, then one tab-separated line per step.
std::string trace_to_text(const Maze& maze, const Genome& genome, const EpisodeResult& result);

}  // namespace evoprune
