#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace evoprune {

inline constexpr int kVisualRange = 10;

struct IntRange {
    int lo = 0;
    int hi = 0;
    friend bool operator==(const IntRange&, const IntRange&) = default;
};

struct MazeParams {
    int width = 400;
    int height = 22;
    IntRange spacing{2, 10};
    IntRange length{4, 20};
    double same_side_prob = 0.25;
    friend bool operator==(const MazeParams&, const MazeParams&) = default;
};

/// Rectangular wall/free grid. Immutable after construction.
class Maze {
public:
    Maze(std::uint64_t seed, MazeParams params, std::vector<std::uint8_t> cells);

    int width() const { return params_.width; }
    int height() const { return params_.height; }
    std::uint64_t seed() const { return seed_; }
    const MazeParams& params() const { return params_; }

    /// Out-of-grid coordinates read as walls.
    bool is_wall(int x, int y) const {
        if (x < 0 || y < 0 || x >= params_.width || y >= params_.height) return true;
        return cells_[static_cast<std::size_t>(y) * params_.width + x] != 0;
    }
    bool is_free(int x, int y) const { return !is_wall(x, y); }

    const std::vector<std::uint8_t>& cells() const { return cells_; }

    friend bool operator==(const Maze&, const Maze&) = default;

private:
    std::uint64_t seed_;
    MazeParams params_;
    std::vector<std::uint8_t> cells_;
};

// North is -y; turning left from East faces North.
enum class Heading : std::uint8_t { East = 0, North = 1, West = 2, South = 3 };
enum class Action : std::uint8_t { Straight = 0, TurnRight = 1, TurnLeft = 2 };

Heading turn_left(Heading h);
Heading turn_right(Heading h);
std::array<int, 2> heading_step(Heading h);
const char* to_string(Heading h);
const char* to_string(Action a);

struct AgentState {
    int x = 0;
    int y = 0;
    Heading heading = Heading::East;
    friend bool operator==(const AgentState&, const AgentState&) = default;
};

struct SensorReading {
    int front = 0;
    int left = 0;
    int right = 0;
    std::array<double, 4> compass{};

    /// Input-neuron layout: front, left, right, then the compass one-hot
    /// (East, North, West, South).
    std::array<double, 7> inputs() const {
        return {static_cast<double>(front), static_cast<double>(left), static_cast<double>(right),
                compass[0], compass[1], compass[2], compass[3]};
    }
    friend bool operator==(const SensorReading&, const SensorReading&) = default;
};

Maze generate_maze(std::uint64_t seed, const MazeParams& params = {});

AgentState start_state(const Maze& maze);

/// Free cells along a ray before the first wall, capped at the visual range.
int ray_distance(const Maze& maze, int x, int y, Heading direction);

SensorReading sense(const Maze& maze, const AgentState& agent);

AgentState apply_action(const Maze& maze, const AgentState& agent, Action action);

// Structured text (JSON) with run-length encoded rows.
std::string maze_to_text(const Maze& maze);
Maze maze_from_text(const std::string& text);
std::string encode_row(const Maze& maze, int y);

}  // namespace evoprune
