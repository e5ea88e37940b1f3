#include "evoprune/maze.hpp"

#include <nlohmann/json.hpp>

#include <cctype>
#include <sstream>

#include "evoprune/errors.hpp"
#include "evoprune/format.hpp"
#include "evoprune/rng.hpp"

namespace evoprune {

namespace {

void check_params(const MazeParams& p) {
    if (p.width < 3 || p.height < 3) throw ParameterError("maze must be at least 3x3");
    if (p.spacing.lo < 1 || p.spacing.lo > p.spacing.hi)
        throw ParameterError("wall spacing range must be non-empty and positive");
    if (p.length.lo < 1 || p.length.lo > p.length.hi)
        throw ParameterError("wall length range must be non-empty and positive");
    if (!(p.same_side_prob >= 0.0 && p.same_side_prob <= 1.0))
        throw ParameterError("same_side_prob must lie in [0, 1]");
}

}  // namespace

Maze::Maze(std::uint64_t seed, MazeParams params, std::vector<std::uint8_t> cells)
    : seed_(seed), params_(params), cells_(std::move(cells)) {
    if (params_.width < 3 || params_.height < 3) throw ParameterError("maze must be at least 3x3");
    if (cells_.size() != static_cast<std::size_t>(params_.width) * params_.height)
        throw ParameterError("cell buffer does not match maze dimensions");
}

Maze generate_maze(std::uint64_t seed, const MazeParams& params) {
    check_params(params);
    const int w = params.width;
    const int h = params.height;
    std::vector<std::uint8_t> cells(static_cast<std::size_t>(w) * h, 0);
    auto set_wall = [&](int x, int y) { cells[static_cast<std::size_t>(y) * w + x] = 1; };
    for (int x = 0; x < w; ++x) {
        set_wall(x, 0);
        set_wall(x, h - 1);
    }
    for (int y = 0; y < h; ++y) {
        set_wall(0, y);
        set_wall(w - 1, y);
    }

    Rng rng(derive_seed(seed, 0, 0, Stream::Maze));
    // A wall must leave at least two free interior cells in its column.
    const int max_length = (h - 2) - 2;
    bool from_top = rng.bernoulli(0.5);
    bool first = true;
    for (int x = static_cast<int>(rng.uniform_int(params.spacing.lo, params.spacing.hi)); x <= w - 2;
         x += static_cast<int>(rng.uniform_int(params.spacing.lo, params.spacing.hi))) {
        if (!first && !rng.bernoulli(params.same_side_prob)) from_top = !from_top;
        first = false;
        if (params.length.lo > max_length)
            throw ParameterError("wall length range cannot leave a two-cell gap in a maze of height " +
                                 std::to_string(h));
        int length = 0;
        do {
            length = static_cast<int>(rng.uniform_int(params.length.lo, params.length.hi));
        } while (length > max_length);
        for (int k = 0; k < length; ++k) set_wall(x, from_top ? 1 + k : h - 2 - k);
    }
    return Maze(seed, params, std::move(cells));
}

Heading turn_left(Heading h) { return static_cast<Heading>((static_cast<int>(h) + 1) % 4); }
Heading turn_right(Heading h) { return static_cast<Heading>((static_cast<int>(h) + 3) % 4); }

std::array<int, 2> heading_step(Heading h) {
    switch (h) {
        case Heading::East: return {1, 0};
        case Heading::North: return {0, -1};
        case Heading::West: return {-1, 0};
        case Heading::South: return {0, 1};
    }
    return {0, 0};
}

const char* to_string(Heading h) {
    switch (h) {
        case Heading::East: return "E";
        case Heading::North: return "N";
        case Heading::West: return "W";
        case Heading::South: return "S";
    }
    return "?";
}

const char* to_string(Action a) {
    switch (a) {
        case Action::Straight: return "straight";
        case Action::TurnRight: return "right";
        case Action::TurnLeft: return "left";
    }
    return "?";
}

AgentState start_state(const Maze& maze) {
    constexpr int column = 1;
    std::vector<int> free_rows;
    for (int y = 0; y < maze.height(); ++y)
        if (maze.is_free(column, y)) free_rows.push_back(y);
    if (free_rows.empty()) throw MazeError("first interior column is fully walled");
    const double center = (maze.height() - 1) / 2.0;
    int best = free_rows.front();
    for (int y : free_rows)
        if (std::abs(y - center) < std::abs(best - center)) best = y;
    return {column, best, Heading::East};
}

int ray_distance(const Maze& maze, int x, int y, Heading direction) {
    const auto [dx, dy] = heading_step(direction);
    int count = 0;
    while (count < kVisualRange && maze.is_free(x + dx * (count + 1), y + dy * (count + 1))) ++count;
    return count;
}

SensorReading sense(const Maze& maze, const AgentState& agent) {
    SensorReading r;
    r.front = ray_distance(maze, agent.x, agent.y, agent.heading);
    r.left = ray_distance(maze, agent.x, agent.y, turn_left(agent.heading));
    r.right = ray_distance(maze, agent.x, agent.y, turn_right(agent.heading));
    r.compass[static_cast<std::size_t>(agent.heading)] = 1.0;
    return r;
}

AgentState apply_action(const Maze& maze, const AgentState& agent, Action action) {
    AgentState next = agent;
    switch (action) {
        case Action::TurnLeft: next.heading = turn_left(agent.heading); break;
        case Action::TurnRight: next.heading = turn_right(agent.heading); break;
        case Action::Straight: {
            const auto [dx, dy] = heading_step(agent.heading);
            if (maze.is_free(agent.x + dx, agent.y + dy)) {
                next.x += dx;
                next.y += dy;
            }
            break;
        }
    }
    return next;
}

// Rows encode as alternating runs, e.g. "#3.394#3" (wall x3, free x394, ...).
std::string encode_row(const Maze& maze, int y) {
    std::string out;
    int x = 0;
    while (x < maze.width()) {
        const bool wall = maze.is_wall(x, y);
        int run = 0;
        while (x < maze.width() && maze.is_wall(x, y) == wall) {
            ++x;
            ++run;
        }
        out += wall ? '#' : '.';
        out += std::to_string(run);
    }
    return out;
}

namespace {

void decode_row(const std::string& row, int width, std::vector<std::uint8_t>& cells) {
    std::size_t i = 0;
    int written = 0;
    while (i < row.size()) {
        const char kind = row[i++];
        if (kind != '#' && kind != '.') throw FormatError("bad run marker in maze row: " + row);
        std::size_t start = i;
        while (i < row.size() && std::isdigit(static_cast<unsigned char>(row[i]))) ++i;
        if (start == i) throw FormatError("missing run length in maze row: " + row);
        const int run = std::stoi(row.substr(start, i - start));
        if (run <= 0 || written + run > width) throw FormatError("maze row overflows width: " + row);
        for (int k = 0; k < run; ++k) cells.push_back(kind == '#' ? 1 : 0);
        written += run;
    }
    if (written != width) throw FormatError("maze row shorter than width: " + row);
}

}  // namespace

std::string maze_to_text(const Maze& maze) {
    nlohmann::ordered_json j;
    j["format"] = kMazeFormat;
    j["seed"] = maze.seed();
    j["width"] = maze.width();
    j["height"] = maze.height();
    const auto& p = maze.params();
    j["spacing"] = {p.spacing.lo, p.spacing.hi};
    j["length"] = {p.length.lo, p.length.hi};
    j["same_side_prob"] = p.same_side_prob;
    auto rows = nlohmann::ordered_json::array();
    for (int y = 0; y < maze.height(); ++y) rows.push_back(encode_row(maze, y));
    j["rows"] = std::move(rows);
    return j.dump(1) + "\n";
}

Maze maze_from_text(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
        check_format(j, kMazeFormat);
        MazeParams p;
        p.width = j.at("width").get<int>();
        p.height = j.at("height").get<int>();
        p.spacing = {j.at("spacing").at(0).get<int>(), j.at("spacing").at(1).get<int>()};
        p.length = {j.at("length").at(0).get<int>(), j.at("length").at(1).get<int>()};
        p.same_side_prob = j.at("same_side_prob").get<double>();
        const auto& rows = j.at("rows");
        if (rows.size() != static_cast<std::size_t>(p.height)) throw FormatError("row count does not match height");
        std::vector<std::uint8_t> cells;
        cells.reserve(static_cast<std::size_t>(p.width) * p.height);
        for (const auto& row : rows) decode_row(row.get<std::string>(), p.width, cells);
        return Maze(j.at("seed").get<std::uint64_t>(), p, std::move(cells));
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("malformed maze file: ") + e.what());
    }
}

}  // namespace evoprune
