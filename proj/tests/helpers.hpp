#pragma once

#include <random>
#include <string>
#include <vector>

#include "evoprune/maze.hpp"
#include "evoprune/network.hpp"

namespace testing {

// '#' wall, anything else free. Rows top to bottom.
inline evoprune::Maze maze_from_art(const std::vector<std::string>& rows, std::uint64_t seed = 0) {
    evoprune::MazeParams p;
    p.height = static_cast<int>(rows.size());
    p.width = static_cast<int>(rows.front().size());
    std::vector<std::uint8_t> cells;
    for (const auto& r : rows)
        for (char c : r) cells.push_back(c == '#' ? 1 : 0);
    return evoprune::Maze(seed, p, std::move(cells));
}

// Bordered empty box.
inline evoprune::Maze open_box(int width, int height) {
    std::vector<std::string> rows;
    for (int y = 0; y < height; ++y) {
        std::string r(static_cast<std::size_t>(width), '.');
        r.front() = r.back() = '#';
        if (y == 0 || y == height - 1) r.assign(static_cast<std::size_t>(width), '#');
        rows.push_back(r);
    }
    return maze_from_art(rows);
}

inline evoprune::Genome zero_genome(int n = 16, bool bias = true) {
    evoprune::Genome g;
    g.n = n;
    g.weights = evoprune::SquareMatrix(n);
    g.mask.assign(static_cast<std::size_t>(n) * n, 1);
    g.bias_neuron = bias;
    return g;
}

inline evoprune::Genome random_genome(std::mt19937_64& gen, int n = 16, double severed = 0.0, double scale = 0.5) {
    std::uniform_real_distribution<double> w(-scale, scale);
    std::bernoulli_distribution cut(severed);
    auto g = zero_genome(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            if (cut(gen)) {
                g.set_connected(i, j, false);
            } else {
                g.weights(i, j) = w(gen);
            }
        }
    return g;
}

}  // namespace testing
