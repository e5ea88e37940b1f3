#pragma once

// Brute-force reference implementations used only by tests. They share no
// code paths with the library routines they check.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <queue>
#include <vector>

#include "evoprune/maze.hpp"
#include "evoprune/network.hpp"

namespace oracle {

inline bool wall_at(const evoprune::Maze& m, int x, int y) {
    if (x < 0 || y < 0 || x >= m.width() || y >= m.height()) return true;
    return m.cells()[static_cast<std::size_t>(y) * m.width() + x] != 0;
}

// Heading as a vector: East (1,0), North (0,-1), West (-1,0), South (0,1).
inline std::pair<int, int> vec(int heading) {
    static const int dx[] = {1, 0, -1, 0};
    static const int dy[] = {0, -1, 0, 1};
    return {dx[heading], dy[heading]};
}

// Counter-clockwise quarter turn in screen coordinates (y down).
inline std::pair<int, int> rotate_left(std::pair<int, int> v) { return {v.second, -v.first}; }
inline std::pair<int, int> rotate_right(std::pair<int, int> v) { return {-v.second, v.first}; }

inline int march(const evoprune::Maze& m, int x, int y, std::pair<int, int> d) {
    int free_cells = 0;
    for (int k = 1; k <= 10; ++k) {
        if (wall_at(m, x + d.first * k, y + d.second * k)) break;
        ++free_cells;
    }
    return free_cells;
}

struct Reading {
    int front, left, right;
};

inline Reading sense(const evoprune::Maze& m, int x, int y, int heading) {
    const auto d = vec(heading);
    return {march(m, x, y, d), march(m, x, y, rotate_left(d)), march(m, x, y, rotate_right(d))};
}

inline std::vector<double> relu_matvec(const evoprune::Genome& g, const std::vector<double>& s) {
    std::vector<double> out(static_cast<std::size_t>(g.n), 0.0);
    for (int i = 0; i < g.n; ++i) {
        double acc = 0.0;
        for (int j = 0; j < g.n; ++j) acc += (g.connected(i, j) ? g.weights(i, j) : 0.0) * s[j];
        out[i] = acc > 0.0 ? acc : 0.0;
    }
    return out;
}

inline int argmax_first(const std::vector<double>& v) {
    int best = 0;
    for (int k = 0; k < static_cast<int>(v.size()); ++k)
        if (v[k] > v[best]) best = k;
    return best;
}

inline double smr(const std::vector<double>& d) {
    long double acc = 0.0L;
    for (double v : d) acc += std::sqrt(static_cast<long double>(v));
    const long double mean = acc / d.size();
    return static_cast<double>(mean * mean);
}

// Scale lambda found by bisection with p_i = min(cap, lambda * w_i), sum = 1.
inline std::vector<double> capped_shares(const std::vector<double>& w, double cap) {
    double lo = 0.0, hi = 1.0;
    auto total = [&](double lambda) {
        double s = 0.0;
        for (double v : w) s += std::min(cap, lambda * v);
        return s;
    };
    std::size_t positive = 0;
    for (double v : w) positive += v > 0.0;
    if (static_cast<double>(positive) * cap <= 1.0 + 1e-12) {
        // every positive share saturates; the rest spreads over zero-weight entries
        std::vector<double> p;
        const std::size_t zeros = w.size() - positive;
        const double rest = zeros ? std::max(0.0, 1.0 - cap * static_cast<double>(positive)) / static_cast<double>(zeros) : 0.0;
        for (double v : w) p.push_back(v > 0.0 ? cap : rest);
        return p;
    }
    while (total(hi) < 1.0) hi *= 2.0;
    for (int it = 0; it < 64; ++it) {
        const double mid = 0.5 * (lo + hi);
        (total(mid) < 1.0 ? lo : hi) = mid;
    }
    std::vector<double> p;
    for (double v : w) p.push_back(std::min(cap, hi * v));
    return p;
}

struct TauParts {
    std::int64_t concordant_minus_discordant = 0;
    std::int64_t total = 0, x_ties = 0, y_ties = 0;
};

inline double kendall_tau_b(const std::vector<double>& x, const std::vector<double>& y) {
    TauParts t;
    const std::size_t n = x.size();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            ++t.total;
            const bool tx = x[i] == x[j], ty = y[i] == y[j];
            if (tx) ++t.x_ties;
            if (ty) ++t.y_ties;
            if (tx || ty) continue;
            t.concordant_minus_discordant += ((x[i] < x[j]) == (y[i] < y[j])) ? 1 : -1;
        }
    const double denom = std::sqrt(static_cast<double>(t.total - t.x_ties) * static_cast<double>(t.total - t.y_ties));
    return denom == 0.0 ? 0.0 : static_cast<double>(t.concordant_minus_discordant) / denom;
}

// Component labels by BFS over the undirected view, numbered by lowest neuron.
inline std::vector<int> flood_fill(const evoprune::Genome& g) {
    const int n = g.n;
    auto linked = [&](int a, int b) {
        auto live = [&](int i, int j) {
            const double w = g.connected(i, j) ? g.weights(i, j) : 0.0;
            return w != 0.0 && std::abs(w) >= g.tau;
        };
        return live(a, b) || live(b, a);
    };
    std::vector<int> label(static_cast<std::size_t>(n), -1);
    int next = 0;
    for (int s = 0; s < n; ++s) {
        if (label[s] >= 0) continue;
        std::queue<int> q;
        q.push(s);
        label[s] = next;
        while (!q.empty()) {
            const int v = q.front();
            q.pop();
            for (int u = 0; u < n; ++u)
                if (label[u] < 0 && linked(v, u)) {
                    label[u] = next;
                    q.push(u);
                }
        }
        ++next;
    }
    return label;
}

// k-th smallest by rank counting, no sorting.
inline double order_statistic(const std::vector<double>& v, std::size_t k) {
    for (double c : v) {
        std::size_t less = 0, equal = 0;
        for (double o : v) {
            if (o < c) ++less;
            else if (o == c) ++equal;
        }
        if (less <= k && k < less + equal) return c;
    }
    return NAN;
}

inline double percentile(const std::vector<double>& v, double q) {
    const double pos = q * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(pos);
    const double frac = pos - static_cast<double>(lo);
    const double a = order_statistic(v, lo);
    if (frac == 0.0) return a;
    const double b = order_statistic(v, std::min(lo + 1, v.size() - 1));
    return a + frac * (b - a);
}

}  // namespace oracle
