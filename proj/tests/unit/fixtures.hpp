#pragma once

#include <random>
#include <string>
#include <utility>
#include <vector>

#include "driftloc/dynamics.hpp"
#include "driftloc/network.hpp"

namespace fixtures {

using driftloc::NetworkGraph;
using driftloc::NodeId;
using driftloc::Point;

inline NetworkGraph path_graph(std::size_t n, const std::vector<NodeId>& sensors = {}) {
    std::vector<std::pair<NodeId, Point>> pos;
    std::vector<std::pair<NodeId, NodeId>> edges;
    for (std::size_t i = 0; i < n; ++i) {
        pos.emplace_back(std::string(1, static_cast<char>('a' + i)), Point{static_cast<double>(i), 0.0});
        if (i) edges.emplace_back(pos[i - 1].first, pos[i].first);
    }
    return driftloc::build_graph(edges, pos, sensors);
}

inline NetworkGraph isolated_node() { return driftloc::build_graph({}, {{"v", {0, 0}}}, {"v"}); }

// Erdos-Renyi style graph with random positions, possibly disconnected.
inline NetworkGraph random_graph(std::size_t n, double p, std::uint64_t seed, std::size_t sensors = 0) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<std::pair<NodeId, Point>> pos;
    for (std::size_t i = 0; i < n; ++i) pos.emplace_back("x" + std::to_string(100 + i), Point{u(rng), u(rng)});
    std::vector<std::pair<NodeId, NodeId>> edges;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (u(rng) < p) edges.emplace_back(pos[i].first, pos[j].first);
    std::vector<NodeId> s;
    for (std::size_t i = 0; i < sensors; ++i) s.push_back(pos[i].first);
    return driftloc::build_graph(edges, pos, s);
}

// Random nonuniform row-stochastic weights over closed neighborhoods.
inline driftloc::TransitionModel random_model(const NetworkGraph& g, std::uint64_t seed, double c = 0.0,
                                              double k = 1.0, double alpha = 1.0) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.1, 1.0);
    std::vector<std::vector<std::pair<std::size_t, double>>> w(g.node_count());
    double max_col = 0.0;
    std::vector<double> col(g.node_count(), 0.0);
    for (std::size_t v = 0; v < g.node_count(); ++v) {
        std::vector<std::size_t> closed{v};
        for (auto x : g.neighbors(v)) closed.push_back(x);
        double total = 0.0;
        for (auto x : closed) {
            const double r = u(rng);
            w[v].emplace_back(x, r);
            total += r;
        }
        for (auto& [x, r] : w[v]) {
            r /= total;
            col[x] += r;
        }
    }
    for (double s : col) max_col = std::max(max_col, s);
    if (c <= 0.0) c = 0.8 / max_col;
    c = std::min(c, 0.95);
    std::vector<double> b(g.node_count());
    for (auto& x : b) x = 40.0 + 20.0 * u(rng);
    return driftloc::TransitionModel(g, w, c, b, k, alpha);
}

inline std::vector<double> random_vector(std::size_t n, std::mt19937_64& rng, double lo, double hi) {
    std::uniform_real_distribution<double> u(lo, hi);
    std::vector<double> v(n);
    for (auto& x : v) x = u(rng);
    return v;
}

}  // namespace fixtures
