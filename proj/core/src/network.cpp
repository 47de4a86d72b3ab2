#include "driftloc/network.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>
#include <set>
#include <stdexcept>

#include "driftloc/rng.hpp"

namespace driftloc {

std::size_t NetworkGraph::index_of(const NodeId& id) const {
    auto it = index_.find(id);
    if (it == index_.end()) throw std::invalid_argument("unknown node '" + id + "'");
    return it->second;
}

std::vector<NodeId> NetworkGraph::sensor_ids() const {
    std::vector<NodeId> out;
    out.reserve(sensors_.size());
    for (auto s : sensors_) out.push_back(ids_[s]);
    return out;
}

bool NetworkGraph::is_sensor(std::size_t index) const {
    return std::binary_search(sensors_.begin(), sensors_.end(), index);
}

std::vector<std::pair<std::size_t, std::size_t>> NetworkGraph::edges() const {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    out.reserve(edge_count_);
    for (std::size_t u = 0; u < adjacency_.size(); ++u)
        for (auto v : adjacency_[u])
            if (u < v) out.emplace_back(u, v);
    return out;
}

NetworkGraph build_graph(const std::vector<std::pair<NodeId, NodeId>>& edges,
                         const std::vector<std::pair<NodeId, Point>>& positions,
                         const std::vector<NodeId>& sensors) {
    NetworkGraph g;
    std::map<NodeId, Point, std::less<>> pos;
    for (const auto& [id, p] : positions) {
        if (!std::isfinite(p.x) || !std::isfinite(p.y))
            throw std::invalid_argument("non-finite coordinates for node '" + id + "'");
        if (!pos.emplace(id, p).second) throw std::invalid_argument("duplicate node id '" + id + "'");
    }
    g.ids_.reserve(pos.size());
    g.positions_.reserve(pos.size());
    for (const auto& [id, p] : pos) {
        g.index_.emplace(id, g.ids_.size());
        g.ids_.push_back(id);
        g.positions_.push_back(p);
    }

    g.adjacency_.assign(g.ids_.size(), {});
    std::set<std::pair<std::size_t, std::size_t>> seen;
    for (const auto& [a, b] : edges) {
        auto ia = g.index_.find(a);
        auto ib = g.index_.find(b);
        if (ia == g.index_.end()) throw std::invalid_argument("unknown node '" + a + "' in edge list");
        if (ib == g.index_.end()) throw std::invalid_argument("unknown node '" + b + "' in edge list");
        auto u = ia->second, v = ib->second;
        if (u == v) throw std::invalid_argument("self-loop on node '" + a + "'");
        if (!seen.emplace(std::min(u, v), std::max(u, v)).second)
            throw std::invalid_argument("duplicate edge ('" + a + "', '" + b + "')");
        g.adjacency_[u].push_back(v);
        g.adjacency_[v].push_back(u);
    }
    for (auto& adj : g.adjacency_) std::sort(adj.begin(), adj.end());
    g.edge_count_ = seen.size();

    std::set<std::size_t> sensor_set;
    for (const auto& s : sensors) {
        auto it = g.index_.find(s);
        if (it == g.index_.end()) throw std::invalid_argument("unknown sensor node '" + s + "'");
        sensor_set.insert(it->second);
    }
    g.sensors_.assign(sensor_set.begin(), sensor_set.end());
    return g;
}

std::vector<Hops> hops_from(const NetworkGraph& g, std::size_t source) {
    std::vector<Hops> dist(g.node_count(), Hops::infinite());
    std::deque<std::size_t> queue{source};
    dist.at(source) = Hops{0};
    while (!queue.empty()) {
        auto u = queue.front();
        queue.pop_front();
        for (auto v : g.neighbors(u)) {
            if (dist[v].is_finite()) continue;
            dist[v] = Hops{dist[u].value() + 1};
            queue.push_back(v);
        }
    }
    return dist;
}

Hops topological_distance(const NetworkGraph& g, const NodeId& u, const NodeId& v) {
    auto iu = g.index_of(u);
    auto iv = g.index_of(v);
    return hops_from(g, iu)[iv];
}

double geographic_distance(const NetworkGraph& g, std::size_t u, std::size_t v) {
    const auto& a = g.position(u);
    const auto& b = g.position(v);
    return std::hypot(a.x - b.x, a.y - b.y);
}

double geographic_distance(const NetworkGraph& g, const NodeId& u, const NodeId& v) {
    return geographic_distance(g, g.index_of(u), g.index_of(v));
}

std::size_t max_degree(const NetworkGraph& g) {
    std::size_t best = 0;
    for (std::size_t v = 0; v < g.node_count(); ++v) best = std::max(best, g.neighbors(v).size());
    return best;
}

std::vector<std::size_t> farthest_point_sensors(const NetworkGraph& g, std::size_t count) {
    count = std::min(count, g.node_count());
    std::vector<std::size_t> chosen;
    if (count == 0) return chosen;
    // Distance to the nearest chosen sensor; infinite counts as farthest.
    std::vector<Hops> nearest(g.node_count(), Hops::infinite());
    std::size_t next = 0;
    while (chosen.size() < count) {
        chosen.push_back(next);
        auto d = hops_from(g, next);
        for (std::size_t v = 0; v < nearest.size(); ++v) nearest[v] = std::min(nearest[v], d[v]);
        std::size_t best = 0;
        Hops best_d{0};
        for (std::size_t v = 0; v < nearest.size(); ++v) {
            if (nearest[v] > best_d) {
                best_d = nearest[v];
                best = v;
            }
        }
        if (best_d == Hops{0}) break;
        next = best;
    }
    std::sort(chosen.begin(), chosen.end());
    return chosen;
}

NetworkGraph random_geometric_graph(std::size_t n, double radius, std::size_t sensor_count,
                                    std::uint64_t seed) {
    if (n == 0) throw std::invalid_argument("random_geometric_graph: n must be >= 1");
    if (sensor_count > n) throw std::invalid_argument("random_geometric_graph: sensor_count > n");

    Rng rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<Point> pts(n);
    for (auto& p : pts) {
        p.x = unit(rng);
        p.y = unit(rng);
    }

    std::vector<std::vector<std::size_t>> adj(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (std::hypot(pts[i].x - pts[j].x, pts[i].y - pts[j].y) <= radius) {
                adj[i].push_back(j);
                adj[j].push_back(i);
            }

    // Largest component; ties go to the component holding the lowest index.
    std::vector<int> comp(n, -1);
    std::vector<std::size_t> comp_size;
    for (std::size_t s = 0; s < n; ++s) {
        if (comp[s] >= 0) continue;
        int label = static_cast<int>(comp_size.size());
        std::size_t size = 0;
        std::deque<std::size_t> queue{s};
        comp[s] = label;
        while (!queue.empty()) {
            auto u = queue.front();
            queue.pop_front();
            ++size;
            for (auto v : adj[u])
                if (comp[v] < 0) {
                    comp[v] = label;
                    queue.push_back(v);
                }
        }
        comp_size.push_back(size);
    }
    int keep = static_cast<int>(std::max_element(comp_size.begin(), comp_size.end()) - comp_size.begin());

    const auto width = std::to_string(n - 1).size();
    auto name = [&](std::size_t i) {
        auto s = std::to_string(i);
        return "n" + std::string(width - s.size(), '0') + s;
    };

    std::vector<std::pair<NodeId, Point>> positions;
    std::vector<std::pair<NodeId, NodeId>> edges;
    for (std::size_t i = 0; i < n; ++i) {
        if (comp[i] != keep) continue;
        positions.emplace_back(name(i), pts[i]);
        for (auto j : adj[i])
            if (i < j) edges.emplace_back(name(i), name(j));
    }
    auto g = build_graph(edges, positions, {});
    auto sensors = farthest_point_sensors(g, sensor_count);
    std::vector<NodeId> sensor_ids;
    for (auto s : sensors) sensor_ids.push_back(g.id(s));
    return with_sensors(g, sensor_ids);
}

NetworkGraph with_sensors(const NetworkGraph& g, const std::vector<NodeId>& sensors) {
    std::vector<std::pair<NodeId, Point>> positions;
    for (std::size_t i = 0; i < g.node_count(); ++i) positions.emplace_back(g.id(i), g.position(i));
    std::vector<std::pair<NodeId, NodeId>> edges;
    for (auto [u, v] : g.edges()) edges.emplace_back(g.id(u), g.id(v));
    return build_graph(edges, positions, sensors);
}

}  // namespace driftloc
