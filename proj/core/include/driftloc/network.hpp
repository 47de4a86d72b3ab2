#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace driftloc {

using NodeId = std::string;

struct Point {
    double x = 0.0;
    double y = 0.0;
    bool operator==(const Point&) const = default;
};

/// Hop count along a shortest path; infinite between connected components.
class Hops {
public:
    constexpr Hops() = default;
    constexpr explicit Hops(std::size_t value) : value_(value) {}
    static constexpr Hops infinite() { return Hops{kInfinite}; }

    constexpr bool is_finite() const noexcept { return value_ != kInfinite; }
    constexpr std::size_t value() const noexcept { return value_; }
    /// +inf for disconnected pairs.
    double as_double() const noexcept {
        return is_finite() ? static_cast<double>(value_) : std::numeric_limits<double>::infinity();
    }

    constexpr auto operator<=>(const Hops&) const = default;

private:
    static constexpr std::size_t kInfinite = std::numeric_limits<std::size_t>::max();
    std::size_t value_ = 0;
};

/// Immutable undirected graph with 2D node positions and a sensor subset.
/// Nodes are stored sorted by id; all index-based accessors use that order.
class NetworkGraph {
public:
    std::size_t node_count() const noexcept { return ids_.size(); }
    std::size_t edge_count() const noexcept { return edge_count_; }

    const std::vector<NodeId>& node_ids() const noexcept { return ids_; }
    const NodeId& id(std::size_t index) const { return ids_.at(index); }
    /// Throws std::invalid_argument for unknown ids.
    std::size_t index_of(const NodeId& id) const;
    bool contains(const NodeId& id) const { return index_.contains(id); }

    std::span<const std::size_t> neighbors(std::size_t index) const { return adjacency_.at(index); }
    const Point& position(std::size_t index) const { return positions_.at(index); }

    /// Sensor node indices, ascending (equivalently: sensor ids sorted).
    std::span<const std::size_t> sensor_indices() const noexcept { return sensors_; }
    std::vector<NodeId> sensor_ids() const;
    bool is_sensor(std::size_t index) const;

    std::vector<std::pair<std::size_t, std::size_t>> edges() const;

private:
    friend NetworkGraph build_graph(const std::vector<std::pair<NodeId, NodeId>>&,
                                    const std::vector<std::pair<NodeId, Point>>&,
                                    const std::vector<NodeId>&);

    std::vector<NodeId> ids_;
    std::map<NodeId, std::size_t, std::less<>> index_;
    std::vector<std::vector<std::size_t>> adjacency_;
    std::vector<Point> positions_;
    std::vector<std::size_t> sensors_;
    std::size_t edge_count_ = 0;
};

/// Validates and canonicalizes a graph. Every node must appear in
/// `positions`; edges are undirected, without self-loops or duplicates.
NetworkGraph build_graph(const std::vector<std::pair<NodeId, NodeId>>& edges,
                         const std::vector<std::pair<NodeId, Point>>& positions,
                         const std::vector<NodeId>& sensors);

Hops topological_distance(const NetworkGraph& g, const NodeId& u, const NodeId& v);
/// BFS hop counts from one node to every node (graph index order).
std::vector<Hops> hops_from(const NetworkGraph& g, std::size_t source);

double geographic_distance(const NetworkGraph& g, const NodeId& u, const NodeId& v);
double geographic_distance(const NetworkGraph& g, std::size_t u, std::size_t v);

std::size_t max_degree(const NetworkGraph& g);

/// n uniform points in the unit square joined when within `radius`; only the
/// largest connected component is kept. Sensors are placed by farthest-point
/// sampling over hop distance, starting from the first node. Node ids are
/// zero-padded ("n007") so lexicographic and generation order agree.
NetworkGraph random_geometric_graph(std::size_t n, double radius, std::size_t sensor_count,
                                    std::uint64_t seed);

/// Farthest-point sampling over hop distance; deterministic, ties to the
/// lowest index. Exposed for user graphs that lack a sensor layout.
std::vector<std::size_t> farthest_point_sensors(const NetworkGraph& g, std::size_t count);

/// Copy of `g` with a different sensor set.
NetworkGraph with_sensors(const NetworkGraph& g, const std::vector<NodeId>& sensors);

}  // namespace driftloc
