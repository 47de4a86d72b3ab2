#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <random>

#include "driftloc/network.hpp"
#include "fixtures.hpp"

using namespace driftloc;

TEST(BuildGraph, CountsNodesAndEdges) {
    const auto g = build_graph({{"a", "b"}, {"b", "c"}}, {{"a", {0, 0}}, {"b", {1, 0}}, {"c", {2, 0}}}, {"a", "c"});
    EXPECT_EQ(g.node_count(), 3u);
    EXPECT_EQ(g.edge_count(), 2u);
    EXPECT_EQ(g.sensor_ids(), (std::vector<NodeId>{"a", "c"}));
}

TEST(BuildGraph, RejectsUnknownSensor) {
    try {
        build_graph({{"a", "b"}}, {{"a", {0, 0}}, {"b", {1, 0}}}, {"z"});
        FAIL();
    } catch (const std::invalid_argument& e) {
        EXPECT_NE(std::string(e.what()).find("unknown sensor node"), std::string::npos);
    }
}

TEST(BuildGraph, RejectsMalformedInput) {
    const std::vector<std::pair<NodeId, Point>> pos{{"a", {0, 0}}, {"b", {1, 0}}};
    EXPECT_THROW(build_graph({{"a", "q"}}, pos, {}), std::invalid_argument);
    EXPECT_THROW(build_graph({{"a", "a"}}, pos, {}), std::invalid_argument);
    EXPECT_THROW(build_graph({{"a", "b"}, {"b", "a"}}, pos, {}), std::invalid_argument);
    EXPECT_THROW(build_graph({}, {{"a", {0, 0}}, {"a", {1, 1}}}, {}), std::invalid_argument);
    EXPECT_THROW(build_graph({}, {{"a", {std::nan(""), 0}}}, {}), std::invalid_argument);
}

TEST(BuildGraph, CanonicalNodeOrder) {
    const auto g = build_graph({{"c", "a"}}, {{"c", {0, 0}}, {"b", {1, 0}}, {"a", {2, 0}}}, {"c", "a"});
    EXPECT_EQ(g.node_ids(), (std::vector<NodeId>{"a", "b", "c"}));
    EXPECT_EQ(std::vector<std::size_t>(g.sensor_indices().begin(), g.sensor_indices().end()),
              (std::vector<std::size_t>{0, 2}));
}

// A network of the benchmark's published size: 661 junctions, 764 pipes,
// 29 sensors. The topology here is synthetic (a spanning path plus chords);
// only the counts are checked.
TEST(BuildGraph, LargeUtilityNetworkCounts) {
    std::vector<std::pair<NodeId, Point>> pos;
    for (int i = 0; i < 661; ++i) pos.emplace_back("j" + std::to_string(i), Point{double(i % 30), double(i / 30)});
    std::vector<std::pair<NodeId, NodeId>> edges;
    for (int i = 1; i < 661; ++i) edges.emplace_back(pos[i - 1].first, pos[i].first);
    for (int i = 0; edges.size() < 764; i += 3) edges.emplace_back(pos[i].first, pos[i + 30].first);
    std::vector<NodeId> sensors;
    for (int i = 0; i < 29; ++i) sensors.push_back(pos[i * 22].first);
    const auto g = build_graph(edges, pos, sensors);
    EXPECT_EQ(g.node_count(), 661u);
    EXPECT_EQ(g.edge_count(), 764u);
    EXPECT_EQ(g.sensor_indices().size(), 29u);
}

TEST(TopologicalDistance, PathAndIdentity) {
    const auto g = fixtures::path_graph(3);
    EXPECT_EQ(topological_distance(g, "a", "c"), Hops(2));
    for (const auto& id : g.node_ids()) EXPECT_EQ(topological_distance(g, id, id), Hops(0));
    EXPECT_THROW(topological_distance(g, "a", "zz"), std::invalid_argument);
}

TEST(TopologicalDistance, InfiniteAcrossComponents) {
    const auto g = build_graph({{"a", "b"}}, {{"a", {0, 0}}, {"b", {1, 0}}, {"c", {5, 5}}}, {});
    EXPECT_FALSE(topological_distance(g, "a", "c").is_finite());
    EXPECT_TRUE(std::isinf(topological_distance(g, "a", "c").as_double()));
}

TEST(TopologicalDistance, MatchesFloydWarshall) {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const auto g = fixtures::random_graph(20, 0.12, seed);
        const auto n = g.node_count();
        const double inf = std::numeric_limits<double>::infinity();
        std::vector<std::vector<double>> d(n, std::vector<double>(n, inf));
        for (std::size_t i = 0; i < n; ++i) d[i][i] = 0;
        for (auto [a, b] : g.edges()) d[a][b] = d[b][a] = 1;
        for (std::size_t k = 0; k < n; ++k)
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j) d[i][j] = std::min(d[i][j], d[i][k] + d[k][j]);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                EXPECT_EQ(topological_distance(g, g.id(i), g.id(j)).as_double(), d[i][j]);
    }
}

TEST(TopologicalDistance, MetricProperties) {
    const auto g = fixtures::random_graph(25, 0.1, 42);
    const auto n = g.node_count();
    std::vector<std::vector<Hops>> d;
    for (std::size_t i = 0; i < n; ++i) d.push_back(hops_from(g, i));
    std::map<std::pair<std::size_t, std::size_t>, bool> edge;
    for (auto e : g.edges()) edge[e] = edge[{e.second, e.first}] = true;
    for (std::size_t u = 0; u < n; ++u)
        for (std::size_t v = 0; v < n; ++v) {
            EXPECT_EQ(d[u][v], d[v][u]);
            EXPECT_EQ(d[u][v] == Hops(1), edge.contains({u, v}));
            for (std::size_t w = 0; w < n; ++w)
                if (d[u][v].is_finite() && d[v][w].is_finite())
                    EXPECT_LE(d[u][w].value(), d[u][v].value() + d[v][w].value());
        }
}

TEST(GeographicDistance, Examples) {
    const auto g = build_graph({}, {{"u", {0, 0}}, {"v", {3, 4}}}, {});
    EXPECT_DOUBLE_EQ(geographic_distance(g, "u", "v"), 5.0);
    EXPECT_DOUBLE_EQ(geographic_distance(g, "v", "u"), 5.0);
    EXPECT_EQ(geographic_distance(g, "u", "u"), 0.0);
    EXPECT_THROW(geographic_distance(g, "u", "w"), std::invalid_argument);
}

TEST(GeographicDistance, MatchesHypot) {
    const auto g = fixtures::random_graph(15, 0.0, 9);
    for (std::size_t i = 0; i < g.node_count(); ++i)
        for (std::size_t j = 0; j < g.node_count(); ++j) {
            const auto a = g.position(i), b = g.position(j);
            EXPECT_DOUBLE_EQ(geographic_distance(g, g.id(i), g.id(j)), std::hypot(a.x - b.x, a.y - b.y));
        }
}

TEST(MaxDegree, StarAndEdgeless) {
    std::vector<std::pair<NodeId, Point>> pos{{"hub", {0, 0}}};
    std::vector<std::pair<NodeId, NodeId>> edges;
    for (int i = 0; i < 7; ++i) {
        pos.emplace_back("leaf" + std::to_string(i), Point{1, double(i)});
        edges.emplace_back("hub", pos.back().first);
    }
    EXPECT_EQ(max_degree(build_graph(edges, pos, {})), 7u);
    EXPECT_EQ(max_degree(build_graph({}, pos, {})), 0u);
}

TEST(MaxDegree, MatchesRecount) {
    const auto g = fixtures::random_graph(40, 0.1, 3);
    std::vector<std::size_t> deg(g.node_count(), 0);
    for (auto [a, b] : g.edges()) ++deg[a], ++deg[b];
    EXPECT_EQ(max_degree(g), *std::max_element(deg.begin(), deg.end()));
}

TEST(RandomGeometricGraph, SingleNode) {
    const auto g = random_geometric_graph(1, 0.1, 1, 5);
    EXPECT_EQ(g.node_count(), 1u);
    EXPECT_EQ(g.edge_count(), 0u);
    EXPECT_EQ(g.sensor_indices().size(), 1u);
}

TEST(RandomGeometricGraph, Deterministic) {
    const auto a = random_geometric_graph(60, 0.2, 6, 11);
    const auto b = random_geometric_graph(60, 0.2, 6, 11);
    EXPECT_EQ(a.node_ids(), b.node_ids());
    EXPECT_EQ(a.edges(), b.edges());
    EXPECT_EQ(a.sensor_ids(), b.sensor_ids());
    const auto c = random_geometric_graph(60, 0.2, 6, 12);
    EXPECT_NE(a.edges(), c.edges());
}

// Independent rebuild from the same PRNG stream: squared-distance test and
// union-find components instead of hypot and BFS.
TEST(RandomGeometricGraph, MatchesReferenceRebuild) {
    const std::size_t n = 100;
    const double r = 0.18;
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        std::vector<double> x(n), y(n);
        for (std::size_t i = 0; i < n; ++i) {
            x[i] = u(rng);
            y[i] = u(rng);
        }
        std::vector<std::size_t> parent(n);
        std::iota(parent.begin(), parent.end(), 0);
        auto find = [&](std::size_t a) {
            while (parent[a] != a) a = parent[a] = parent[parent[a]];
            return a;
        };
        std::vector<std::pair<std::size_t, std::size_t>> edges;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j)
                if ((x[i] - x[j]) * (x[i] - x[j]) + (y[i] - y[j]) * (y[i] - y[j]) <= r * r) {
                    edges.emplace_back(i, j);
                    parent[find(i)] = find(j);
                }
        std::map<std::size_t, std::size_t> size;
        for (std::size_t i = 0; i < n; ++i) ++size[find(i)];
        std::size_t best = 0, root = 0;
        for (std::size_t i = 0; i < n; ++i)
            if (size[find(i)] > best) best = size[find(i)], root = find(i);
        std::map<std::size_t, std::size_t> deg;
        std::size_t kept_edges = 0;
        for (auto [a, b] : edges)
            if (find(a) == root) ++deg[a], ++deg[b], ++kept_edges;
        std::map<std::size_t, std::size_t> histogram;
        for (std::size_t i = 0; i < n; ++i)
            if (find(i) == root) ++histogram[deg[i]];

        const auto g = random_geometric_graph(n, r, 10, seed);
        EXPECT_EQ(g.node_count(), best);
        EXPECT_EQ(g.edge_count(), kept_edges);
        std::map<std::size_t, std::size_t> got;
        for (std::size_t v = 0; v < g.node_count(); ++v) ++got[g.neighbors(v).size()];
        EXPECT_EQ(got, histogram);
    }
}

TEST(FarthestPointSensors, SpreadsOnPath) {
    const auto g = fixtures::path_graph(7);
    const auto s = farthest_point_sensors(g, 3);
    EXPECT_EQ(s, (std::vector<std::size_t>{0, 3, 6}));
}

TEST(WithSensors, ReplacesSensorSet) {
    const auto g = fixtures::path_graph(4, {"a"});
    const auto h = with_sensors(g, {"b", "d"});
    EXPECT_EQ(h.sensor_ids(), (std::vector<NodeId>{"b", "d"}));
    EXPECT_EQ(h.edges(), g.edges());
    EXPECT_TRUE(h.is_sensor(1));
    EXPECT_FALSE(h.is_sensor(0));
}
