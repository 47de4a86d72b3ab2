#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "driftloc/anomaly.hpp"
#include "driftloc/dynamics.hpp"
#include "driftloc/theory.hpp"
#include "fixtures.hpp"

using namespace driftloc;

namespace {

AnomalyScenario leak(const NodeId& node, std::size_t onset, double a, std::size_t ramp = 0) {
    return {AnomalyKind::type_i, node, onset, a, FaultProfile::offset, ramp, 0};
}

AnomalyScenario fault(const NodeId& node, std::size_t onset, double a, FaultProfile p) {
    return {AnomalyKind::type_ii, node, onset, a, p, 0, 0};
}

Matrix ramp_matrix(std::size_t rows, std::size_t cols) {
    Matrix m(rows, cols);
    for (std::size_t t = 0; t < rows; ++t)
        for (std::size_t c = 0; c < cols; ++c) m(t, c) = 10.0 * static_cast<double>(c) + 0.01 * static_cast<double>(t);
    return m;
}

}  // namespace

TEST(AnomalyDemand, ZeroMagnitudeIsZero) {
    const auto g = fixtures::path_graph(3);
    const auto m = anomaly_demand_series(leak("b", 2, 0.0), g, 6);
    for (double x : m.data()) EXPECT_EQ(x, 0.0);
}

TEST(AnomalyDemand, AbruptStep) {
    const auto g = fixtures::path_graph(3);
    const auto m = anomaly_demand_series(leak("b", 5, 1.0), g, 8);
    EXPECT_EQ(m.column(1), (std::vector<double>{0, 0, 0, 0, 0, 1, 1, 1}));
    EXPECT_EQ(m.column(0), std::vector<double>(8, 0.0));
    EXPECT_EQ(m.column(2), std::vector<double>(8, 0.0));
}

TEST(AnomalyDemand, LinearRamp) {
    const auto m = anomaly_demand_series(leak("a", 3, 2.0, 4), 0, 12, 1);
    for (int i = 1; i <= 4; ++i) EXPECT_DOUBLE_EQ(m(3 + static_cast<std::size_t>(i), 0), 2.0 * i / 4.0);
    EXPECT_EQ(m(3, 0), 0.0);
    EXPECT_EQ(m(11, 0), 2.0);
}

TEST(AnomalyDemand, RejectsTypeII) {
    const auto g = fixtures::path_graph(3, {"a"});
    EXPECT_THROW(anomaly_demand_series(fault("a", 1, 1, FaultProfile::offset), g, 5), std::invalid_argument);
}

TEST(SensorFault, ZeroOffsetIsIdentity) {
    const auto m = ramp_matrix(20, 3);
    EXPECT_EQ(apply_sensor_fault(m, {"s0", "s1", "s2"}, fault("s1", 5, 0.0, FaultProfile::offset), 0.5, 1), m);
}

TEST(SensorFault, StuckFreezesOnsetValue) {
    const auto m = ramp_matrix(20, 3);
    const auto out = apply_sensor_fault(m, {"s0", "s1", "s2"}, fault("s2", 7, 1.0, FaultProfile::stuck), 0.5, 1);
    for (std::size_t t = 7; t < 20; ++t) EXPECT_EQ(out(t, 2), m(7, 2));
    for (std::size_t t = 0; t < 7; ++t) EXPECT_EQ(out(t, 2), m(t, 2));
}

TEST(SensorFault, BrokenMoments) {
    const Matrix m(10001, 2, 50.0);
    const auto out = apply_sensor_fault(m, {"s0", "s1"}, fault("s0", 1, 0.0, FaultProfile::broken), 0.5, 3);
    double sum = 0, sum2 = 0;
    for (std::size_t t = 1; t < 10001; ++t) sum += out(t, 0), sum2 += out(t, 0) * out(t, 0);
    const double mean = sum / 10000, sd = std::sqrt(sum2 / 10000 - mean * mean);
    EXPECT_NEAR(mean, 0.0, 0.05 * 0.5);
    EXPECT_NEAR(sd, 0.5, 0.05 * 0.5);
}

TEST(SensorFault, IncipientDriftGrowsLinearly) {
    const Matrix m(10, 1, 0.0);
    const auto out = apply_sensor_fault(m, {"s"}, fault("s", 2, 5.0, FaultProfile::incipient_drift), 0.5, 1);
    for (std::size_t t = 2; t < 10; ++t) EXPECT_DOUBLE_EQ(out(t, 0), 5.0 * static_cast<double>(t - 2) / 10.0);
}

TEST(SensorFault, ChangesExactlyOneColumn) {
    const auto m = ramp_matrix(30, 4);
    const std::vector<NodeId> ids{"a", "b", "c", "d"};
    for (auto p : {FaultProfile::broken, FaultProfile::offset, FaultProfile::stuck, FaultProfile::incipient_drift}) {
        const auto out = apply_sensor_fault(m, ids, fault("c", 10, 2.0, p), 0.5, 9);
        for (std::size_t c = 0; c < 4; ++c) {
            bool changed = false;
            for (std::size_t t = 0; t < 30; ++t) changed |= out(t, c) != m(t, c);
            EXPECT_EQ(changed, c == 2) << to_string(p) << " column " << c;
        }
    }
}

TEST(SensorFault, RejectsNonSensor) {
    const auto m = ramp_matrix(5, 2);
    EXPECT_THROW(apply_sensor_fault(m, {"a", "b"}, fault("z", 1, 1, FaultProfile::offset), 0.5, 1),
                 std::invalid_argument);
    EXPECT_THROW(apply_sensor_fault(m, {"a", "b"}, leak("a", 1, 1), 0.5, 1), std::invalid_argument);
}

TEST(Strings, RoundTrip) {
    for (auto k : {AnomalyKind::type_i, AnomalyKind::type_ii}) EXPECT_EQ(parse_anomaly_kind(to_string(k)), k);
    for (auto p : {FaultProfile::broken, FaultProfile::offset, FaultProfile::stuck, FaultProfile::incipient_drift})
        EXPECT_EQ(parse_fault_profile(to_string(p)), p);
    EXPECT_THROW(parse_fault_profile("melted"), std::invalid_argument);
}

TEST(GenerateScenarios, SingleCell) {
    const auto g = fixtures::path_graph(5, {"a", "e"});
    ScenarioBatch b;
    b.windows = 1;
    b.onsets_per_window = 1;
    b.targets = {"c"};
    const auto s = generate_scenarios(g, b, {AnomalyKind::type_i}, {1.0}, 4);
    ASSERT_EQ(s.size(), 1u);
    EXPECT_EQ(s[0].node, "c");
}

TEST(GenerateScenarios, TwentyThreeWindowsTimesTenOnsets) {
    const auto g = fixtures::path_graph(5, {"a", "e"});
    ScenarioBatch b;  // 23 windows of 4320 steps, offset 2160, 10 onsets
    b.targets = {"b"};
    const auto s = generate_scenarios(g, b, {AnomalyKind::type_i}, {1.0}, 4);
    EXPECT_EQ(s.size(), 230u);
    for (const auto& sc : s) {
        const auto start = window_start(b, sc.window);
        EXPECT_GE(sc.onset, start + b.window_length / 10);
        EXPECT_LT(sc.onset, start + b.window_length - b.window_length / 10);
        EXPECT_GE(sc.onset - start, b.half_window);
        EXPECT_LE(sc.onset - start + b.half_window, b.window_length);
    }
}

TEST(GenerateScenarios, DeterministicUnderSeed) {
    const auto g = random_geometric_graph(30, 0.3, 5, 1);
    ScenarioBatch b;
    b.windows = 3;
    b.nodes_per_onset = 2;
    const auto a = generate_scenarios(g, b, {AnomalyKind::type_i, AnomalyKind::type_ii}, {0.5, 2.0}, 8);
    EXPECT_EQ(a, generate_scenarios(g, b, {AnomalyKind::type_i, AnomalyKind::type_ii}, {0.5, 2.0}, 8));
    EXPECT_NE(a, generate_scenarios(g, b, {AnomalyKind::type_i, AnomalyKind::type_ii}, {0.5, 2.0}, 9));
}

TEST(GenerateScenarios, TypeIITargetsSensors) {
    const auto g = random_geometric_graph(30, 0.3, 5, 1);
    ScenarioBatch b;
    b.windows = 2;
    const auto s = generate_scenarios(g, b, {AnomalyKind::type_ii}, {0.25}, 3);
    EXPECT_EQ(s.size(), 2u * 10u * 2u * 5u);
    for (const auto& sc : s) EXPECT_TRUE(g.is_sensor(g.index_of(sc.node)));
}

TEST(GenerateScenarios, RejectsShortWindow) {
    const auto g = fixtures::path_graph(3);
    ScenarioBatch b;
    b.window_length = 1000;
    b.half_window = 288;
    EXPECT_THROW(generate_scenarios(g, b, {AnomalyKind::type_i}, {1.0}, 1), std::invalid_argument);
}

TEST(AnomalyInvariants, ZeroMagnitudeMatchesNominalRun) {
    const auto g = random_geometric_graph(25, 0.3, 4, 3);
    const auto m = TransitionModel::uniform(g, {});
    const auto dm = DemandModel::uniform(g.node_count(), 1.0, sinusoidal_profile(144, 0.3), 0.9, 0.05, 0.1);
    const auto a = anomaly_demand_series(leak(g.id(3), 10, 0.0), g, 50);
    const auto with = simulate(m, dm, a, 50, 20, 6);
    const auto without = simulate(m, dm, {}, 50, 20, 6);
    EXPECT_EQ(measure(with, g, {}, 0.05, 0.5, 2).values, measure(without, g, {}, 0.05, 0.5, 2).values);
}

TEST(AnomalyInvariants, SteadyStateEffectFollowsComponents) {
    // Two components; the leak sits in the first.
    const auto g = build_graph({{"a", "b"}, {"b", "c"}, {"c", "d"}, {"x", "y"}},
                               {{"a", {0, 0}}, {"b", {1, 0}}, {"c", {2, 0}}, {"d", {3, 0}}, {"x", {9, 9}}, {"y", {9, 8}}},
                               {});
    DynamicsParams p;
    p.mode = DynamicsMode::theorem;
    const auto m = TransitionModel::uniform(g, p);
    const auto decay = verify_decay(m, g, g.index_of("a"), 1.0, std::vector<double>(6, 0.5), 1e-13);
    for (std::size_t v = 0; v < 6; ++v) {
        const double delta = decay.report.checks[v].measured;
        if (decay.hops[v].is_finite()) EXPECT_GT(delta, 0.0) << g.id(v);
        else EXPECT_EQ(delta, 0.0) << g.id(v);
    }
}
