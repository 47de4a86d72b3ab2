#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "driftloc/matrix.hpp"
#include "driftloc/network.hpp"

namespace driftloc {

enum class AnomalyKind { type_i, type_ii };

/// Sensor fault profiles for type-II anomalies.
enum class FaultProfile { broken, offset, stuck, incipient_drift };

std::string_view to_string(AnomalyKind kind);
std::string_view to_string(FaultProfile profile);
AnomalyKind parse_anomaly_kind(std::string_view text);
FaultProfile parse_fault_profile(std::string_view text);

/// A single injected anomaly. Type I adds `magnitude` demand at `node`
/// (reached after `ramp` steps); type II corrupts the sensor at `node`.
struct AnomalyScenario {
    AnomalyKind kind = AnomalyKind::type_i;
    NodeId node;
    std::size_t onset = 0;
    double magnitude = 0.0;
    FaultProfile profile = FaultProfile::offset;
    std::size_t ramp = 0;
    /// Window the scenario was drawn from; sets the demand stream and time origin.
    std::size_t window = 0;

    bool operator==(const AnomalyScenario&) const = default;
};

/// Time x node added demand: zero except column `node` from `onset` on,
/// ramping linearly to `magnitude` over `ramp` steps.
Matrix anomaly_demand_series(const AnomalyScenario& s, const NetworkGraph& g, std::size_t steps);
/// Index-based variant for callers without a graph.
Matrix anomaly_demand_series(const AnomalyScenario& s, std::size_t node_index, std::size_t steps,
                             std::size_t nodes);

/// Applies a type-II fault to the column of `s.node` from row `s.onset` on.
///   broken:          N(0, sigma0) draws
///   offset:          + magnitude
///   stuck:           frozen at the onset value
///   incipient_drift: + magnitude * (t - onset) / rows
Matrix apply_sensor_fault(const Matrix& measurements, const std::vector<NodeId>& sensor_ids,
                          const AnomalyScenario& s, double sigma0, std::uint64_t seed);

struct ScenarioBatch {
    std::size_t windows = 23;
    std::size_t window_length = 4320;
    std::size_t window_offset = 2160;
    std::size_t onsets_per_window = 10;
    /// Localization half-window w; onsets keep w samples on both sides.
    std::size_t half_window = 288;
    std::size_t ramp = 0;
    std::vector<FaultProfile> profiles{FaultProfile::broken, FaultProfile::offset};
    /// When set, each (window, onset, magnitude[, profile]) draws this many
    /// target nodes at random instead of enumerating every eligible node.
    std::optional<std::size_t> nodes_per_onset;
    /// Restricts type-I targets; empty means every node.
    std::vector<NodeId> targets;
};

/// Expands (window x onset x magnitude x target [x profile]) deterministically.
/// Onsets are absolute time indices, uniform in the middle 80% of their window.
std::vector<AnomalyScenario> generate_scenarios(const NetworkGraph& g, const ScenarioBatch& batch,
                                                const std::vector<AnomalyKind>& kinds,
                                                const std::vector<double>& magnitudes,
                                                std::uint64_t seed);

/// Start time of a window in absolute steps.
inline std::size_t window_start(const ScenarioBatch& batch, std::size_t window) {
    return window * batch.window_offset;
}

}  // namespace driftloc
