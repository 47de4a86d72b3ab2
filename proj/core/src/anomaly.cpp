#include "driftloc/anomaly.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "driftloc/rng.hpp"

namespace driftloc {

std::string_view to_string(AnomalyKind kind) {
    return kind == AnomalyKind::type_i ? "type1" : "type2";
}

std::string_view to_string(FaultProfile profile) {
    switch (profile) {
        case FaultProfile::broken: return "broken";
        case FaultProfile::offset: return "offset";
        case FaultProfile::stuck: return "stuck";
        case FaultProfile::incipient_drift: return "incipient_drift";
    }
    return "unknown";
}

AnomalyKind parse_anomaly_kind(std::string_view text) {
    if (text == "type1" || text == "TypeI" || text == "type_i") return AnomalyKind::type_i;
    if (text == "type2" || text == "TypeII" || text == "type_ii") return AnomalyKind::type_ii;
    throw std::invalid_argument("unknown anomaly kind '" + std::string(text) + "'");
}

FaultProfile parse_fault_profile(std::string_view text) {
    for (auto p : {FaultProfile::broken, FaultProfile::offset, FaultProfile::stuck, FaultProfile::incipient_drift})
        if (text == to_string(p)) return p;
    throw std::invalid_argument("unknown fault profile '" + std::string(text) + "'");
}

Matrix anomaly_demand_series(const AnomalyScenario& s, std::size_t node_index, std::size_t steps,
                             std::size_t nodes) {
    if (s.kind != AnomalyKind::type_i)
        throw std::invalid_argument("anomaly_demand_series: type-II scenarios carry no demand");
    if (node_index >= nodes) throw std::out_of_range("anomaly_demand_series: node index out of range");
    Matrix out(steps, nodes);
    for (std::size_t t = s.onset; t < steps; ++t) {
        const auto since = t - s.onset;
        const double share = s.ramp == 0 ? 1.0
                                         : std::min(1.0, static_cast<double>(since) / static_cast<double>(s.ramp));
        out(t, node_index) = s.magnitude * share;
    }
    return out;
}

Matrix anomaly_demand_series(const AnomalyScenario& s, const NetworkGraph& g, std::size_t steps) {
    return anomaly_demand_series(s, g.index_of(s.node), steps, g.node_count());
}

Matrix apply_sensor_fault(const Matrix& measurements, const std::vector<NodeId>& sensor_ids,
                          const AnomalyScenario& s, double sigma0, std::uint64_t seed) {
    if (s.kind != AnomalyKind::type_ii)
        throw std::invalid_argument("apply_sensor_fault: expected a type-II scenario");
    auto it = std::find(sensor_ids.begin(), sensor_ids.end(), s.node);
    if (it == sensor_ids.end()) throw std::invalid_argument("apply_sensor_fault: '" + s.node + "' is not a sensor");
    if (sensor_ids.size() != measurements.cols())
        throw std::invalid_argument("apply_sensor_fault: sensor ids do not match measurement columns");
    const auto col = static_cast<std::size_t>(it - sensor_ids.begin());
    const auto rows = measurements.rows();

    Matrix out = measurements;
    if (s.onset >= rows) return out;
    Rng rng(seed);
    const double frozen = measurements(s.onset, col);
    for (std::size_t t = s.onset; t < rows; ++t) {
        double& x = out(t, col);
        switch (s.profile) {
            case FaultProfile::broken: x = sigma0 * standard_normal(rng); break;
            case FaultProfile::offset: x += s.magnitude; break;
            case FaultProfile::stuck: x = frozen; break;
            case FaultProfile::incipient_drift:
                x += s.magnitude * static_cast<double>(t - s.onset) / static_cast<double>(rows);
                break;
        }
    }
    return out;
}

std::vector<AnomalyScenario> generate_scenarios(const NetworkGraph& g, const ScenarioBatch& batch,
                                                const std::vector<AnomalyKind>& kinds,
                                                const std::vector<double>& magnitudes,
                                                std::uint64_t seed) {
    const auto w = batch.half_window;
    const auto lo = batch.window_length / 10;
    const auto hi = batch.window_length - batch.window_length / 10;  // exclusive
    if (w == 0 || hi <= lo || lo < w || hi - 1 + w > batch.window_length)
        throw std::invalid_argument("window of length " + std::to_string(batch.window_length) +
                                    " is too short for half-window " + std::to_string(w));
    if (batch.profiles.empty() &&
        std::find(kinds.begin(), kinds.end(), AnomalyKind::type_ii) != kinds.end())
        throw std::invalid_argument("type-II scenarios need at least one fault profile");

    std::vector<std::size_t> type1_targets;
    if (batch.targets.empty()) {
        type1_targets.resize(g.node_count());
        std::iota(type1_targets.begin(), type1_targets.end(), 0);
    } else {
        for (const auto& id : batch.targets) type1_targets.push_back(g.index_of(id));
        std::sort(type1_targets.begin(), type1_targets.end());
    }
    const std::vector<std::size_t> sensors(g.sensor_indices().begin(), g.sensor_indices().end());

    Rng rng(seed);
    std::uniform_int_distribution<std::size_t> onset_draw(lo, hi - 1);
    auto pick = [&](const std::vector<std::size_t>& pool) {
        if (!batch.nodes_per_onset) return pool;
        std::vector<std::size_t> shuffled = pool;
        const auto k = std::min(*batch.nodes_per_onset, shuffled.size());
        for (std::size_t i = 0; i < k; ++i) {
            std::uniform_int_distribution<std::size_t> d(i, shuffled.size() - 1);
            std::swap(shuffled[i], shuffled[d(rng)]);
        }
        shuffled.resize(k);
        return shuffled;
    };

    std::vector<AnomalyScenario> out;
    for (std::size_t win = 0; win < batch.windows; ++win) {
        const auto start = window_start(batch, win);
        for (std::size_t o = 0; o < batch.onsets_per_window; ++o) {
            const auto onset = start + onset_draw(rng);
            for (auto kind : kinds) {
                for (double magnitude : magnitudes) {
                    if (kind == AnomalyKind::type_i) {
                        for (auto v : pick(type1_targets))
                            out.push_back({kind, g.id(v), onset, magnitude, FaultProfile::offset, batch.ramp, win});
                    } else {
                        for (auto profile : batch.profiles)
                            for (auto v : pick(sensors))
                                out.push_back({kind, g.id(v), onset, magnitude, profile, 0, win});
                    }
                }
            }
        }
    }
    return out;
}

}  // namespace driftloc
