#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "driftloc/dynamics.hpp"
#include "driftloc/network.hpp"

namespace driftloc {

struct BoundCheck {
    std::string label;
    double bound = 0.0;
    double measured = 0.0;
    /// Exact checks (disconnected nodes) require measured == bound.
    bool exact = false;

    double margin() const noexcept { return bound - measured; }
};

/// A family of measured-vs-bound comparisons. Passes iff every check has
/// margin >= -tolerance (exact checks: margin == 0).
struct BoundCheckReport {
    std::string quantity;
    std::vector<BoundCheck> checks;
    double tolerance = 0.0;

    double margin() const;
    bool pass() const;
    /// Largest measured / bound over checks with a positive bound.
    double worst_ratio() const;
};

/// ||O^t(p0) - O^t(p0')||_1 against C_s^t ||p0 - p0'||_1 for t = 1..steps
/// under a constant demand.
BoundCheckReport verify_fixpoint(const TransitionModel& model, std::span<const double> demand,
                                 std::span<const double> p0, std::span<const double> p0_other, std::size_t steps);

/// ||steady(d_a) - steady(d_b)||_1 <= C_d / (1 - C_s) * ||d_a - d_b||_1^alpha.
BoundCheckReport verify_hoelder(const TransitionModel& model, std::span<const double> demand_a,
                                std::span<const double> demand_b, double tol = 1e-11);

/// Treats the rows of `samples` as draws of D: compares the sample mean of
/// ||steady(D) - steady(mean D)||_1 with C_d / (1 - C_s) * (sum_v std(D_v))^alpha.
/// Tolerance is three Monte-Carlo standard errors.
BoundCheckReport verify_stochastic_mean(const TransitionModel& model, const Matrix& samples, double tol = 1e-11);
BoundCheckReport verify_stochastic_mean(const TransitionModel& model, const DemandModel& demand_model,
                                        std::size_t samples, std::uint64_t seed, double tol = 1e-11);

struct DecayReport {
    BoundCheckReport report;        // one check per node
    std::vector<Hops> hops;         // from the anomaly node, graph order
    std::vector<double> shell_median;  // median |delta| per finite hop distance
    bool monotone = true;           // shell_median non-increasing
};

/// Steady states with and without a one-hot anomaly `magnitude` at `node`
/// against C_d a^alpha (C_s (deg+1))^d / (1 - C_s (deg+1)); nodes in other
/// components must be unaffected exactly. Refuses models with
/// C_s >= 1 / (deg G + 1).
DecayReport verify_decay(const TransitionModel& model, const NetworkGraph& g, std::size_t node, double magnitude,
                         std::span<const double> demand, double tol = 1e-12);

/// Decay bound at hop distance `hops` (0 for infinite distance).
double decay_bound(const TransitionModel& model, double magnitude, Hops hops);

struct NecessityReport {
    std::size_t n = 0;
    double c_s = 0.0;
    std::size_t max_degree = 0;
    double delta_w = 0.0;
    double delta_u = 0.0;
    double ratio = 0.0;     // |delta_w| / |delta_u_i|
    double expected = 0.0;  // n * c_s
};

/// Graph {v, w, u_1..u_n} with edges {v, w} x {u_i} and the map
/// O_v = d_v, O_{u_i} = c_s p_v, O_w = c_s sum_i p_{u_i}.
NecessityReport necessity_example(std::size_t n, double c_s);

enum class TheorySuite { fixpoint, hoelder, mean, decay, necessity, all };
TheorySuite parse_theory_suite(const std::string& name);

struct TheorySweepConfig {
    std::size_t instances = 100;
    std::size_t max_nodes = 50;
    std::size_t fixpoint_steps = 40;
    std::size_t hoelder_pairs = 10;
    std::size_t mean_samples = 200;
    std::vector<double> decay_magnitudes{0.1, 1.0, 10.0};
    std::size_t necessity_max_n = 8;
    double necessity_c_s = 0.3;
};

struct TheorySuiteResult {
    std::string suite;
    std::size_t checks = 0;
    std::size_t failures = 0;
    double worst_margin = 0.0;
    double worst_ratio = 0.0;
    bool pass() const noexcept { return failures == 0; }
};

/// Seeded sweeps over random geometric graphs (10..max_nodes nodes).
std::vector<TheorySuiteResult> run_theory_suite(TheorySuite suite, const TheorySweepConfig& config,
                                                std::uint64_t seed);

nlohmann::json to_json(const std::vector<TheorySuiteResult>& results);

}  // namespace driftloc
