#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "driftloc/matrix.hpp"
#include "driftloc/network.hpp"
#include "driftloc/rng.hpp"

namespace driftloc {

enum class DynamicsMode {
    /// C_s = 0.9 / (deg G + 1): the exponential-decay hypothesis holds.
    theorem,
    /// C_s = 0.8: stronger coupling, harder localization.
    realistic,
};

struct DynamicsParams {
    DynamicsMode mode = DynamicsMode::realistic;
    /// Raw contraction factor c; when set it overrides `mode`.
    std::optional<double> contraction;
    double demand_gain = 1.0;      // k
    double demand_exponent = 1.0;  // alpha
    double base_level = 50.0;      // b_v for every node
    /// Std of optional additive Gaussian process noise; zero keeps O deterministic.
    double process_noise = 0.0;
};

struct LipschitzConstants {
    double state;   // C_s, l1 Lipschitz constant in the observables
    double demand;  // C_d, l1 Hoelder constant in the demands
};

/// Contractive transition map
///   O_v(p, d) = c * sum_{w in N[v]} W_vw p_w + b_v - k * d_v^alpha
/// with W row-stochastic over the closed neighborhood N[v] = N(v) + {v}.
class TransitionModel {
public:
    /// Uniform weights over each closed neighborhood. Without an explicit
    /// contraction factor, c is chosen so that C_s hits the mode's target.
    static TransitionModel uniform(const NetworkGraph& g, const DynamicsParams& params);

    /// Explicit coupling: `weights[v]` lists (w, W_vw) over N[v]. Rows must be
    /// nonnegative and sum to 1; entries must reference v or its neighbors.
    TransitionModel(const NetworkGraph& g,
                    const std::vector<std::vector<std::pair<std::size_t, double>>>& weights,
                    double contraction, std::vector<double> base_levels, double demand_gain,
                    double demand_exponent, double process_noise = 0.0);

    std::size_t node_count() const noexcept { return base_.size(); }
    double contraction() const noexcept { return c_; }
    double demand_gain() const noexcept { return k_; }
    double demand_exponent() const noexcept { return alpha_; }
    double process_noise() const noexcept { return process_noise_; }
    std::span<const double> base_levels() const noexcept { return base_; }
    std::size_t graph_max_degree() const noexcept { return max_degree_; }
    /// Largest column sum of W.
    double max_column_sum() const noexcept { return max_col_sum_; }
    /// Sparse W rows as CSR.
    std::span<const std::size_t> row_offsets() const noexcept { return row_ptr_; }
    std::span<const std::size_t> column_indices() const noexcept { return col_; }
    std::span<const double> weights() const noexcept { return w_; }

    /// One synchronous update written into `out` (sized node_count()).
    void apply(std::span<const double> observables, std::span<const double> demand,
               std::span<double> out) const;

private:
    TransitionModel() = default;

    std::vector<std::size_t> row_ptr_;
    std::vector<std::size_t> col_;
    std::vector<double> w_;
    std::vector<double> base_;
    double c_ = 0.0;
    double k_ = 1.0;
    double alpha_ = 1.0;
    double process_noise_ = 0.0;
    double max_col_sum_ = 0.0;
    std::size_t max_degree_ = 0;
};

std::vector<double> step(const TransitionModel& model, std::span<const double> observables,
                         std::span<const double> effective_demand);

/// Certified upper bounds: C_s = c * max column sum of W, and
/// C_d = k * |V|^(1 - alpha) (equal to k for alpha = 1).
LipschitzConstants lipschitz_constants(const TransitionModel& model);

/// True when C_s < 1 / (deg G + 1).
bool satisfies_decay_hypothesis(const TransitionModel& model);

/// Fixpoint iteration from the base levels until ||O(p, d) - p||_1 <= tol.
std::vector<double> steady_state(const TransitionModel& model, std::span<const double> demand,
                                 double tol = 1e-10);

struct DemandModel {
    std::vector<double> base;            // mu_v >= 0
    std::vector<double> diurnal{1.0};    // periodic multiplier, indexed by t mod size
    double persistence = 0.0;            // rho in [0, 1)
    double volatility = 0.0;             // s >= 0
    std::vector<double> noise;           // per-node noise std

    static DemandModel uniform(std::size_t nodes, double base, std::vector<double> diurnal,
                               double persistence, double volatility, double noise);
    double diurnal_mean() const;
};

/// Sinusoidal day profile 1 + amplitude * sin(2 pi t / period).
std::vector<double> sinusoidal_profile(std::size_t period, double amplitude);

/// D_{t,v} = max(0, mu_v * diurnal(t0 + t) * (1 + H_t) + noise_v * z), with
/// H an AR(1) process started from its stationary law.
Matrix sample_demands(const DemandModel& demand_model, std::size_t nodes, std::size_t steps,
                      std::uint64_t seed, std::size_t t0 = 0);

struct ObservableSeries {
    Matrix values;  // time x node, graph node order
    std::size_t t0 = 0;
};

/// Runs the dynamics on a given effective demand stream from `initial`.
/// Process noise (if the model has any) is drawn from `rng`.
ObservableSeries run_dynamics(const TransitionModel& model, const Matrix& effective_demand,
                              std::span<const double> initial, Rng& rng, std::size_t t0 = 0);

/// Samples burn_in + steps demand rows, adds `anomaly_demand` to the last
/// `steps` rows (clamped at 0), starts from the base levels and discards the
/// burn-in. `t0` is the absolute time of the first retained row (diurnal phase).
/// Demands come from derive_seed(seed, 1), process noise from derive_seed(seed, 2).
ObservableSeries simulate(const TransitionModel& model, const DemandModel& demand_model,
                          const Matrix& anomaly_demand, std::size_t steps, std::size_t burn_in,
                          std::uint64_t seed, std::size_t t0 = 0);

enum class SensorState : std::uint8_t { online = 1, broken = 0 };

struct SensorSeries {
    Matrix values;  // time x sensor
    std::vector<NodeId> sensors;
    std::size_t t0 = 0;
};

/// Observation channel: online sensors read N(O, sigma1), broken ones N(0, sigma0).
/// An empty `fault_state` means every sensor is online.
SensorSeries measure(const ObservableSeries& observables, const NetworkGraph& g,
                     const std::vector<std::vector<SensorState>>& fault_state, double sigma1,
                     double sigma0, std::uint64_t seed);

struct MeasurementWindow {
    Matrix values;  // 2w x sensor: rows [0, w) before onset, [w, 2w) from onset
    std::vector<NodeId> sensors;
    std::size_t half_window = 0;
};

/// Cuts rows [onset - w, onset + w) of a sensor series (onset is a row index).
MeasurementWindow extract_window(const SensorSeries& series, std::size_t onset, std::size_t w);

}  // namespace driftloc
