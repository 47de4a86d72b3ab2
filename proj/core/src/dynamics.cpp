#include "driftloc/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <string>

namespace driftloc {

namespace {

void require_size(std::size_t got, std::size_t want, const char* what) {
    if (got != want)
        throw std::invalid_argument(std::string(what) + ": dimension mismatch (got " +
                                    std::to_string(got) + ", expected " + std::to_string(want) + ")");
}

double l1_distance(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
    return s;
}

}  // namespace

TransitionModel::TransitionModel(const NetworkGraph& g,
                                 const std::vector<std::vector<std::pair<std::size_t, double>>>& weights,
                                 double contraction, std::vector<double> base_levels,
                                 double demand_gain, double demand_exponent, double process_noise)
    : base_(std::move(base_levels)),
      c_(contraction),
      k_(demand_gain),
      alpha_(demand_exponent),
      process_noise_(process_noise),
      max_degree_(max_degree(g)) {
    const auto n = g.node_count();
    require_size(weights.size(), n, "coupling weights");
    require_size(base_.size(), n, "base levels");
    if (!(c_ > 0.0 && c_ < 1.0)) throw std::invalid_argument("contraction factor must lie in (0, 1)");
    if (!(k_ > 0.0)) throw std::invalid_argument("demand gain k must be positive");
    if (!(alpha_ > 0.0 && alpha_ <= 1.0)) throw std::invalid_argument("demand exponent must lie in (0, 1]");
    if (!(process_noise_ >= 0.0)) throw std::invalid_argument("process noise must be nonnegative");

    std::vector<double> col_sum(n, 0.0);
    row_ptr_.push_back(0);
    for (std::size_t v = 0; v < n; ++v) {
        auto nb = g.neighbors(v);
        double total = 0.0;
        for (auto [w, weight] : weights[v]) {
            if (w != v && !std::binary_search(nb.begin(), nb.end(), w))
                throw std::invalid_argument("coupling weight outside the closed neighborhood of '" +
                                            g.id(v) + "'");
            if (!(weight >= 0.0)) throw std::invalid_argument("coupling weights must be nonnegative");
            col_.push_back(w);
            w_.push_back(weight);
            col_sum[w] += weight;
            total += weight;
        }
        if (std::abs(total - 1.0) > 1e-12)
            throw std::invalid_argument("coupling weights of '" + g.id(v) + "' do not sum to 1");
        row_ptr_.push_back(col_.size());
    }
    max_col_sum_ = n ? *std::max_element(col_sum.begin(), col_sum.end()) : 0.0;
}

TransitionModel TransitionModel::uniform(const NetworkGraph& g, const DynamicsParams& params) {
    const auto n = g.node_count();
    std::vector<std::vector<std::pair<std::size_t, double>>> weights(n);
    std::vector<double> col_sum(n, 0.0);
    for (std::size_t v = 0; v < n; ++v) {
        auto nb = g.neighbors(v);
        const double share = 1.0 / static_cast<double>(nb.size() + 1);
        weights[v].emplace_back(v, share);
        col_sum[v] += share;
        for (auto w : nb) {
            weights[v].emplace_back(w, share);
            col_sum[w] += share;
        }
    }
    const double max_col = n ? *std::max_element(col_sum.begin(), col_sum.end()) : 1.0;
    const double deg1 = static_cast<double>(max_degree(g) + 1);

    double c = 0.0;
    if (params.contraction) {
        c = *params.contraction;
    } else {
        const double target = params.mode == DynamicsMode::theorem ? 0.9 / deg1 : 0.8;
        c = target / max_col;
    }
    TransitionModel model(g, weights, c, std::vector<double>(n, params.base_level), params.demand_gain,
                          params.demand_exponent, params.process_noise);
    if (params.mode == DynamicsMode::theorem && !satisfies_decay_hypothesis(model))
        throw std::invalid_argument("theorem mode requires C_s < 1/(deg G + 1); got C_s = " +
                                    std::to_string(lipschitz_constants(model).state));
    return model;
}

void TransitionModel::apply(std::span<const double> p, std::span<const double> d,
                            std::span<double> out) const {
    const auto n = base_.size();
    for (std::size_t v = 0; v < n; ++v) {
        double coupled = 0.0;
        for (auto e = row_ptr_[v]; e < row_ptr_[v + 1]; ++e) coupled += w_[e] * p[col_[e]];
        const double withdrawal = alpha_ == 1.0 ? d[v] : std::pow(d[v], alpha_);
        out[v] = c_ * coupled + base_[v] - k_ * withdrawal;
    }
}

std::vector<double> step(const TransitionModel& model, std::span<const double> observables,
                         std::span<const double> effective_demand) {
    require_size(observables.size(), model.node_count(), "step observables");
    require_size(effective_demand.size(), model.node_count(), "step demand");
    for (double d : effective_demand)
        if (!(d >= 0.0)) throw std::invalid_argument("step: demands must be nonnegative");
    std::vector<double> out(model.node_count());
    model.apply(observables, effective_demand, out);
    return out;
}

LipschitzConstants lipschitz_constants(const TransitionModel& model) {
    const double n = static_cast<double>(model.node_count());
    const double alpha = model.demand_exponent();
    // sum_v |x_v|^alpha <= n^(1-alpha) (sum_v |x_v|)^alpha by concavity.
    const double demand = alpha == 1.0 ? model.demand_gain()
                                       : model.demand_gain() * std::pow(std::max(n, 1.0), 1.0 - alpha);
    return {model.contraction() * model.max_column_sum(), demand};
}

bool satisfies_decay_hypothesis(const TransitionModel& model) {
    return lipschitz_constants(model).state * static_cast<double>(model.graph_max_degree() + 1) < 1.0;
}

std::vector<double> steady_state(const TransitionModel& model, std::span<const double> demand,
                                 double tol) {
    require_size(demand.size(), model.node_count(), "steady_state demand");
    if (!(tol > 0.0)) throw std::invalid_argument("steady_state: tol must be positive");
    if (lipschitz_constants(model).state >= 1.0)
        throw std::invalid_argument("steady_state: non-contractive model (C_s >= 1)");
    for (double d : demand)
        if (!(d >= 0.0)) throw std::invalid_argument("steady_state: demands must be nonnegative");

    std::vector<double> p(model.base_levels().begin(), model.base_levels().end());
    std::vector<double> next(p.size());
    for (std::size_t it = 0; it < 10'000'000; ++it) {
        model.apply(p, demand, next);
        const double residual = l1_distance(p, next);
        p.swap(next);
        // ||O(p_new) - p_new||_1 <= C_s * residual < residual, so the returned p meets tol.
        if (residual <= tol) return p;
    }
    throw std::runtime_error("steady_state: fixpoint iteration did not converge");
}

DemandModel DemandModel::uniform(std::size_t nodes, double base, std::vector<double> diurnal,
                                 double persistence, double volatility, double noise) {
    DemandModel m;
    m.base.assign(nodes, base);
    m.diurnal = std::move(diurnal);
    m.persistence = persistence;
    m.volatility = volatility;
    m.noise.assign(nodes, noise);
    return m;
}

double DemandModel::diurnal_mean() const {
    if (diurnal.empty()) return 1.0;
    return std::accumulate(diurnal.begin(), diurnal.end(), 0.0) / static_cast<double>(diurnal.size());
}

std::vector<double> sinusoidal_profile(std::size_t period, double amplitude) {
    if (period == 0) throw std::invalid_argument("diurnal period must be positive");
    std::vector<double> profile(period);
    for (std::size_t t = 0; t < period; ++t)
        profile[t] = 1.0 + amplitude * std::sin(2.0 * std::numbers::pi * static_cast<double>(t) /
                                                static_cast<double>(period));
    return profile;
}

Matrix sample_demands(const DemandModel& dm, std::size_t nodes, std::size_t steps, std::uint64_t seed,
                      std::size_t t0) {
    require_size(dm.base.size(), nodes, "demand base");
    require_size(dm.noise.size(), nodes, "demand noise");
    if (steps == 0) throw std::invalid_argument("sample_demands: steps must be >= 1");
    if (!(dm.persistence >= 0.0 && dm.persistence < 1.0))
        throw std::invalid_argument("sample_demands: persistence must lie in [0, 1)");
    if (!(dm.volatility >= 0.0)) throw std::invalid_argument("sample_demands: volatility must be >= 0");
    if (dm.diurnal.empty()) throw std::invalid_argument("sample_demands: empty diurnal profile");

    Rng rng(seed);
    Matrix out(steps, nodes);
    const double rho = dm.persistence;
    double hidden = dm.volatility / std::sqrt(1.0 - rho * rho) * standard_normal(rng);
    for (std::size_t t = 0; t < steps; ++t) {
        if (t > 0) hidden = rho * hidden + dm.volatility * standard_normal(rng);
        const double profile = dm.diurnal[(t0 + t) % dm.diurnal.size()];
        for (std::size_t v = 0; v < nodes; ++v) {
            const double z = standard_normal(rng);
            out(t, v) = std::max(0.0, dm.base[v] * profile * (1.0 + hidden) + dm.noise[v] * z);
        }
    }
    return out;
}

ObservableSeries run_dynamics(const TransitionModel& model, const Matrix& effective_demand,
                              std::span<const double> initial, Rng& rng, std::size_t t0) {
    require_size(effective_demand.cols(), model.node_count(), "run_dynamics demand");
    require_size(initial.size(), model.node_count(), "run_dynamics initial state");
    ObservableSeries series{Matrix(effective_demand.rows(), model.node_count()), t0};
    std::vector<double> p(initial.begin(), initial.end());
    for (std::size_t t = 0; t < effective_demand.rows(); ++t) {
        auto out = series.values.row(t);
        model.apply(p, effective_demand.row(t), out);
        if (model.process_noise() > 0.0)
            for (auto& x : out) x += model.process_noise() * standard_normal(rng);
        std::copy(out.begin(), out.end(), p.begin());
    }
    return series;
}

ObservableSeries simulate(const TransitionModel& model, const DemandModel& demand_model,
                          const Matrix& anomaly_demand, std::size_t steps, std::size_t burn_in,
                          std::uint64_t seed, std::size_t t0) {
    if (steps == 0) throw std::invalid_argument("simulate: steps must be >= 1");
    const auto n = model.node_count();
    if (!anomaly_demand.empty()) {
        require_size(anomaly_demand.rows(), steps, "simulate anomaly rows");
        require_size(anomaly_demand.cols(), n, "simulate anomaly columns");
    }
    if (lipschitz_constants(model).state >= 1.0)
        throw std::invalid_argument("simulate: non-contractive model (C_s >= 1)");

    // Burn-in rows precede t0 on the same diurnal clock.
    const auto period = std::max<std::size_t>(1, demand_model.diurnal.size());
    const auto start = (t0 + period - burn_in % period) % period;
    Matrix demand = sample_demands(demand_model, n, burn_in + steps, derive_seed(seed, 1), start);
    if (!anomaly_demand.empty())
        for (std::size_t t = 0; t < steps; ++t)
            for (std::size_t v = 0; v < n; ++v)
                demand(burn_in + t, v) = std::max(0.0, demand(burn_in + t, v) + anomaly_demand(t, v));

    Rng noise(derive_seed(seed, 2));
    auto full = run_dynamics(model, demand, model.base_levels(), noise);
    return {full.values.slice_rows(burn_in, steps), t0};
}

SensorSeries measure(const ObservableSeries& observables, const NetworkGraph& g,
                     const std::vector<std::vector<SensorState>>& fault_state, double sigma1,
                     double sigma0, std::uint64_t seed) {
    if (sigma1 < 0.0 || sigma0 < 0.0) throw std::invalid_argument("measure: sigma must be nonnegative");
    require_size(observables.values.cols(), g.node_count(), "measure observables");
    const auto sensors = g.sensor_indices();
    const auto T = observables.values.rows();
    if (!fault_state.empty()) {
        require_size(fault_state.size(), T, "measure fault_state rows");
        for (const auto& row : fault_state) require_size(row.size(), sensors.size(), "measure fault_state columns");
    }

    SensorSeries out{Matrix(T, sensors.size()), g.sensor_ids(), observables.t0};
    Rng rng(seed);
    for (std::size_t t = 0; t < T; ++t) {
        for (std::size_t j = 0; j < sensors.size(); ++j) {
            const double z = standard_normal(rng);
            const bool online = fault_state.empty() || fault_state[t][j] == SensorState::online;
            out.values(t, j) = online ? observables.values(t, sensors[j]) + sigma1 * z : sigma0 * z;
        }
    }
    return out;
}

MeasurementWindow extract_window(const SensorSeries& series, std::size_t onset, std::size_t w) {
    if (w == 0) throw std::invalid_argument("extract_window: half-window must be >= 1");
    if (onset < w || onset + w > series.values.rows())
        throw std::out_of_range("onset " + std::to_string(onset) + " with half-window " + std::to_string(w) +
                                " does not fit in " + std::to_string(series.values.rows()) + " rows");
    return {series.values.slice_rows(onset - w, 2 * w), series.sensors, w};
}

}  // namespace driftloc
