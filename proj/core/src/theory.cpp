#include "driftloc/theory.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "driftloc/rng.hpp"

namespace driftloc {

double BoundCheckReport::margin() const {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& c : checks) m = std::min(m, c.margin());
    return m;
}

bool BoundCheckReport::pass() const {
    return std::all_of(checks.begin(), checks.end(), [&](const BoundCheck& c) {
        return c.exact ? c.measured == c.bound : c.margin() >= -tolerance;
    });
}

double BoundCheckReport::worst_ratio() const {
    double r = 0.0;
    for (const auto& c : checks)
        if (c.bound > 0.0) r = std::max(r, c.measured / c.bound);
    return r;
}

namespace {

double l1(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
    return s;
}

double l1_norm(std::span<const double> a) {
    double s = 0.0;
    for (double x : a) s += std::abs(x);
    return s;
}

void require_contraction(const TransitionModel& model) {
    if (lipschitz_constants(model).state >= 1.0)
        throw std::invalid_argument("theory check requires a contractive model (C_s < 1)");
}

// Slack covering two fixpoint solves at residual tol.
double fixpoint_slack(const TransitionModel& model, double tol) {
    return 1e-12 + 2.0 * tol / (1.0 - lipschitz_constants(model).state);
}

}  // namespace

BoundCheckReport verify_fixpoint(const TransitionModel& model, std::span<const double> demand,
                                 std::span<const double> p0, std::span<const double> p0_other, std::size_t steps) {
    require_contraction(model);
    const auto n = model.node_count();
    if (demand.size() != n || p0.size() != n || p0_other.size() != n)
        throw std::invalid_argument("verify_fixpoint: dimension mismatch");
    const double cs = lipschitz_constants(model).state;
    const double initial = l1(p0, p0_other);

    BoundCheckReport report{"fixpoint", {}, 1e-12 * (1.0 + l1_norm(p0) + l1_norm(p0_other))};
    std::vector<double> p(p0.begin(), p0.end()), q(p0_other.begin(), p0_other.end()), next(n);
    for (std::size_t t = 1; t <= steps; ++t) {
        model.apply(p, demand, next);
        p.swap(next);
        model.apply(q, demand, next);
        q.swap(next);
        report.checks.push_back({"t=" + std::to_string(t), std::pow(cs, static_cast<double>(t)) * initial, l1(p, q)});
    }
    return report;
}

BoundCheckReport verify_hoelder(const TransitionModel& model, std::span<const double> demand_a,
                                std::span<const double> demand_b, double tol) {
    require_contraction(model);
    const auto [cs, cd] = lipschitz_constants(model);
    const auto pa = steady_state(model, demand_a, tol);
    const auto pb = steady_state(model, demand_b, tol);
    const double bound = cd / (1.0 - cs) * std::pow(l1(demand_a, demand_b), model.demand_exponent());
    return {"hoelder", {{"pair", bound, l1(pa, pb)}}, fixpoint_slack(model, tol)};
}

BoundCheckReport verify_stochastic_mean(const TransitionModel& model, const Matrix& samples, double tol) {
    require_contraction(model);
    const auto n = model.node_count();
    if (samples.cols() != n || samples.rows() == 0)
        throw std::invalid_argument("verify_stochastic_mean: need samples x nodes demand draws");
    const double count = static_cast<double>(samples.rows());

    std::vector<double> mean(n, 0.0), sd(n, 0.0);
    for (std::size_t r = 0; r < samples.rows(); ++r)
        for (std::size_t v = 0; v < n; ++v) mean[v] += samples(r, v);
    for (auto& m : mean) m /= count;
    for (std::size_t r = 0; r < samples.rows(); ++r)
        for (std::size_t v = 0; v < n; ++v) sd[v] += (samples(r, v) - mean[v]) * (samples(r, v) - mean[v]);
    for (auto& s : sd) s = std::sqrt(s / count);

    const auto reference = steady_state(model, mean, tol);
    double sum = 0.0, sum2 = 0.0;
    for (std::size_t r = 0; r < samples.rows(); ++r) {
        const double d = l1(steady_state(model, samples.row(r), tol), reference);
        sum += d;
        sum2 += d * d;
    }
    const double measured = sum / count;
    const double var = std::max(0.0, sum2 / count - measured * measured);
    const double standard_error = std::sqrt(var / count);

    const auto [cs, cd] = lipschitz_constants(model);
    const double bound =
        cd / (1.0 - cs) * std::pow(std::accumulate(sd.begin(), sd.end(), 0.0), model.demand_exponent());
    return {"stochastic_mean", {{"mean", bound, measured}}, 3.0 * standard_error + fixpoint_slack(model, tol)};
}

BoundCheckReport verify_stochastic_mean(const TransitionModel& model, const DemandModel& demand_model,
                                        std::size_t samples, std::uint64_t seed, double tol) {
    return verify_stochastic_mean(model, sample_demands(demand_model, model.node_count(), samples, seed), tol);
}

double decay_bound(const TransitionModel& model, double magnitude, Hops hops) {
    if (!hops.is_finite()) return 0.0;
    const auto [cs, cd] = lipschitz_constants(model);
    const double rate = cs * static_cast<double>(model.graph_max_degree() + 1);
    return cd * std::pow(magnitude, model.demand_exponent()) * std::pow(rate, static_cast<double>(hops.value())) /
           (1.0 - rate);
}

DecayReport verify_decay(const TransitionModel& model, const NetworkGraph& g, std::size_t node, double magnitude,
                         std::span<const double> demand, double tol) {
    if (!satisfies_decay_hypothesis(model))
        throw std::invalid_argument("verify_decay: hypothesis C_s < 1/(deg G + 1) violated");
    const auto n = model.node_count();
    if (g.node_count() != n || demand.size() != n) throw std::invalid_argument("verify_decay: dimension mismatch");
    if (node >= n) throw std::out_of_range("verify_decay: node index out of range");

    std::vector<double> anomalous(demand.begin(), demand.end());
    anomalous[node] += magnitude;

    // Both fixpoints advance in lockstep so unaffected components stay bit-identical.
    std::vector<double> p(model.base_levels().begin(), model.base_levels().end()), q = p, next(n);
    for (std::size_t it = 0;; ++it) {
        if (it > 10'000'000) throw std::runtime_error("verify_decay: fixpoint iteration did not converge");
        model.apply(p, demand, next);
        const double rp = l1(p, next);
        p.swap(next);
        model.apply(q, anomalous, next);
        const double rq = l1(q, next);
        q.swap(next);
        if (rp <= tol && rq <= tol) break;
    }

    DecayReport out;
    out.report.quantity = "decay";
    out.report.tolerance = fixpoint_slack(model, tol);
    out.hops = hops_from(g, node);
    std::map<std::size_t, std::vector<double>> shells;
    for (std::size_t w = 0; w < n; ++w) {
        const double delta = std::abs(p[w] - q[w]);
        const auto h = out.hops[w];
        out.report.checks.push_back({g.id(w), decay_bound(model, magnitude, h), delta, !h.is_finite()});
        if (h.is_finite()) shells[h.value()].push_back(delta);
    }
    for (auto& [h, values] : shells) {
        std::sort(values.begin(), values.end());
        const auto mid = values.size() / 2;
        out.shell_median.push_back(values.size() % 2 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]));
    }
    for (std::size_t i = 1; i < out.shell_median.size(); ++i)
        if (out.shell_median[i] > out.shell_median[i - 1] + out.report.tolerance) out.monotone = false;
    return out;
}

NecessityReport necessity_example(std::size_t n, double c_s) {
    if (n == 0) throw std::invalid_argument("necessity_example: n must be >= 1");
    if (!(c_s > 0.0)) throw std::invalid_argument("necessity_example: c_s must be positive");
    // Indices: 0 = v, 1 = w, 2.. = u_i.
    const std::size_t size = n + 2;
    std::vector<std::pair<NodeId, Point>> positions{{"v", {0, 0}}, {"w", {2, 0}}};
    std::vector<std::pair<NodeId, NodeId>> edges;
    for (std::size_t i = 1; i <= n; ++i) {
        auto id = "u" + std::to_string(i);
        positions.emplace_back(id, Point{1, static_cast<double>(i)});
        edges.emplace_back("v", id);
        edges.emplace_back("w", id);
    }
    const auto g = build_graph(edges, positions, {});

    auto transition = [&](std::span<const double> p, std::span<const double> d, std::span<double> out) {
        out[0] = d[0];
        double sum_u = 0.0;
        for (std::size_t i = 2; i < size; ++i) {
            out[i] = c_s * p[0];
            sum_u += p[i];
        }
        out[1] = c_s * sum_u;
    };
    auto fixpoint = [&](std::span<const double> d) {
        std::vector<double> p(size, 0.0), next(size);
        // The map is nilpotent up to the demand term: three sweeps reach the fixpoint.
        for (int it = 0; it < 3; ++it) {
            transition(p, d, next);
            p.swap(next);
        }
        return p;
    };

    const double leak = 1.0;
    std::vector<double> base(size, 0.0), leaky(size, 0.0);
    base[0] = 1.0;
    leaky[0] = 1.0 + leak;
    const auto a = fixpoint(base);
    const auto b = fixpoint(leaky);

    NecessityReport r;
    r.n = n;
    r.c_s = c_s;
    r.max_degree = max_degree(g);
    r.delta_w = std::abs(a[1] - b[1]);
    r.delta_u = std::abs(a[2] - b[2]);
    r.ratio = r.delta_w / r.delta_u;
    r.expected = static_cast<double>(n) * c_s;
    return r;
}

TheorySuite parse_theory_suite(const std::string& name) {
    if (name == "fixpoint") return TheorySuite::fixpoint;
    if (name == "hoelder") return TheorySuite::hoelder;
    if (name == "mean") return TheorySuite::mean;
    if (name == "decay") return TheorySuite::decay;
    if (name == "necessity") return TheorySuite::necessity;
    if (name == "all") return TheorySuite::all;
    throw std::invalid_argument("unknown theory suite '" + name + "'");
}

namespace {

struct Instance {
    NetworkGraph graph;
    Rng rng;
};

Instance make_instance(const TheorySweepConfig& cfg, std::uint64_t seed, std::size_t i) {
    Rng rng(derive_seed(seed, i));
    const auto nodes = std::uniform_int_distribution<std::size_t>(10, std::max<std::size_t>(10, cfg.max_nodes))(rng);
    const double radius = std::uniform_real_distribution<double>(0.2, 0.45)(rng);
    auto graph = random_geometric_graph(nodes, radius, 0, derive_seed(seed, i, 1));
    return {std::move(graph), std::move(rng)};
}

std::vector<double> random_demand(std::size_t n, Rng& rng) {
    std::uniform_real_distribution<double> u(0.0, 2.0);
    std::vector<double> d(n);
    for (auto& x : d) x = u(rng);
    return d;
}

double random_alpha(Rng& rng) {
    // Half the instances exercise the Hoelder (alpha < 1) branch.
    return std::bernoulli_distribution(0.5)(rng) ? 1.0 : std::uniform_real_distribution<double>(0.5, 1.0)(rng);
}

void record(TheorySuiteResult& res, const BoundCheckReport& report) {
    res.checks += report.checks.size();
    if (!report.pass()) ++res.failures;
    res.worst_margin = std::min(res.worst_margin, report.margin());
    res.worst_ratio = std::max(res.worst_ratio, report.worst_ratio());
}

TheorySuiteResult start(const std::string& name) {
    return {name, 0, 0, std::numeric_limits<double>::infinity(), 0.0};
}

}  // namespace

std::vector<TheorySuiteResult> run_theory_suite(TheorySuite suite, const TheorySweepConfig& cfg, std::uint64_t seed) {
    std::vector<TheorySuiteResult> results;
    const auto wants = [&](TheorySuite s) { return suite == TheorySuite::all || suite == s; };

    if (wants(TheorySuite::fixpoint)) {
        auto res = start("fixpoint");
        for (std::size_t i = 0; i < cfg.instances; ++i) {
            auto inst = make_instance(cfg, derive_seed(seed, 11), i);
            DynamicsParams params;
            params.demand_exponent = random_alpha(inst.rng);
            const auto model = TransitionModel::uniform(inst.graph, params);
            const auto n = model.node_count();
            std::vector<double> p0(n), q0(n);
            std::uniform_real_distribution<double> u(0.0, 200.0);
            for (std::size_t v = 0; v < n; ++v) {
                p0[v] = u(inst.rng);
                q0[v] = u(inst.rng);
            }
            record(res, verify_fixpoint(model, random_demand(n, inst.rng), p0, q0, cfg.fixpoint_steps));
        }
        results.push_back(res);
    }
    if (wants(TheorySuite::hoelder)) {
        auto res = start("hoelder");
        for (std::size_t i = 0; i < cfg.instances; ++i) {
            auto inst = make_instance(cfg, derive_seed(seed, 12), i);
            DynamicsParams params;
            params.demand_exponent = random_alpha(inst.rng);
            const auto model = TransitionModel::uniform(inst.graph, params);
            for (std::size_t k = 0; k < cfg.hoelder_pairs; ++k)
                record(res, verify_hoelder(model, random_demand(model.node_count(), inst.rng),
                                           random_demand(model.node_count(), inst.rng), 1e-10));
        }
        results.push_back(res);
    }
    if (wants(TheorySuite::mean)) {
        auto res = start("stochastic_mean");
        for (std::size_t i = 0; i < cfg.instances; ++i) {
            auto inst = make_instance(cfg, derive_seed(seed, 13), i);
            DynamicsParams params;
            params.demand_exponent = random_alpha(inst.rng);
            const auto model = TransitionModel::uniform(inst.graph, params);
            const auto demand = DemandModel::uniform(model.node_count(), 1.0, sinusoidal_profile(144, 0.3), 0.9,
                                                     0.05, 0.1);
            record(res, verify_stochastic_mean(model, demand, cfg.mean_samples, derive_seed(seed, 13, i), 1e-10));
        }
        results.push_back(res);
    }
    if (wants(TheorySuite::decay)) {
        auto res = start("decay");
        for (std::size_t i = 0; i < cfg.instances; ++i) {
            auto inst = make_instance(cfg, derive_seed(seed, 14), i);
            DynamicsParams params;
            params.mode = DynamicsMode::theorem;
            params.demand_exponent = random_alpha(inst.rng);
            const auto model = TransitionModel::uniform(inst.graph, params);
            const auto node =
                std::uniform_int_distribution<std::size_t>(0, inst.graph.node_count() - 1)(inst.rng);
            const auto demand = random_demand(model.node_count(), inst.rng);
            for (double a : cfg.decay_magnitudes) {
                auto decay = verify_decay(model, inst.graph, node, a, demand, 1e-10);
                record(res, decay.report);
                if (!decay.monotone) ++res.failures;
            }
        }
        results.push_back(res);
    }
    if (wants(TheorySuite::necessity)) {
        auto res = start("necessity");
        for (std::size_t n = 1; n <= cfg.necessity_max_n; ++n) {
            const auto r = necessity_example(n, cfg.necessity_c_s);
            ++res.checks;
            const double err = std::abs(r.ratio - r.expected);
            if (err > 1e-12) ++res.failures;
            res.worst_margin = std::min(res.worst_margin, -err);
            res.worst_ratio = std::max(res.worst_ratio, r.ratio);
        }
        results.push_back(res);
    }
    return results;
}

nlohmann::json to_json(const std::vector<TheorySuiteResult>& results) {
    nlohmann::json j{{"pass", true}, {"suites", nlohmann::json::array()}};
    for (const auto& r : results) {
        j["suites"].push_back({{"suite", r.suite},
                               {"checks", r.checks},
                               {"failures", r.failures},
                               {"worst_margin", r.worst_margin},
                               {"worst_ratio", r.worst_ratio},
                               {"pass", r.pass()}});
        if (!r.pass()) j["pass"] = false;
    }
    return j;
}

}  // namespace driftloc
