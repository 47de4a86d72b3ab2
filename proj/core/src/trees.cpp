#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "driftloc/learners.hpp"

namespace driftloc {

namespace {

double gini(double n0, double n1) {
    const double n = n0 + n1;
    if (n <= 0.0) return 0.0;
    const double p0 = n0 / n, p1 = n1 / n;
    return 1.0 - p0 * p0 - p1 * p1;
}

struct SplitCandidate {
    bool valid = false;
    std::size_t feature = 0;
    double threshold = 0.0;
    double decrease = 0.0;  // unweighted: gini_node - weighted child gini
    std::uint64_t key = 0;
};

// Higher decrease wins; ties go to the smaller feature key so the choice does
// not depend on column order.
bool better(const SplitCandidate& a, const SplitCandidate& b) {
    if (!b.valid) return a.valid;
    if (!a.valid) return false;
    if (a.decrease != b.decrease) return a.decrease > b.decrease;
    return a.key < b.key;
}

class TreeBuilder {
public:
    TreeBuilder(const Matrix& X, std::span<const int> y, const TreeParams& params,
                std::span<const std::uint64_t> keys, double total)
        : X_(X), y_(y), params_(params), keys_(keys), total_(total) {}

    int build(std::vector<std::size_t>& rows, std::size_t depth, std::uint64_t node_seed) {
        double n1 = 0;
        for (auto r : rows) n1 += y_[r];
        const double n = static_cast<double>(rows.size());
        const double n0 = n - n1;

        const int index = static_cast<int>(tree_.nodes.size());
        tree_.nodes.push_back({});
        tree_.nodes[index].samples = rows.size();
        tree_.nodes[index].label = n1 > n0 ? 1 : 0;

        if (n0 == 0 || n1 == 0 || depth >= params_.max_depth || rows.size() < 2) return index;

        const double node_gini = gini(n0, n1);
        auto split = find_split(rows, node_seed, node_gini, n1);
        if (!split.valid) return index;

        std::vector<std::size_t> left, right;
        for (auto r : rows) (X_(r, split.feature) <= split.threshold ? left : right).push_back(r);
        rows.clear();
        rows.shrink_to_fit();

        auto& node = tree_.nodes[index];
        node.feature = static_cast<int>(split.feature);
        node.threshold = split.threshold;
        node.weighted_impurity_decrease = std::max(0.0, n / total_ * split.decrease);

        const int l = build(left, depth + 1, derive_seed(node_seed, 0));
        const int r = build(right, depth + 1, derive_seed(node_seed, 1));
        tree_.nodes[index].left = l;
        tree_.nodes[index].right = r;
        return index;
    }

    DecisionTree take() { return std::move(tree_); }

private:
    SplitCandidate find_split(const std::vector<std::size_t>& rows, std::uint64_t node_seed, double node_gini,
                              double n1) {
        const auto F = X_.cols();
        // Candidate order: per-node pseudo-random key of each feature's identity.
        std::vector<std::pair<std::uint64_t, std::size_t>> order(F);
        for (std::size_t f = 0; f < F; ++f) order[f] = {derive_seed(node_seed, keys_[f]), f};
        std::sort(order.begin(), order.end(), [&](const auto& a, const auto& b) {
            if (a.first != b.first) return a.first < b.first;
            return keys_[a.second] < keys_[b.second];
        });

        const std::size_t budget = params_.max_features == 0 ? F : std::min(params_.max_features, F);
        std::size_t examined = 0;
        SplitCandidate best;
        for (const auto& [_, f] : order) {
            if (examined >= budget) break;
            double lo = X_(rows.front(), f), hi = lo;
            for (auto r : rows) {
                lo = std::min(lo, X_(r, f));
                hi = std::max(hi, X_(r, f));
            }
            if (!(lo < hi)) continue;  // constant in this node
            ++examined;
            auto cand = params_.rule == SplitRule::best
                            ? best_threshold(rows, f, node_gini, n1)
                            : random_threshold(rows, f, node_gini, lo, hi, derive_seed(node_seed, keys_[f], 7));
            if (better(cand, best)) best = cand;
        }
        return best;
    }

    SplitCandidate best_threshold(const std::vector<std::size_t>& rows, std::size_t f, double node_gini,
                                  double n1_total) {
        buffer_.clear();
        for (auto r : rows) buffer_.emplace_back(X_(r, f), y_[r]);
        std::sort(buffer_.begin(), buffer_.end());
        const double n = static_cast<double>(buffer_.size());
        SplitCandidate best;
        double left1 = 0.0;
        for (std::size_t i = 0; i + 1 < buffer_.size(); ++i) {
            left1 += buffer_[i].second;
            if (!(buffer_[i].first < buffer_[i + 1].first)) continue;
            const double nl = static_cast<double>(i + 1), nr = n - nl;
            const double right1 = n1_total - left1;
            const double child = (nl * gini(nl - left1, left1) + nr * gini(nr - right1, right1)) / n;
            const double decrease = node_gini - child;
            if (!best.valid || decrease > best.decrease) {
                double t = 0.5 * (buffer_[i].first + buffer_[i + 1].first);
                if (!(t < buffer_[i + 1].first)) t = buffer_[i].first;
                best = {true, f, t, decrease, keys_[f]};
            }
        }
        return best;
    }

    SplitCandidate random_threshold(const std::vector<std::size_t>& rows, std::size_t f, double node_gini,
                                    double lo, double hi, std::uint64_t seed) {
        Rng rng(seed);
        const double t = std::uniform_real_distribution<double>(lo, hi)(rng);
        double nl = 0, l1 = 0, nr = 0, r1 = 0;
        for (auto r : rows) {
            if (X_(r, f) <= t) {
                ++nl;
                l1 += y_[r];
            } else {
                ++nr;
                r1 += y_[r];
            }
        }
        if (nl == 0 || nr == 0) return {};
        const double child = (nl * gini(nl - l1, l1) + nr * gini(nr - r1, r1)) / (nl + nr);
        return {true, f, t, node_gini - child, keys_[f]};
    }

    const Matrix& X_;
    std::span<const int> y_;
    const TreeParams& params_;
    std::span<const std::uint64_t> keys_;
    double total_;
    DecisionTree tree_;
    std::vector<std::pair<double, int>> buffer_;
};

std::vector<std::uint64_t> keys_for(const LabeledWindowDataset& d) {
    std::vector<std::uint64_t> keys(d.features());
    for (std::size_t f = 0; f < keys.size(); ++f)
        keys[f] = f < d.feature_ids.size() ? stable_hash(d.feature_ids[f]) : splitmix64(f);
    return keys;
}

}  // namespace

int DecisionTree::predict(std::span<const double> x) const {
    std::size_t i = 0;
    while (!nodes[i].is_leaf()) {
        const auto& n = nodes[i];
        i = static_cast<std::size_t>(x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right);
    }
    return nodes[i].label;
}

std::size_t DecisionTree::depth() const {
    std::vector<std::size_t> level(nodes.size(), 0);
    std::size_t deepest = 0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        deepest = std::max(deepest, level[i]);
        if (!nodes[i].is_leaf()) {
            level[static_cast<std::size_t>(nodes[i].left)] = level[i] + 1;
            level[static_cast<std::size_t>(nodes[i].right)] = level[i] + 1;
        }
    }
    return deepest;
}

DecisionTree fit_decision_tree(const Matrix& X, std::span<const int> y, std::span<const std::size_t> rows,
                               const TreeParams& params, std::span<const std::uint64_t> feature_keys,
                               std::uint64_t seed) {
    if (rows.empty()) throw std::invalid_argument("fit_decision_tree: no rows");
    if (feature_keys.size() != X.cols()) throw std::invalid_argument("fit_decision_tree: one key per feature required");
    TreeBuilder builder(X, y, params, feature_keys, static_cast<double>(rows.size()));
    std::vector<std::size_t> work(rows.begin(), rows.end());
    builder.build(work, 0, derive_seed(seed));
    return builder.take();
}

FittedModel fit_tree_ensemble(const LabeledWindowDataset& d, TreeEnsembleKind kind, std::size_t n_trees,
                              std::size_t max_depth, std::uint64_t seed) {
    validate(d);
    if (n_trees == 0) throw std::invalid_argument("fit_tree_ensemble: n_trees must be >= 1");
    const auto keys = keys_for(d);
    TreeParams params;
    params.rule = kind == TreeEnsembleKind::rf ? SplitRule::best : SplitRule::random_threshold;
    params.max_depth = max_depth;
    params.max_features = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::sqrt(static_cast<double>(d.features()))));

    TreeEnsemble ensemble;
    ensemble.n_features = d.features();
    std::vector<std::size_t> rows(d.size());
    for (std::size_t t = 0; t < n_trees; ++t) {
        const auto tree_seed = derive_seed(seed, t);
        if (kind == TreeEnsembleKind::rf) {
            Rng rng(derive_seed(tree_seed, 0xb007));
            std::uniform_int_distribution<std::size_t> pick(0, d.size() - 1);
            for (auto& r : rows) r = pick(rng);
        } else {
            std::iota(rows.begin(), rows.end(), std::size_t{0});
        }
        ensemble.trees.push_back(fit_decision_tree(d.X, d.y, rows, params, keys, tree_seed));
    }
    return {kind == TreeEnsembleKind::rf ? ModelFamily::random_forest : ModelFamily::extra_trees,
            std::move(ensemble), seed};
}

ImportanceVector impurity_importance(const FittedModel& model) {
    if (!model.is_tree())
        throw std::invalid_argument("impurity importance requires a tree ensemble, got " +
                                    std::string(to_string(model.family())));
    const auto& ens = model.trees();
    std::vector<double> total(ens.n_features, 0.0);
    for (const auto& tree : ens.trees)
        for (const auto& node : tree.nodes)
            if (!node.is_leaf()) total[static_cast<std::size_t>(node.feature)] += node.weighted_impurity_decrease;
    for (auto& v : total) v /= static_cast<double>(ens.trees.size());
    return ImportanceVector(std::move(total), true);
}

}  // namespace driftloc
