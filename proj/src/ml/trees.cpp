#include "chatter/ml/trees.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <random>

#include "chatter/error.hpp"
#include "chatter/ml/linear.hpp"
#include "chatter/random.hpp"

namespace chatter::ml {

double DecisionTree::evaluate(std::span<const double> x) const {
    int i = 0;
    while (nodes[static_cast<std::size_t>(i)].feature >= 0) {
        const auto& n = nodes[static_cast<std::size_t>(i)];
        i = x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
    }
    return nodes[static_cast<std::size_t>(i)].value;
}

int DecisionTree::depth() const {
    std::function<int(int)> rec = [&](int i) -> int {
        const auto& n = nodes[static_cast<std::size_t>(i)];
        if (n.feature < 0) return 0;
        return 1 + std::max(rec(n.left), rec(n.right));
    };
    return nodes.empty() ? 0 : rec(0);
}

int TreeEnsembleModel::votes(std::span<const double> x) const {
    int v = 0;
    for (const auto& t : trees) v += t.evaluate(x) > 0.5 ? 1 : 0;
    return v;
}

double TreeEnsembleModel::score(std::span<const double> x, std::optional<std::size_t> stages) const {
    const std::size_t count = std::min(trees.size(), stages.value_or(trees.size()));
    double s = base_score;
    for (std::size_t i = 0; i < count; ++i) s += trees[i].evaluate(x);
    return s;
}

int TreeEnsembleModel::predict(std::span<const double> x) const {
    if (x.size() != n_features) throw DomainError("feature count does not match the model");
    if (mode == EnsembleMode::BoostedSum) return score(x) > 0.0 ? 1 : 0;
    const int v = votes(x);
    const int total = static_cast<int>(trees.size());
    if (2 * v != total) return 2 * v > total ? 1 : 0;
    double p = 0.0;
    for (const auto& t : trees) p += t.evaluate(x);
    return p > 0.5 * total ? 1 : 0;
}

namespace {

enum class Criterion { Gini, SquaredError };

// Greedy depth-limited CART over weighted rows. Columns are presorted once per fit.
class TreeBuilder {
public:
    TreeBuilder(const Matrix& x, const std::vector<std::vector<std::size_t>>& sorted, Criterion criterion)
        : x_(x), sorted_(sorted), criterion_(criterion), node_of_(x.rows(), -1) {}

    // target: class (0/1) for Gini, residual for squared error. weight 0 excludes a row.
    DecisionTree build(std::span<const double> target, std::span<const double> weight, int max_depth,
                       std::size_t features_per_split, std::mt19937_64* rng, std::vector<double>& importances) {
        target_ = target;
        weight_ = weight;
        max_depth_ = max_depth;
        mtry_ = std::min(features_per_split, x_.cols());
        rng_ = rng;
        importances_ = &importances;
        tree_ = {};
        leaf_members_.clear();
        root_weight_ = 0.0;
        std::vector<std::size_t> members;
        for (std::size_t r = 0; r < x_.rows(); ++r) {
            if (weight_[r] > 0.0) {
                members.push_back(r);
                root_weight_ += weight_[r];
            }
        }
        grow(members, 0);
        return std::move(tree_);
    }

    // Rows (with positive weight) of each leaf, by node index.
    const std::vector<std::vector<std::size_t>>& leaf_members() const { return leaf_members_; }

private:
    struct Stats {
        double w = 0.0, s = 0.0, s2 = 0.0; // weight, sum of w*t, sum of w*t^2
        void add(double wt, double t) {
            w += wt;
            s += wt * t;
            s2 += wt * t * t;
        }
        // Weighted impurity (Gini: w * gini; squared error: SSE).
        double impurity(Criterion c) const {
            if (w <= 0.0) return 0.0;
            if (c == Criterion::Gini) {
                const double p1 = s / w;
                return w * 2.0 * p1 * (1.0 - p1);
            }
            return std::max(0.0, s2 - s * s / w);
        }
    };

    Stats stats_of(const std::vector<std::size_t>& members) const {
        Stats st;
        for (auto r : members) st.add(weight_[r], target_[r]);
        return st;
    }

    int grow(const std::vector<std::size_t>& members, int depth) {
        const int id = static_cast<int>(tree_.nodes.size());
        tree_.nodes.push_back({});
        if (leaf_members_.size() < tree_.nodes.size()) leaf_members_.resize(tree_.nodes.size());
        const Stats parent = stats_of(members);
        tree_.nodes[static_cast<std::size_t>(id)].value = parent.w > 0.0 ? parent.s / parent.w : 0.0;
        const double parent_impurity = parent.impurity(criterion_);

        if (depth >= max_depth_ || members.size() < 2 || parent_impurity <= 1e-14 * parent.w) {
            leaf_members_[static_cast<std::size_t>(id)] = members;
            return id;
        }

        for (auto r : members) node_of_[r] = id;
        double best_gain = 0.0;
        int best_feature = -1;
        double best_threshold = 0.0;
        for (auto f : candidate_features()) {
            Stats left;
            const auto& order = sorted_[f];
            std::size_t prev = x_.rows();
            for (auto r : order) {
                if (node_of_[r] != id) continue;
                if (prev != x_.rows() && x_(r, f) > x_(prev, f)) {
                    Stats right{parent.w - left.w, parent.s - left.s, parent.s2 - left.s2};
                    const double gain = parent_impurity - left.impurity(criterion_) - right.impurity(criterion_);
                    if (gain > best_gain + 1e-12 * parent_impurity) {
                        best_gain = gain;
                        best_feature = static_cast<int>(f);
                        const double a = x_(prev, f), b = x_(r, f);
                        double mid = a + 0.5 * (b - a);
                        if (!(mid < b)) mid = a;
                        best_threshold = mid;
                    }
                }
                left.add(weight_[r], target_[r]);
                prev = r;
            }
        }
        for (auto r : members) node_of_[r] = -1;

        if (best_feature < 0) {
            leaf_members_[static_cast<std::size_t>(id)] = members;
            return id;
        }
        (*importances_)[static_cast<std::size_t>(best_feature)] += best_gain / root_weight_;
        std::vector<std::size_t> lm, rm;
        for (auto r : members)
            (x_(r, static_cast<std::size_t>(best_feature)) <= best_threshold ? lm : rm).push_back(r);
        const int l = grow(lm, depth + 1);
        const int rr = grow(rm, depth + 1);
        auto& node = tree_.nodes[static_cast<std::size_t>(id)];
        node.feature = best_feature;
        node.threshold = best_threshold;
        node.left = l;
        node.right = rr;
        return id;
    }

    std::vector<std::size_t> candidate_features() {
        std::vector<std::size_t> all(x_.cols());
        std::iota(all.begin(), all.end(), 0);
        if (mtry_ >= all.size() || rng_ == nullptr) return all;
        for (std::size_t i = 0; i < mtry_; ++i) {
            std::uniform_int_distribution<std::size_t> pick(i, all.size() - 1);
            std::swap(all[i], all[pick(*rng_)]);
        }
        all.resize(mtry_);
        std::sort(all.begin(), all.end());
        return all;
    }

    const Matrix& x_;
    const std::vector<std::vector<std::size_t>>& sorted_;
    Criterion criterion_;
    std::vector<int> node_of_;
    std::span<const double> target_;
    std::span<const double> weight_;
    int max_depth_ = 0;
    std::size_t mtry_ = 0;
    std::mt19937_64* rng_ = nullptr;
    std::vector<double>* importances_ = nullptr;
    double root_weight_ = 0.0;
    DecisionTree tree_;
    std::vector<std::vector<std::size_t>> leaf_members_;
};

std::vector<std::vector<std::size_t>> presort(const Matrix& x) {
    std::vector<std::vector<std::size_t>> sorted(x.cols());
    for (std::size_t f = 0; f < x.cols(); ++f) {
        auto& idx = sorted[f];
        idx.resize(x.rows());
        std::iota(idx.begin(), idx.end(), 0);
        std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return x(a, f) < x(b, f); });
    }
    return sorted;
}

double softplus(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

double deviance_term(double score, int y) { return softplus(score) - (y == 1 ? score : 0.0); }

} // namespace

double binomial_deviance(std::span<const double> scores, std::span<const int> y) {
    double d = 0.0;
    for (std::size_t i = 0; i < scores.size(); ++i) d += deviance_term(scores[i], y[i]);
    return 2.0 * d / static_cast<double>(scores.size());
}

TreeEnsembleModel train_forest(const Matrix& x, std::span<const int> y, const ForestParams& params) {
    require_two_classes(x, y);
    if (params.n_trees < 1 || params.max_depth < 1) throw DomainError("forest needs trees of depth >= 1");
    const std::size_t n = x.rows();
    const auto sorted = presort(x);
    std::vector<double> target(n);
    for (std::size_t i = 0; i < n; ++i) target[i] = y[i];
    const auto mtry = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(x.cols())))));

    TreeEnsembleModel model;
    model.mode = EnsembleMode::ForestVote;
    model.n_features = x.cols();
    model.importances.assign(x.cols(), 0.0);
    std::vector<int> oob_votes(n, 0), oob_trees(n, 0);
    TreeBuilder builder(x, sorted, Criterion::Gini);
    for (int t = 0; t < params.n_trees; ++t) {
        auto rng = make_rng(params.seed, static_cast<std::uint64_t>(t));
        std::vector<double> counts(n, 0.0);
        std::uniform_int_distribution<std::size_t> draw(0, n - 1);
        for (std::size_t i = 0; i < n; ++i) counts[draw(rng)] += 1.0;
        auto tree = builder.build(target, counts, params.max_depth, mtry, &rng, model.importances);
        for (std::size_t i = 0; i < n; ++i) {
            if (counts[i] > 0.0) continue;
            ++oob_trees[i];
            oob_votes[i] += tree.evaluate(x.row(i)) > 0.5 ? 1 : 0;
        }
        model.trees.push_back(std::move(tree));
    }
    std::size_t scored = 0, correct = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (oob_trees[i] == 0) continue;
        ++scored;
        const int pred = 2 * oob_votes[i] > oob_trees[i] ? 1 : 0;
        correct += pred == y[i] ? 1 : 0;
    }
    if (scored > 0) model.oob_accuracy = static_cast<double>(correct) / static_cast<double>(scored);
    return model;
}

TreeEnsembleModel train_boosting(const Matrix& x, std::span<const int> y, const BoostingParams& params) {
    require_two_classes(x, y);
    if (params.n_stages < 0 || params.tree_depth < 1 || !(params.learning_rate > 0.0) ||
        !(params.subsample > 0.0 && params.subsample <= 1.0))
        throw DomainError("invalid boosting parameters");
    const std::size_t n = x.rows();
    const auto sorted = presort(x);

    double positives = 0.0;
    for (int v : y) positives += v;
    const double prior = positives / static_cast<double>(n);

    TreeEnsembleModel model;
    model.mode = EnsembleMode::BoostedSum;
    model.n_features = x.cols();
    model.learning_rate = params.learning_rate;
    model.base_score = std::log(prior / (1.0 - prior));
    model.importances.assign(x.cols(), 0.0);

    std::vector<double> score(n, model.base_score), residual(n), weight(n, 1.0);
    model.train_deviance.push_back(binomial_deviance(score, y));
    auto rng = make_rng(params.seed, 0);
    TreeBuilder builder(x, sorted, Criterion::SquaredError);
    const auto sample_size = static_cast<std::size_t>(std::llround(params.subsample * static_cast<double>(n)));

    for (int stage = 0; stage < params.n_stages; ++stage) {
        for (std::size_t i = 0; i < n; ++i) residual[i] = y[i] - sigmoid(score[i]);
        if (sample_size < n) {
            std::vector<std::size_t> idx(n);
            std::iota(idx.begin(), idx.end(), 0);
            std::shuffle(idx.begin(), idx.end(), rng);
            std::fill(weight.begin(), weight.end(), 0.0);
            for (std::size_t k = 0; k < std::max<std::size_t>(sample_size, 1); ++k) weight[idx[k]] = 1.0;
        }
        auto tree = builder.build(residual, weight, params.tree_depth, x.cols(), nullptr, model.importances);

        // Route every training row to its leaf.
        std::vector<std::vector<std::size_t>> routed(tree.nodes.size());
        for (std::size_t i = 0; i < n; ++i) {
            int node = 0;
            while (tree.nodes[static_cast<std::size_t>(node)].feature >= 0) {
                const auto& nd = tree.nodes[static_cast<std::size_t>(node)];
                node = x(i, static_cast<std::size_t>(nd.feature)) <= nd.threshold ? nd.left : nd.right;
            }
            routed[static_cast<std::size_t>(node)].push_back(i);
        }
        const auto& fitted = builder.leaf_members();
        for (std::size_t leaf = 0; leaf < tree.nodes.size(); ++leaf) {
            auto& node = tree.nodes[leaf];
            if (node.feature >= 0) continue;
            double num = 0.0, den = 0.0;
            for (auto i : fitted[leaf]) {
                const double p = sigmoid(score[i]);
                num += residual[i];
                den += p * (1.0 - p);
            }
            double step = params.learning_rate * (den > 1e-12 ? num / den : 0.0);
            // Halve until the leaf's deviance does not increase.
            auto leaf_loss = [&](double delta) {
                double l = 0.0;
                for (auto i : routed[leaf]) l += deviance_term(score[i] + delta, y[i]);
                return l;
            };
            const double base = leaf_loss(0.0);
            int halvings = 0;
            while (step != 0.0 && leaf_loss(step) > base) {
                step *= 0.5;
                if (++halvings > 60) step = 0.0;
            }
            node.value = step;
        }
        for (std::size_t i = 0; i < n; ++i) score[i] += tree.evaluate(x.row(i));
        model.trees.push_back(std::move(tree));
        model.train_deviance.push_back(binomial_deviance(score, y));
    }
    return model;
}

} // namespace chatter::ml
