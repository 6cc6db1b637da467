#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "chatter/types.hpp"

namespace chatter::ml {

struct TreeNode {
    int feature = -1; // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;    // x[feature] <= threshold
    int right = -1;
    double value = 0.0; // leaf: class-1 fraction (forest) or additive score (boosting)
};

struct DecisionTree {
    std::vector<TreeNode> nodes;

    double evaluate(std::span<const double> x) const;
    int depth() const;
};

enum class EnsembleMode { ForestVote, BoostedSum };

struct TreeEnsembleModel {
    EnsembleMode mode = EnsembleMode::ForestVote;
    std::vector<DecisionTree> trees;
    double learning_rate = 0.0; // boosting only
    double base_score = 0.0;    // boosting only: initial log-odds
    std::size_t n_features = 0;
    std::vector<double> importances; // total impurity decrease per feature
    std::vector<double> train_deviance; // boosting: after 0..n_stages stages
    std::optional<double> oob_accuracy; // forest only

    // Number of trees voting for class 1 (forest).
    int votes(std::span<const double> x) const;
    // Summed score incl. base log-odds (boosting). `stages` limits the trees used.
    double score(std::span<const double> x, std::optional<std::size_t> stages = std::nullopt) const;
    int predict(std::span<const double> x) const;
};

struct ForestParams {
    int n_trees = 100;
    int max_depth = 2;
    std::uint64_t seed = 0;
};

// Bootstrap-resampled Gini trees with floor(sqrt(d)) candidate features per split,
// majority vote. Tree t draws from a stream seeded by (seed, t).
TreeEnsembleModel train_forest(const Matrix& x, std::span<const int> y, const ForestParams& params = {});

struct BoostingParams {
    int n_stages = 100;
    double learning_rate = 0.1;
    int tree_depth = 3;
    double subsample = 1.0; // fraction of rows per stage, drawn with the seed
    std::uint64_t seed = 0;
};

// Binomial-deviance gradient boosting with regression trees fit to the residual
// y - p. Leaf values are safeguarded Newton steps, so training deviance never
// increases from one stage to the next.
TreeEnsembleModel train_boosting(const Matrix& x, std::span<const int> y, const BoostingParams& params = {});

double binomial_deviance(std::span<const double> scores, std::span<const int> y);

} // namespace chatter::ml
