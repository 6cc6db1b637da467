#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "chatter/ml/classifier.hpp"

namespace chatter::ml {

// Feature indices (0-based columns), most important first.
struct FeatureRanking {
    std::vector<std::size_t> order;
    std::vector<std::size_t> elimination_order; // removal sequence, first removed first
    int iterations = 0;
};

bool is_permutation_of_columns(const FeatureRanking& ranking, std::size_t n_features);

// Recursive feature elimination: refit on the surviving columns, drop the one
// with the smallest importance (ties drop the higher column), repeat until
// none remain. Exactly d fits.
FeatureRanking rfe_rank(const Matrix& x, std::span<const int> y, const ClassifierConfig& config);

struct NestedAccuracy {
    std::size_t k = 0; // number of top-ranked features used
    double train_accuracy = 0.0;
    double test_accuracy = 0.0;
};

// For k = 1..d, refit from scratch on the top-k ranked columns.
std::vector<NestedAccuracy> nested_feature_accuracies(const Matrix& x_train, std::span<const int> y_train,
                                                      const Matrix& x_test, std::span<const int> y_test,
                                                      const FeatureRanking& ranking,
                                                      const ClassifierConfig& config);

} // namespace chatter::ml
