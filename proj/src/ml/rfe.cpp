#include "chatter/ml/rfe.hpp"

#include <algorithm>
#include <numeric>

#include "chatter/error.hpp"

namespace chatter::ml {

bool is_permutation_of_columns(const FeatureRanking& ranking, std::size_t n_features) {
    if (ranking.order.size() != n_features) return false;
    std::vector<bool> seen(n_features, false);
    for (auto c : ranking.order) {
        if (c >= n_features || seen[c]) return false;
        seen[c] = true;
    }
    return true;
}

FeatureRanking rfe_rank(const Matrix& x, std::span<const int> y, const ClassifierConfig& config) {
    require_two_classes(x, y);
    if (x.cols() == 0) throw DomainError("no features to rank");
    std::vector<std::size_t> alive(x.cols());
    std::iota(alive.begin(), alive.end(), 0);
    FeatureRanking ranking;
    while (!alive.empty()) {
        const auto model = fit_classifier(config, x.select_columns(alive), y);
        ++ranking.iterations;
        const auto imp = model.importances();
        std::size_t drop = 0;
        for (std::size_t i = 1; i < imp.size(); ++i)
            if (imp[i] <= imp[drop]) drop = i;
        ranking.elimination_order.push_back(alive[drop]);
        alive.erase(alive.begin() + static_cast<std::ptrdiff_t>(drop));
    }
    ranking.order.assign(ranking.elimination_order.rbegin(), ranking.elimination_order.rend());
    return ranking;
}

std::vector<NestedAccuracy> nested_feature_accuracies(const Matrix& x_train, std::span<const int> y_train,
                                                      const Matrix& x_test, std::span<const int> y_test,
                                                      const FeatureRanking& ranking,
                                                      const ClassifierConfig& config) {
    if (x_train.cols() != x_test.cols()) throw DomainError("train and test feature counts differ");
    if (!is_permutation_of_columns(ranking, x_train.cols())) throw DomainError("ranking is not a permutation");
    std::vector<NestedAccuracy> out;
    for (std::size_t k = 1; k <= ranking.order.size(); ++k) {
        const std::vector<std::size_t> cols(ranking.order.begin(), ranking.order.begin() + static_cast<std::ptrdiff_t>(k));
        const auto train = x_train.select_columns(cols);
        const auto model = fit_classifier(config, train, y_train);
        out.push_back({k, model.accuracy(train, y_train), model.accuracy(x_test.select_columns(cols), y_test)});
    }
    return out;
}

} // namespace chatter::ml
