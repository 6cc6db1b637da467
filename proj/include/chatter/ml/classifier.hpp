#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "chatter/ml/linear.hpp"
#include "chatter/ml/standardizer.hpp"
#include "chatter/ml/trees.hpp"

namespace chatter::ml {

enum class ClassifierKind { Svm, Logistic, Forest, Boosting };

std::string_view to_string(ClassifierKind kind);
// svm | logreg | forest | boost (also accepts logistic / boosting)
std::optional<ClassifierKind> parse_classifier(std::string_view text);

struct ClassifierConfig {
    ClassifierKind kind = ClassifierKind::Svm;
    SvmParams svm;
    LogisticParams logistic;
    ForestParams forest;
    BoostingParams boosting;
    // z-score inputs for the linear kinds; trees always see raw features
    bool standardize = true;
};

// A trained model plus the standardizer fit on its own training data.
class Classifier {
public:
    Classifier() = default;
    Classifier(ClassifierKind kind, std::optional<Standardizer> standardizer,
               std::variant<LinearModel, TreeEnsembleModel> model);

    ClassifierKind kind() const { return kind_; }
    std::size_t n_features() const;
    const std::optional<Standardizer>& standardizer() const { return standardizer_; }
    const std::variant<LinearModel, TreeEnsembleModel>& model() const { return model_; }

    int predict(std::span<const double> x) const;
    std::vector<int> predict(const Matrix& x) const;
    double accuracy(const Matrix& x, std::span<const int> y) const;

    // Linear: w_j^2 (standardized space). Trees: total impurity decrease.
    std::vector<double> importances() const;

    nlohmann::json to_json() const;
    static Classifier from_json(const nlohmann::json& j);

private:
    ClassifierKind kind_ = ClassifierKind::Svm;
    std::optional<Standardizer> standardizer_;
    std::variant<LinearModel, TreeEnsembleModel> model_;
};

inline constexpr std::string_view kModelFormat = "chatter-model/1";

Classifier fit_classifier(const ClassifierConfig& config, const Matrix& x, std::span<const int> y);

} // namespace chatter::ml
