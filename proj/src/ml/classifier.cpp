#include "chatter/ml/classifier.hpp"

#include <cmath>

#include "chatter/error.hpp"

namespace chatter::ml {

using nlohmann::json;

std::string_view to_string(ClassifierKind kind) {
    switch (kind) {
    case ClassifierKind::Svm: return "svm";
    case ClassifierKind::Logistic: return "logreg";
    case ClassifierKind::Forest: return "forest";
    case ClassifierKind::Boosting: return "boost";
    }
    return "svm";
}

std::optional<ClassifierKind> parse_classifier(std::string_view text) {
    if (text == "svm") return ClassifierKind::Svm;
    if (text == "logreg" || text == "logistic") return ClassifierKind::Logistic;
    if (text == "forest" || text == "rf") return ClassifierKind::Forest;
    if (text == "boost" || text == "boosting" || text == "gbdt") return ClassifierKind::Boosting;
    return std::nullopt;
}

Classifier::Classifier(ClassifierKind kind, std::optional<Standardizer> standardizer,
                       std::variant<LinearModel, TreeEnsembleModel> model)
    : kind_(kind), standardizer_(std::move(standardizer)), model_(std::move(model)) {}

std::size_t Classifier::n_features() const {
    if (const auto* lin = std::get_if<LinearModel>(&model_)) return lin->weights.size();
    return std::get<TreeEnsembleModel>(model_).n_features;
}

int Classifier::predict(std::span<const double> x) const {
    if (x.size() != n_features()) throw DomainError("feature count does not match the model");
    if (const auto* lin = std::get_if<LinearModel>(&model_)) {
        if (standardizer_) return lin->predict(standardizer_->apply(x));
        return lin->predict(x);
    }
    return std::get<TreeEnsembleModel>(model_).predict(x);
}

std::vector<int> Classifier::predict(const Matrix& x) const {
    std::vector<int> out;
    out.reserve(x.rows());
    for (std::size_t r = 0; r < x.rows(); ++r) out.push_back(predict(x.row(r)));
    return out;
}

double Classifier::accuracy(const Matrix& x, std::span<const int> y) const {
    if (x.rows() != y.size()) throw DomainError("labels must align with feature rows");
    if (x.rows() == 0) throw DomainError("cannot score an empty set");
    std::size_t correct = 0;
    for (std::size_t r = 0; r < x.rows(); ++r) correct += predict(x.row(r)) == y[r] ? 1 : 0;
    return static_cast<double>(correct) / static_cast<double>(x.rows());
}

std::vector<double> Classifier::importances() const {
    if (const auto* lin = std::get_if<LinearModel>(&model_)) {
        std::vector<double> out;
        for (double w : lin->weights) out.push_back(w * w);
        return out;
    }
    return std::get<TreeEnsembleModel>(model_).importances;
}

namespace {

json tree_to_json(const DecisionTree& tree) {
    json nodes = json::array();
    for (const auto& n : tree.nodes) nodes.push_back({n.feature, n.threshold, n.left, n.right, n.value});
    return nodes;
}

DecisionTree tree_from_json(const json& j, std::size_t n_features) {
    DecisionTree tree;
    for (const auto& n : j) {
        TreeNode node{n.at(0).get<int>(), n.at(1).get<double>(), n.at(2).get<int>(), n.at(3).get<int>(),
                      n.at(4).get<double>()};
        tree.nodes.push_back(node);
    }
    const int count = static_cast<int>(tree.nodes.size());
    if (count == 0) throw ValidationError("tree without nodes");
    for (const auto& node : tree.nodes) {
        if (node.feature < 0) continue;
        if (node.feature >= static_cast<int>(n_features) || node.left <= 0 || node.left >= count ||
            node.right <= 0 || node.right >= count)
            throw ValidationError("tree node references out of range");
    }
    return tree;
}

} // namespace

json Classifier::to_json() const {
    json j;
    j["format"] = kModelFormat;
    j["kind"] = to_string(kind_);
    if (standardizer_) j["standardizer"] = {{"mean", standardizer_->mean}, {"std", standardizer_->std_dev}};
    if (const auto* lin = std::get_if<LinearModel>(&model_)) {
        j["weights"] = lin->weights;
        j["intercept"] = lin->intercept;
    } else {
        const auto& m = std::get<TreeEnsembleModel>(model_);
        j["n_features"] = m.n_features;
        j["learning_rate"] = m.learning_rate;
        j["base_score"] = m.base_score;
        j["importances"] = m.importances;
        j["train_deviance"] = m.train_deviance;
        if (m.oob_accuracy) j["oob_accuracy"] = *m.oob_accuracy;
        json trees = json::array();
        for (const auto& t : m.trees) trees.push_back(tree_to_json(t));
        j["trees"] = std::move(trees);
    }
    return j;
}

Classifier Classifier::from_json(const json& j) {
    try {
        if (j.at("format").get<std::string>() != kModelFormat) throw ValidationError("unsupported model format");
        const auto kind = parse_classifier(j.at("kind").get<std::string>());
        if (!kind) throw ValidationError("unknown classifier kind");
        std::optional<Standardizer> standardizer;
        if (j.contains("standardizer")) {
            Standardizer s;
            s.mean = j["standardizer"].at("mean").get<std::vector<double>>();
            s.std_dev = j["standardizer"].at("std").get<std::vector<double>>();
            if (s.mean.size() != s.std_dev.size()) throw ValidationError("standardizer size mismatch");
            standardizer = std::move(s);
        }
        if (*kind == ClassifierKind::Svm || *kind == ClassifierKind::Logistic) {
            LinearModel lin;
            lin.kind = *kind == ClassifierKind::Svm ? LinearKind::Svm : LinearKind::Logistic;
            lin.weights = j.at("weights").get<std::vector<double>>();
            lin.intercept = j.at("intercept").get<double>();
            if (standardizer && standardizer->mean.size() != lin.weights.size())
                throw ValidationError("standardizer does not match the weights");
            return Classifier(*kind, std::move(standardizer), lin);
        }
        TreeEnsembleModel m;
        m.mode = *kind == ClassifierKind::Forest ? EnsembleMode::ForestVote : EnsembleMode::BoostedSum;
        m.n_features = j.at("n_features").get<std::size_t>();
        m.learning_rate = j.at("learning_rate").get<double>();
        m.base_score = j.at("base_score").get<double>();
        m.importances = j.at("importances").get<std::vector<double>>();
        m.train_deviance = j.value("train_deviance", std::vector<double>{});
        if (j.contains("oob_accuracy")) m.oob_accuracy = j["oob_accuracy"].get<double>();
        for (const auto& t : j.at("trees")) m.trees.push_back(tree_from_json(t, m.n_features));
        return Classifier(*kind, std::move(standardizer), std::move(m));
    } catch (const json::exception& e) {
        throw ValidationError(std::string("malformed model: ") + e.what());
    }
}

Classifier fit_classifier(const ClassifierConfig& config, const Matrix& x, std::span<const int> y) {
    require_two_classes(x, y);
    switch (config.kind) {
    case ClassifierKind::Svm:
    case ClassifierKind::Logistic: {
        std::optional<Standardizer> standardizer;
        Matrix z = x;
        if (config.standardize) {
            standardizer = fit_standardizer(x);
            z = standardizer->apply(x);
        }
        LinearModel model = config.kind == ClassifierKind::Svm ? train_svm(z, y, config.svm)
                                                               : train_logistic(z, y, config.logistic);
        return Classifier(config.kind, std::move(standardizer), std::move(model));
    }
    case ClassifierKind::Forest:
        return Classifier(config.kind, std::nullopt, train_forest(x, y, config.forest));
    case ClassifierKind::Boosting:
        return Classifier(config.kind, std::nullopt, train_boosting(x, y, config.boosting));
    }
    throw DomainError("unknown classifier kind");
}

} // namespace chatter::ml
