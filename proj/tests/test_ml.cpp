#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "chatter/error.hpp"
#include "chatter/ml/classifier.hpp"
#include "chatter/ml/rfe.hpp"
#include "oracle.hpp"

using namespace chatter;
using namespace chatter::ml;

namespace {

Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows) {
    Matrix m;
    for (auto r : rows) m.append_row(std::vector<double>(r));
    return m;
}

// 1-D step: x < 0 -> 0, x >= 0 -> 1.
void step_data(std::size_t n, std::uint64_t seed, Matrix& x, std::vector<int>& y) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    x = Matrix();
    y.clear();
    for (std::size_t i = 0; i < n; ++i) {
        const double v = u(rng);
        x.append_row(std::vector<double>{v});
        y.push_back(v >= 0.0 ? 1 : 0);
    }
}

// Two gaussian blobs around (+-2, +-2).
void blobs(std::size_t n, std::uint64_t seed, Matrix& x, std::vector<int>& y, double sep = 2.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 0.5);
    x = Matrix();
    y.clear();
    for (std::size_t i = 0; i < n; ++i) {
        const int c = static_cast<int>(i % 2);
        const double s = c == 1 ? sep : -sep;
        x.append_row(std::vector<double>{s + g(rng), s + g(rng)});
        y.push_back(c);
    }
}

std::vector<std::vector<double>> grid() {
    std::vector<std::vector<double>> out;
    for (double a = -3.0; a <= 3.0; a += 0.25)
        for (double b = -3.0; b <= 3.0; b += 0.25) out.push_back({a, b});
    return out;
}

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

} // namespace

TEST_CASE("standardizer examples") {
    const auto x = from_rows({{1.0, 5.0}, {2.0, 5.0}, {3.0, 5.0}});
    const auto s = fit_standardizer(x);
    const auto z = s.apply(x);
    CHECK(z(0, 0) == doctest::Approx(-1.2247).epsilon(1e-4));
    CHECK(std::abs(z(1, 0)) < 1e-12);
    CHECK(z(2, 0) == doctest::Approx(1.2247).epsilon(1e-4));
    for (std::size_t r = 0; r < 3; ++r) CHECK(z(r, 1) == 0.0);
    const auto unseen = s.apply(std::vector<double>{4.0, 9.0});
    CHECK(unseen[0] == doctest::Approx((4.0 - 2.0) / std::sqrt(2.0 / 3.0)));
    CHECK(unseen[0] == doctest::Approx(2.449).epsilon(1e-3));
    CHECK(unseen[1] == 0.0);
}

TEST_CASE("standardized training columns have zero mean and unit population std") {
    Matrix x;
    for (std::uint64_t s = 0; s < 40; ++s) {
        auto row = oracle::gaussian(5, s + 1, 3.0);
        row[2] += 100.0;
        x.append_row(row);
    }
    const auto z = fit_standardizer(x).apply(x);
    for (std::size_t c = 0; c < 5; ++c) {
        double m = 0, v = 0;
        for (std::size_t r = 0; r < 40; ++r) m += z(r, c);
        m /= 40;
        for (std::size_t r = 0; r < 40; ++r) v += (z(r, c) - m) * (z(r, c) - m);
        CHECK(std::abs(m) < 1e-10);
        CHECK(std::sqrt(v / 40) == doctest::Approx(1.0));
    }
}

TEST_CASE("SVM on two symmetric points") {
    const auto x = from_rows({{-1.0}, {1.0}});
    const std::vector<int> y{0, 1};
    const auto m = train_svm(x, y);
    CHECK(std::abs(m.intercept) < 1e-4);
    CHECK(std::abs(m.decision(std::vector<double>{1.0}) - 1.0) < 1e-4);
    CHECK(std::abs(m.decision(std::vector<double>{-1.0}) + 1.0) < 1e-4);
    CHECK(m.predict(std::vector<double>{0.3}) == 1);
    CHECK(m.predict(std::vector<double>{-0.3}) == 0);
}

TEST_CASE("SVM separates blobs and closes the duality gap") {
    Matrix x;
    std::vector<int> y;
    blobs(60, 7, x, y, 1.0);
    SvmDiagnostics diag;
    const SvmParams params{};
    const auto m = train_svm(x, y, params, &diag);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < y.size(); ++i) correct += m.predict(x.row(i)) == y[i];
    CHECK(correct == y.size());
    CHECK(diag.kkt_gap <= 1e-4);

    // Recompute w from the dual variables and compare primal with dual.
    std::vector<double> w(2, 0.0);
    double sum_alpha = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double yi = y[i] == 1 ? 1.0 : -1.0;
        CHECK(diag.alpha[i] >= -1e-12);
        CHECK(diag.alpha[i] <= params.c + 1e-12);
        for (std::size_t j = 0; j < 2; ++j) w[j] += diag.alpha[i] * yi * x(i, j);
        sum_alpha += diag.alpha[i];
    }
    for (std::size_t j = 0; j < 2; ++j) CHECK(w[j] == doctest::Approx(m.weights[j]).epsilon(1e-8));
    double hinge = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double yi = y[i] == 1 ? 1.0 : -1.0;
        hinge += std::max(0.0, 1.0 - yi * m.decision(x.row(i)));
    }
    const double ww = w[0] * w[0] + w[1] * w[1];
    const double primal = 0.5 * ww + params.c * hinge;
    const double dual = sum_alpha - 0.5 * ww;
    CHECK(primal - dual >= -1e-9);
    CHECK((primal - dual) / std::max(1.0, primal) < 1e-3);
}

TEST_CASE("SVM on XOR terminates below 75 percent") {
    const auto x = from_rows({{0, 0}, {1, 1}, {0, 1}, {1, 0}});
    const std::vector<int> y{0, 0, 1, 1};
    const auto m = train_svm(x, y);
    int correct = 0;
    for (std::size_t i = 0; i < 4; ++i) correct += m.predict(x.row(i)) == y[i];
    CHECK(correct <= 3);
}

TEST_CASE("linear trainers reject single-class data") {
    const auto x = from_rows({{1.0}, {2.0}});
    const std::vector<int> y{1, 1};
    CHECK_THROWS_AS(train_svm(x, y), DomainError);
    CHECK_THROWS_AS(train_logistic(x, y), DomainError);
    CHECK_THROWS_AS(train_forest(x, y), DomainError);
    CHECK_THROWS_AS(train_boosting(x, y), DomainError);
    const std::vector<int> bad{0, 2};
    CHECK_THROWS_AS(train_svm(x, bad), DomainError);
}

TEST_CASE("SVM predictions survive a uniform rescale of standardized inputs") {
    Matrix x;
    std::vector<int> y;
    blobs(40, 3, x, y, 0.6);
    const auto z = fit_standardizer(x).apply(x);
    Matrix z5 = z;
    for (std::size_t r = 0; r < z.rows(); ++r)
        for (std::size_t c = 0; c < z.cols(); ++c) z5(r, c) = 5.0 * z(r, c);
    // Scaling the data by s and C by 1/s^2 maps the problem onto itself.
    const auto a = train_svm(z, y, {1.0});
    const auto b = train_svm(z5, y, {1.0 / 25.0});
    for (const auto& p : grid()) {
        const std::vector<double> q{5.0 * p[0], 5.0 * p[1]};
        if (std::abs(a.decision(p)) > 1e-3) CHECK(a.predict(p) == b.predict(q));
    }
}

TEST_CASE("logistic regression on symmetric data") {
    const auto x = from_rows({{-1.0}, {1.0}, {-2.0}, {2.0}, {-0.5}, {0.5}, {0.2}, {-0.2}});
    const std::vector<int> y{0, 1, 0, 1, 1, 0, 0, 1};
    LogisticDiagnostics diag;
    const LogisticParams params{};
    const auto m = train_logistic(x, y, params, &diag);
    CHECK(std::abs(m.intercept) < 1e-6);
    CHECK(diag.gradient_norm <= 1e-6);

    // Independent gradient of the penalized log-likelihood.
    double g0 = 0.0, g1 = -params.l2 * m.weights[0];
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double r = y[i] - sigmoid(m.weights[0] * x(i, 0) + m.intercept);
        g0 += r;
        g1 += r * x(i, 0);
    }
    CHECK(std::abs(g0) < 1e-5);
    CHECK(std::abs(g1) < 1e-5);

    // A point on the boundary has probability one half.
    const std::vector<double> boundary{-m.intercept / m.weights[0]};
    CHECK(m.probability(boundary) == doctest::Approx(0.5));
    CHECK(log_likelihood(m, x, y) >= log_likelihood(LinearModel{{0.0}, 0.0, LinearKind::Logistic}, x, y));
}

TEST_CASE("logistic regression stays finite under perfect separation") {
    Matrix x;
    std::vector<int> y;
    blobs(30, 11, x, y);
    const auto m = train_logistic(x, y);
    for (double w : m.weights) CHECK(std::isfinite(w));
    for (const auto& p : grid()) {
        const double prob = m.probability(p);
        CHECK(prob > 0.0);
        CHECK(prob < 1.0);
    }
    std::size_t correct = 0;
    for (std::size_t i = 0; i < y.size(); ++i) correct += m.predict(x.row(i)) == y[i];
    CHECK(correct == y.size());
}

TEST_CASE("forest on step data") {
    Matrix x;
    std::vector<int> y;
    step_data(200, 5, x, y);
    const auto f = train_forest(x, y, {100, 2, 42});
    REQUIRE(f.oob_accuracy.has_value());
    CHECK(*f.oob_accuracy >= 0.95);
    CHECK(f.trees.size() == 100);
    for (const auto& t : f.trees) CHECK(t.depth() <= 2);
    for (std::size_t i = 0; i < y.size(); ++i) {
        const int v = f.votes(x.row(i));
        CHECK(v >= 0);
        CHECK(v <= 100);
    }
}

TEST_CASE("forest determinism") {
    Matrix x;
    std::vector<int> y;
    blobs(50, 9, x, y, 0.4);
    const auto a = train_forest(x, y, {100, 2, 7});
    const auto b = train_forest(x, y, {100, 2, 7});
    const auto c = train_forest(x, y, {100, 2, 8});
    bool differs = false;
    for (const auto& p : grid()) {
        CHECK(a.votes(p) == b.votes(p));
        differs = differs || a.votes(p) != c.votes(p);
    }
    CHECK(differs);
}

TEST_CASE("boosting with no stages predicts the majority class") {
    const auto x = from_rows({{0.0}, {1.0}, {2.0}, {3.0}, {4.0}});
    const std::vector<int> y{1, 1, 0, 1, 0};
    BoostingParams p;
    p.n_stages = 0;
    const auto m = train_boosting(x, y, p);
    CHECK(m.base_score == doctest::Approx(std::log(3.0 / 2.0)));
    for (double v = -5.0; v <= 5.0; v += 0.5) CHECK(m.predict(std::vector<double>{v}) == 1);
}

TEST_CASE("boosting training deviance never increases") {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        Matrix x;
        std::vector<int> y;
        blobs(80, seed, x, y, 0.3);
        std::mt19937_64 rng(seed);
        for (auto& v : y)
            if (rng() % 5 == 0) v = 1 - v; // label noise
        if (std::count(y.begin(), y.end(), 1) == 0 || std::count(y.begin(), y.end(), 0) == 0) continue;
        BoostingParams p;
        p.seed = seed;
        p.subsample = seed % 2 ? 1.0 : 0.7;
        const auto m = train_boosting(x, y, p);
        REQUIRE(m.train_deviance.size() == 101);
        for (std::size_t s = 1; s < m.train_deviance.size(); ++s)
            CHECK(m.train_deviance[s] <= m.train_deviance[s - 1] + 1e-12);

        // Recompute the final deviance from the model's own scores.
        std::vector<double> scores;
        for (std::size_t i = 0; i < y.size(); ++i) scores.push_back(m.score(x.row(i)));
        double dev = 0.0;
        for (std::size_t i = 0; i < y.size(); ++i)
            dev += std::log1p(std::exp(scores[i])) - y[i] * scores[i];
        CHECK(2.0 * dev / static_cast<double>(y.size()) == doctest::Approx(m.train_deviance.back()));
    }
}

TEST_CASE("boosting recovers a step") {
    Matrix x;
    std::vector<int> y;
    step_data(200, 13, x, y);
    const auto m = train_boosting(x, y);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < y.size(); ++i) correct += m.predict(x.row(i)) == y[i];
    CHECK(static_cast<double>(correct) / 200.0 >= 0.99);
}

TEST_CASE("classifier names") {
    CHECK(parse_classifier("svm") == ClassifierKind::Svm);
    CHECK(parse_classifier("logreg") == ClassifierKind::Logistic);
    CHECK(parse_classifier("forest") == ClassifierKind::Forest);
    CHECK(parse_classifier("boost") == ClassifierKind::Boosting);
    CHECK_FALSE(parse_classifier("knn").has_value());
    for (auto k : {ClassifierKind::Svm, ClassifierKind::Logistic, ClassifierKind::Forest, ClassifierKind::Boosting})
        CHECK(parse_classifier(to_string(k)) == k);
}

TEST_CASE("RFE with a single feature") {
    const auto x = from_rows({{-1.0}, {1.0}, {-2.0}, {2.0}});
    const std::vector<int> y{0, 1, 0, 1};
    const auto r = rfe_rank(x, y, {});
    CHECK(r.order == std::vector<std::size_t>{0});
    CHECK(r.iterations == 1);
}

TEST_CASE("RFE puts planted features on top") {
    for (auto kind : {ClassifierKind::Svm, ClassifierKind::Logistic, ClassifierKind::Forest, ClassifierKind::Boosting}) {
        int hits = 0, top_hits = 0;
        for (std::uint64_t seed = 1; seed <= 10; ++seed) {
            std::mt19937_64 rng(seed);
            std::normal_distribution<double> g(0.0, 1.0);
            Matrix x;
            std::vector<int> y;
            for (int i = 0; i < 120; ++i) {
                const int c = i % 2;
                std::vector<double> row(14);
                for (auto& v : row) v = g(rng);
                // Informative columns at 2, 7 and 11.
                for (std::size_t j : {2u, 7u, 11u}) row[j] = (c ? 1.5 : -1.5) + 0.5 * g(rng);
                x.append_row(row);
                y.push_back(c);
            }
            ClassifierConfig cfg;
            cfg.kind = kind;
            cfg.forest.seed = seed;
            cfg.boosting.seed = seed;
            const auto r = rfe_rank(x, y, cfg);
            CHECK(is_permutation_of_columns(r, 14));
            CHECK(r.iterations == 14);
            const std::set<std::size_t> top(r.order.begin(), r.order.begin() + 3);
            hits += top == std::set<std::size_t>{2, 7, 11};
            top_hits += r.order[0] == 2 || r.order[0] == 7 || r.order[0] == 11;
        }
        INFO("classifier " << to_string(kind));
        CHECK(top_hits == 10);
        // Boosting keeps splitting on whichever planted column it found first;
        // the redundant ones end with zero importance and tie with the noise.
        if (kind != ClassifierKind::Boosting) CHECK(hits >= 9);
    }
}

TEST_CASE("RFE ties drop the higher column first") {
    // Two identical informative columns plus a copy of the first.
    Matrix x;
    std::vector<int> y;
    for (int i = 0; i < 20; ++i) {
        const double v = i < 10 ? -1.0 - 0.1 * i : 1.0 + 0.1 * (i - 10);
        x.append_row(std::vector<double>{v, v});
        y.push_back(i < 10 ? 0 : 1);
    }
    const auto r = rfe_rank(x, y, {});
    CHECK(r.elimination_order.front() == 1);
    CHECK(r.order == std::vector<std::size_t>{0, 1});
}

TEST_CASE("RFE on orthogonal features follows the full-fit weight order") {
    // Columns of a 16x4 Hadamard-like design are orthogonal with unit variance.
    Matrix x;
    std::vector<int> y;
    const std::vector<double> coef{0.3, 2.0, -1.0, 0.6};
    for (int i = 0; i < 16; ++i) {
        std::vector<double> row(4);
        for (int j = 0; j < 4; ++j) row[static_cast<std::size_t>(j)] = ((i >> j) & 1) ? 1.0 : -1.0;
        double s = 0.0;
        for (std::size_t j = 0; j < 4; ++j) s += coef[j] * row[j];
        x.append_row(row);
        y.push_back(s > 0.0 ? 1 : 0);
    }
    ClassifierConfig cfg;
    cfg.kind = ClassifierKind::Logistic;
    const auto full = fit_classifier(cfg, x, y).importances();
    std::vector<std::size_t> by_weight{0, 1, 2, 3};
    std::stable_sort(by_weight.begin(), by_weight.end(), [&](auto a, auto b) { return full[a] > full[b]; });
    CHECK(rfe_rank(x, y, cfg).order == by_weight);
}

TEST_CASE("nested accuracies") {
    Matrix x;
    std::vector<int> y;
    blobs(60, 21, x, y, 0.5);
    Matrix xt;
    std::vector<int> yt;
    blobs(40, 22, xt, yt, 0.5);
    ClassifierConfig cfg;
    const auto r = rfe_rank(x, y, cfg);
    const auto acc = nested_feature_accuracies(x, y, xt, yt, r, cfg);
    REQUIRE(acc.size() == 2);
    CHECK(acc[0].k == 1);
    CHECK(acc[1].k == 2);
    const auto full = fit_classifier(cfg, x, y);
    CHECK(acc[1].test_accuracy == doctest::Approx(full.accuracy(xt, yt)));
    CHECK(acc[1].train_accuracy == doctest::Approx(full.accuracy(x, y)));
}

TEST_CASE("nested test accuracy grows with each helpful feature") {
    // Each column alone splits off one more slice of class-1 rows.
    Matrix x, xt;
    std::vector<int> y, yt;
    auto build = [](Matrix& m, std::vector<int>& labels, std::uint64_t seed) {
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> g(0.0, 0.05);
        for (int i = 0; i < 80; ++i) {
            const int slot = i % 8; // 0..3 negatives, 4..7 positives
            std::vector<double> row(3, 0.0);
            for (auto& v : row) v = g(rng);
            if (slot >= 5) row[static_cast<std::size_t>(slot - 5)] += 1.0;
            m.append_row(row);
            labels.push_back(slot >= 4 ? 1 : 0);
        }
    };
    build(x, y, 1);
    build(xt, yt, 2);
    ClassifierConfig cfg;
    cfg.kind = ClassifierKind::Forest;
    cfg.forest.seed = 3;
    FeatureRanking ranking;
    ranking.order = {0, 1, 2};
    const auto acc = nested_feature_accuracies(x, y, xt, yt, ranking, cfg);
    for (std::size_t k = 1; k < acc.size(); ++k) CHECK(acc[k].test_accuracy >= acc[k - 1].test_accuracy);
    CHECK(acc.back().test_accuracy > acc.front().test_accuracy);
}

TEST_CASE("nested accuracies reject a bad ranking") {
    Matrix x;
    std::vector<int> y;
    blobs(20, 1, x, y);
    FeatureRanking bad;
    bad.order = {0, 0};
    CHECK_THROWS(nested_feature_accuracies(x, y, x, y, bad, {}));
}

TEST_CASE("model JSON round trip") {
    Matrix x;
    std::vector<int> y;
    blobs(40, 4, x, y, 0.4);
    for (auto kind : {ClassifierKind::Svm, ClassifierKind::Logistic, ClassifierKind::Forest, ClassifierKind::Boosting}) {
        ClassifierConfig cfg;
        cfg.kind = kind;
        const auto m = fit_classifier(cfg, x, y);
        const auto j = m.to_json();
        CHECK(j.at("format") == kModelFormat);
        const auto back = Classifier::from_json(nlohmann::json::parse(j.dump()));
        CHECK(back.kind() == kind);
        CHECK(back.importances() == m.importances());
        for (const auto& p : grid()) CHECK(back.predict(p) == m.predict(p));
    }
    auto j = fit_classifier({}, x, y).to_json();
    j["format"] = "other/9";
    CHECK_THROWS_AS(Classifier::from_json(j), ValidationError);
}
