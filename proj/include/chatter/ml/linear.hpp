#pragma once

#include <span>
#include <vector>

#include "chatter/types.hpp"

namespace chatter::ml {

enum class LinearKind { Svm, Logistic };

struct LinearModel {
    std::vector<double> weights;
    double intercept = 0.0;
    LinearKind kind = LinearKind::Svm;

    double decision(std::span<const double> x) const;
    int predict(std::span<const double> x) const { return decision(x) > 0.0 ? 1 : 0; }
    // Logistic probability of class 1.
    double probability(std::span<const double> x) const;
};

struct SvmParams {
    double c = 1.0;
    double tolerance = 1e-4; // maximal KKT violation at exit
    long max_iterations = 10'000'000;
};

struct SvmDiagnostics {
    long iterations = 0;
    double kkt_gap = 0.0;
    std::vector<double> alpha;
};

// Soft-margin linear SVM: min 1/2 |w|^2 + C sum hinge, intercept unpenalized.
// Solved in the dual by SMO with second-order working-set selection.
LinearModel train_svm(const Matrix& x, std::span<const int> y, const SvmParams& params = {},
                      SvmDiagnostics* diagnostics = nullptr);

struct LogisticParams {
    double l2 = 1e-4; // on weights only
    double gradient_tolerance = 1e-6;
    int max_iterations = 10'000;
};

struct LogisticDiagnostics {
    int iterations = 0;
    double gradient_norm = 0.0;
};

// Penalized maximum likelihood by damped Newton.
LinearModel train_logistic(const Matrix& x, std::span<const int> y, const LogisticParams& params = {},
                           LogisticDiagnostics* diagnostics = nullptr);

// Bernoulli log-likelihood of the labels under the model's sigmoid.
double log_likelihood(const LinearModel& model, const Matrix& x, std::span<const int> y);

// Throws DomainError unless y is 0/1, sized like x, and holds both classes.
void require_two_classes(const Matrix& x, std::span<const int> y);

} // namespace chatter::ml
