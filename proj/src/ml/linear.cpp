#include "chatter/ml/linear.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "chatter/error.hpp"

namespace chatter::ml {
namespace {

double dot(std::span<const double> a, std::span<const double> b) {
    return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

double softplus(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

// Solves A v = b for symmetric positive definite A (row-major, n x n) in place.
bool cholesky_solve(std::vector<double> a, std::vector<double>& b, std::size_t n) {
    for (std::size_t j = 0; j < n; ++j) {
        double d = a[j * n + j];
        for (std::size_t k = 0; k < j; ++k) d -= a[j * n + k] * a[j * n + k];
        if (!(d > 0.0) || !std::isfinite(d)) return false;
        d = std::sqrt(d);
        a[j * n + j] = d;
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = a[i * n + j];
            for (std::size_t k = 0; k < j; ++k) s -= a[i * n + k] * a[j * n + k];
            a[i * n + j] = s / d;
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        double s = b[i];
        for (std::size_t k = 0; k < i; ++k) s -= a[i * n + k] * b[k];
        b[i] = s / a[i * n + i];
    }
    for (std::size_t i = n; i-- > 0;) {
        double s = b[i];
        for (std::size_t k = i + 1; k < n; ++k) s -= a[k * n + i] * b[k];
        b[i] = s / a[i * n + i];
    }
    return true;
}

} // namespace

void require_two_classes(const Matrix& x, std::span<const int> y) {
    if (x.rows() != y.size()) throw DomainError("labels must align with feature rows");
    if (x.rows() == 0) throw DomainError("training set is empty");
    bool zero = false, one = false;
    for (int v : y) {
        if (v == 0) zero = true;
        else if (v == 1) one = true;
        else throw DomainError("labels must be 0 or 1");
    }
    if (!zero || !one) throw DomainError("training set holds a single class");
}

double LinearModel::decision(std::span<const double> x) const {
    if (x.size() != weights.size()) throw DomainError("feature count does not match the model");
    return dot(weights, x) + intercept;
}

double LinearModel::probability(std::span<const double> x) const { return sigmoid(decision(x)); }

LinearModel train_svm(const Matrix& x, std::span<const int> labels, const SvmParams& params,
                      SvmDiagnostics* diagnostics) {
    require_two_classes(x, labels);
    if (!(params.c > 0.0)) throw DomainError("SVM C must be positive");
    const std::size_t n = x.rows();
    const std::size_t d = x.cols();
    const double c = params.c;
    constexpr double tau = 1e-12;

    std::vector<double> y(n), alpha(n, 0.0), grad(n, -1.0), diag(n), w(d, 0.0), k_i(n);
    for (std::size_t t = 0; t < n; ++t) {
        y[t] = labels[t] == 1 ? 1.0 : -1.0;
        diag[t] = dot(x.row(t), x.row(t));
    }
    auto at_upper = [&](std::size_t t) { return alpha[t] >= c; };
    auto at_lower = [&](std::size_t t) { return alpha[t] <= 0.0; };

    long iter = 0;
    double gap = std::numeric_limits<double>::infinity();
    for (; iter < params.max_iterations; ++iter) {
        // Maximal violating index i over I_up.
        double gmax = -std::numeric_limits<double>::infinity();
        std::size_t i = n;
        for (std::size_t t = 0; t < n; ++t) {
            const double v = -y[t] * grad[t];
            const bool up = (y[t] > 0) ? !at_upper(t) : !at_lower(t);
            if (up && v >= gmax) {
                gmax = v;
                i = t;
            }
        }
        if (i == n) {
            gap = 0.0;
            break;
        }
        for (std::size_t t = 0; t < n; ++t) k_i[t] = dot(x.row(i), x.row(t));
        // Second-order choice of j over I_low.
        double gmax2 = -std::numeric_limits<double>::infinity();
        double best_obj = std::numeric_limits<double>::infinity();
        std::size_t j = n;
        for (std::size_t t = 0; t < n; ++t) {
            const bool low = (y[t] > 0) ? !at_lower(t) : !at_upper(t);
            if (!low) continue;
            const double v = y[t] * grad[t];
            gmax2 = std::max(gmax2, v);
            const double diff = gmax + v;
            if (diff > 0.0) {
                double quad = diag[i] + diag[t] - 2.0 * k_i[t];
                if (quad <= 0.0) quad = tau;
                const double obj = -(diff * diff) / quad;
                if (obj <= best_obj) {
                    best_obj = obj;
                    j = t;
                }
            }
        }
        gap = gmax + gmax2;
        if (gap < params.tolerance || j == n) break;

        const double old_i = alpha[i], old_j = alpha[j];
        const double kij = k_i[j];
        if (y[i] != y[j]) {
            double quad = diag[i] + diag[j] - 2.0 * kij;
            if (quad <= 0.0) quad = tau;
            const double delta = (-grad[i] - grad[j]) / quad;
            const double diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if (diff > 0.0) {
                if (alpha[j] < 0.0) {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if (alpha[i] < 0.0) {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if (diff > 0.0) {
                if (alpha[i] > c) {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if (alpha[j] > c) {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            double quad = diag[i] + diag[j] - 2.0 * kij;
            if (quad <= 0.0) quad = tau;
            const double delta = (grad[i] - grad[j]) / quad;
            const double sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if (sum > c) {
                if (alpha[i] > c) {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if (alpha[j] < 0.0) {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if (sum > c) {
                if (alpha[j] > c) {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if (alpha[i] < 0.0) {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }
        const double di = (alpha[i] - old_i) * y[i];
        const double dj = (alpha[j] - old_j) * y[j];
        std::vector<double> dw(d);
        for (std::size_t f = 0; f < d; ++f) {
            dw[f] = di * x(i, f) + dj * x(j, f);
            w[f] += dw[f];
        }
        for (std::size_t t = 0; t < n; ++t) grad[t] += y[t] * dot(x.row(t), dw);
    }

    // Offset from the free support vectors, else the midpoint of the feasible range.
    double ub = std::numeric_limits<double>::infinity(), lb = -std::numeric_limits<double>::infinity();
    double free_sum = 0.0;
    std::size_t free_count = 0;
    for (std::size_t t = 0; t < n; ++t) {
        const double yg = y[t] * grad[t];
        if (at_upper(t)) {
            if (y[t] < 0) ub = std::min(ub, yg);
            else lb = std::max(lb, yg);
        } else if (at_lower(t)) {
            if (y[t] > 0) ub = std::min(ub, yg);
            else lb = std::max(lb, yg);
        } else {
            ++free_count;
            free_sum += yg;
        }
    }
    const double rho = free_count > 0 ? free_sum / static_cast<double>(free_count) : 0.5 * (ub + lb);

    if (diagnostics) {
        diagnostics->iterations = iter;
        diagnostics->kkt_gap = gap;
        diagnostics->alpha = alpha;
    }
    return {std::move(w), -rho, LinearKind::Svm};
}

double log_likelihood(const LinearModel& model, const Matrix& x, std::span<const int> y) {
    double ll = 0.0;
    for (std::size_t t = 0; t < x.rows(); ++t) {
        const double z = model.decision(x.row(t));
        ll -= softplus(z) - (y[t] == 1 ? z : 0.0);
    }
    return ll;
}

LinearModel train_logistic(const Matrix& x, std::span<const int> y, const LogisticParams& params,
                           LogisticDiagnostics* diagnostics) {
    require_two_classes(x, y);
    const std::size_t n = x.rows();
    const std::size_t d = x.cols();
    const std::size_t m = d + 1; // weights then intercept

    std::vector<double> theta(m, 0.0);
    auto margin = [&](const std::vector<double>& th, std::size_t t) {
        return dot(std::span(th).first(d), x.row(t)) + th[d];
    };
    auto objective = [&](const std::vector<double>& th) {
        double f = 0.0;
        for (std::size_t t = 0; t < n; ++t) {
            const double z = margin(th, t);
            f += softplus(z) - (y[t] == 1 ? z : 0.0);
        }
        for (std::size_t j = 0; j < d; ++j) f += 0.5 * params.l2 * th[j] * th[j];
        return f;
    };

    int iter = 0;
    double gnorm = std::numeric_limits<double>::infinity();
    double f = objective(theta);
    std::vector<double> grad(m), hess(m * m);
    for (; iter < params.max_iterations; ++iter) {
        std::fill(grad.begin(), grad.end(), 0.0);
        std::fill(hess.begin(), hess.end(), 0.0);
        for (std::size_t t = 0; t < n; ++t) {
            const double p = sigmoid(margin(theta, t));
            const double r = p - (y[t] == 1 ? 1.0 : 0.0);
            const double wgt = p * (1.0 - p);
            auto row = x.row(t);
            for (std::size_t a = 0; a < m; ++a) {
                const double xa = a < d ? row[a] : 1.0;
                grad[a] += r * xa;
                for (std::size_t b = 0; b <= a; ++b) hess[a * m + b] += wgt * xa * (b < d ? row[b] : 1.0);
            }
        }
        for (std::size_t j = 0; j < d; ++j) {
            grad[j] += params.l2 * theta[j];
            hess[j * m + j] += params.l2;
        }
        for (std::size_t a = 0; a < m; ++a)
            for (std::size_t b = 0; b < a; ++b) hess[b * m + a] = hess[a * m + b];

        gnorm = 0.0;
        for (double g : grad) gnorm = std::max(gnorm, std::abs(g));
        if (gnorm <= params.gradient_tolerance) break;

        // Newton direction; a growing ridge rescues an ill-conditioned Hessian.
        std::vector<double> step;
        for (double ridge = 0.0;; ridge = ridge == 0.0 ? 1e-10 : ridge * 10.0) {
            auto h = hess;
            for (std::size_t a = 0; a < m; ++a) h[a * m + a] += ridge;
            step = grad;
            if (cholesky_solve(h, step, m)) break;
            if (ridge > 1e10) {
                step = grad;
                break;
            }
        }
        const double slope = -dot(grad, step);
        double t = 1.0;
        std::vector<double> trial(m);
        double f_trial = f;
        for (int ls = 0; ls < 60; ++ls, t *= 0.5) {
            for (std::size_t a = 0; a < m; ++a) trial[a] = theta[a] - t * step[a];
            f_trial = objective(trial);
            if (f_trial <= f + 1e-4 * t * slope) break;
        }
        if (!(f_trial <= f)) break; // no further decrease representable
        theta = trial;
        f = f_trial;
    }
    if (diagnostics) {
        diagnostics->iterations = iter;
        diagnostics->gradient_norm = gnorm;
    }
    LinearModel model;
    model.weights.assign(theta.begin(), theta.begin() + static_cast<std::ptrdiff_t>(d));
    model.intercept = theta[d];
    model.kind = LinearKind::Logistic;
    return model;
}

} // namespace chatter::ml
