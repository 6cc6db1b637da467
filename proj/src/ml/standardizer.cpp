#include "chatter/ml/standardizer.hpp"

#include <cmath>

#include "chatter/error.hpp"

namespace chatter::ml {

Standardizer fit_standardizer(const Matrix& x) {
    if (x.empty()) throw DomainError("standardizer needs a nonempty training matrix");
    Standardizer s;
    s.mean.assign(x.cols(), 0.0);
    s.std_dev.assign(x.cols(), 0.0);
    const double n = static_cast<double>(x.rows());
    for (std::size_t r = 0; r < x.rows(); ++r)
        for (std::size_t c = 0; c < x.cols(); ++c) s.mean[c] += x(r, c);
    for (double& m : s.mean) m /= n;
    for (std::size_t r = 0; r < x.rows(); ++r)
        for (std::size_t c = 0; c < x.cols(); ++c) {
            const double d = x(r, c) - s.mean[c];
            s.std_dev[c] += d * d;
        }
    for (std::size_t c = 0; c < x.cols(); ++c) {
        const double sd = std::sqrt(s.std_dev[c] / n);
        // rounding residue of a constant column
        s.std_dev[c] = sd > 1e-12 * std::abs(s.mean[c]) ? sd : 0.0;
    }
    return s;
}

std::vector<double> Standardizer::apply(std::span<const double> row) const {
    if (row.size() != mean.size()) throw DomainError("standardizer width mismatch");
    std::vector<double> out(row.size());
    for (std::size_t c = 0; c < row.size(); ++c)
        out[c] = std_dev[c] > 0.0 ? (row[c] - mean[c]) / std_dev[c] : 0.0;
    return out;
}

Matrix Standardizer::apply(const Matrix& x) const {
    Matrix out(x.rows(), x.cols());
    for (std::size_t r = 0; r < x.rows(); ++r) {
        const auto z = apply(x.row(r));
        std::copy(z.begin(), z.end(), out.row(r).begin());
    }
    return out;
}

} // namespace chatter::ml
