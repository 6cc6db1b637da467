#pragma once

#include <vector>

#include "chatter/types.hpp"

namespace chatter::ml {

// Per-column z-score with population standard deviation. Columns with zero
// variance map to 0.
struct Standardizer {
    std::vector<double> mean;
    std::vector<double> std_dev;

    Matrix apply(const Matrix& x) const;
    std::vector<double> apply(std::span<const double> row) const;
};

Standardizer fit_standardizer(const Matrix& x);

} // namespace chatter::ml
