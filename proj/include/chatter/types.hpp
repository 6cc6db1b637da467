#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <vector>

namespace chatter {

struct FrequencyBand {
    double low_hz = 0.0;
    double high_hz = 0.0;

    double width() const { return high_hz - low_hz; }
    bool contains(double f) const { return f >= low_hz && f <= high_hz; }
    // Overlap with nonzero measure.
    bool overlaps(const FrequencyBand& other) const {
        return low_hz < other.high_hz && other.low_hz < high_hz;
    }
    bool operator==(const FrequencyBand&) const = default;
};

// Dense row-major matrix used for feature data. Rows are samples.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool empty() const { return rows_ == 0; }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

    std::vector<double> column(std::size_t c) const {
        std::vector<double> out(rows_);
        for (std::size_t r = 0; r < rows_; ++r) out[r] = (*this)(r, c);
        return out;
    }

    void append_row(std::span<const double> values) {
        if (rows_ == 0 && cols_ == 0) cols_ = values.size();
        data_.insert(data_.end(), values.begin(), values.end());
        ++rows_;
    }

    // Copy of the listed columns, in the listed order.
    Matrix select_columns(std::span<const std::size_t> columns) const {
        Matrix out(rows_, columns.size());
        for (std::size_t r = 0; r < rows_; ++r)
            for (std::size_t j = 0; j < columns.size(); ++j) out(r, j) = (*this)(r, columns[j]);
        return out;
    }

    Matrix select_rows(std::span<const std::size_t> indices) const {
        Matrix out(indices.size(), cols_);
        for (std::size_t i = 0; i < indices.size(); ++i) {
            auto src = row(indices[i]);
            std::copy(src.begin(), src.end(), out.row(i).begin());
        }
        return out;
    }

    const std::vector<double>& data() const { return data_; }

    bool operator==(const Matrix&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

} // namespace chatter
