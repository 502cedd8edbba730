#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace sikv {

/// Shapes that do not line up (wrong D, mismatched L, empty input).
class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Inputs with the right shape but unusable content (NaN, out-of-range index).
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Malformed on-disk data.
class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Dense row-major float matrix. Rows are tokens, columns are channels.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, float fill = 0.0f);
    Matrix(std::size_t rows, std::size_t cols, std::vector<float> data);

    static Matrix from_rows(std::initializer_list<std::initializer_list<float>> rows);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    bool empty() const noexcept { return rows_ == 0 || cols_ == 0; }

    float& operator()(std::size_t i, std::size_t j) noexcept { return data_[i * cols_ + j]; }
    float operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * cols_ + j]; }

    std::span<float> row(std::size_t i) noexcept { return {data_.data() + i * cols_, cols_}; }
    std::span<const float> row(std::size_t i) const noexcept { return {data_.data() + i * cols_, cols_}; }

    std::span<const float> flat() const noexcept { return data_; }
    std::span<float> flat() noexcept { return data_; }
    const std::vector<float>& data() const noexcept { return data_; }

    bool operator==(const Matrix&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<float> data_;
};

/// Throws ValidationError naming `what` if any element is NaN or infinite.
void require_finite(std::span<const float> values, const char* what);

std::string shape_string(std::size_t rows, std::size_t cols);

}  // namespace sikv
