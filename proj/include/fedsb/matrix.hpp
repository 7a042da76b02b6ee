#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace fedsb {

/// Dense row-major matrix of doubles. The workhorse for batches of inputs,
/// layer weights and activations.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
    static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
    std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

    std::span<double> data() { return data_; }
    std::span<const double> data() const { return data_; }

    bool operator==(const Matrix&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

/// a (n x k) times b-transposed (m x k) -> n x m.
Matrix multiply_nt(const Matrix& a, const Matrix& b);
/// a-transposed (k x n) times b (k x m) -> n x m.
Matrix multiply_tn(const Matrix& a, const Matrix& b);
/// a (n x k) times b (k x m) -> n x m.
Matrix multiply(const Matrix& a, const Matrix& b);

bool all_finite(const Matrix& m);

} // namespace fedsb
