#include "fedsb/matrix.hpp"

#include <cmath>

#include "fedsb/errors.hpp"

namespace fedsb {

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix Matrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
    Matrix m(rows.size(), rows.size() ? rows.begin()->size() : 0);
    std::size_t i = 0;
    for (const auto& r : rows) {
        if (r.size() != m.cols_) throw ShapeError("from_rows: ragged row lengths");
        std::size_t j = 0;
        for (double v : r) m(i, j++) = v;
        ++i;
    }
    return m;
}

Matrix multiply_nt(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.cols()) throw ShapeError("multiply_nt: inner dimensions disagree");
    Matrix out(a.rows(), b.rows());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        const auto ai = a.row(i);
        for (std::size_t j = 0; j < b.rows(); ++j) {
            const auto bj = b.row(j);
            double s = 0.0;
            for (std::size_t k = 0; k < a.cols(); ++k) s += ai[k] * bj[k];
            out(i, j) = s;
        }
    }
    return out;
}

Matrix multiply_tn(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows()) throw ShapeError("multiply_tn: inner dimensions disagree");
    Matrix out(a.cols(), b.cols());
    for (std::size_t k = 0; k < a.rows(); ++k) {
        const auto ak = a.row(k);
        const auto bk = b.row(k);
        for (std::size_t i = 0; i < a.cols(); ++i) {
            const double aki = ak[i];
            auto oi = out.row(i);
            for (std::size_t j = 0; j < b.cols(); ++j) oi[j] += aki * bk[j];
        }
    }
    return out;
}

Matrix multiply(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) throw ShapeError("multiply: inner dimensions disagree");
    Matrix out(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        const auto ai = a.row(i);
        auto oi = out.row(i);
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = ai[k];
            const auto bk = b.row(k);
            for (std::size_t j = 0; j < b.cols(); ++j) oi[j] += aik * bk[j];
        }
    }
    return out;
}

bool all_finite(const Matrix& m) {
    for (double v : m.data()) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

} // namespace fedsb
