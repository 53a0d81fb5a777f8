#pragma once

// Minimal dense row-major matrix. Layer sizes in this project are tiny,
// so everything is plain loops over contiguous storage.

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace cheby {

struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data; // rows * cols, row-major

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

    double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

    const double* row(std::size_t i) const { return data.data() + i * cols; }
    double* row(std::size_t i) { return data.data() + i * cols; }

    std::size_t size() const { return data.size(); }
};

inline Matrix mat_mul(const Matrix& a, const Matrix& b) {
    if (a.cols != b.rows)
        throw std::invalid_argument("mat_mul: inner dimensions disagree (" +
                                    std::to_string(a.cols) + " vs " + std::to_string(b.rows) + ")");
    Matrix out(a.rows, b.cols);
    for (std::size_t i = 0; i < a.rows; ++i)
        for (std::size_t k = 0; k < a.cols; ++k) {
            double aik = a(i, k);
            for (std::size_t j = 0; j < b.cols; ++j)
                out(i, j) += aik * b(k, j);
        }
    return out;
}

/// Index of the maximum entry per row; ties resolve to the lowest index.
inline std::vector<int> row_argmax(const Matrix& m) {
    if (m.cols < 1) throw std::invalid_argument("row_argmax: matrix has no columns");
    std::vector<int> idx(m.rows);
    for (std::size_t i = 0; i < m.rows; ++i) {
        int best = 0;
        for (std::size_t j = 1; j < m.cols; ++j)
            if (m(i, j) > m(i, best)) best = static_cast<int>(j);
        idx[i] = best;
    }
    return idx;
}

template <typename F>
inline Matrix map_elementwise(const Matrix& m, F&& f) {
    Matrix out(m.rows, m.cols);
    for (std::size_t i = 0; i < m.data.size(); ++i) out.data[i] = f(m.data[i]);
    return out;
}

inline Matrix identity_matrix(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

} // namespace cheby
