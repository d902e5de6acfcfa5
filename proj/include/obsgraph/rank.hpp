#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace obsgraph {

/// Dense row-major matrix.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

    double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

    friend bool operator==(const Matrix&, const Matrix&) = default;
};

class NonFiniteEntry : public std::domain_error {
public:
    NonFiniteEntry(std::size_t row, std::size_t col);
    std::size_t row;
    std::size_t col;
};

/// Row echelon form with partial pivoting. A pivot counts when its magnitude
/// exceeds tol * max(1, max |a_ij|) over the input matrix.
[[nodiscard]] std::size_t numeric_rank(const Matrix& m, double tol = 1e-8);

} // namespace obsgraph
