#include "obsgraph/rank.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace obsgraph {

NonFiniteEntry::NonFiniteEntry(std::size_t r, std::size_t c)
    : std::domain_error("non-finite matrix entry at (" + std::to_string(r) + ", " + std::to_string(c) + ")"), row(r), col(c) {}

std::size_t numeric_rank(const Matrix& m, double tol) {
    double scale = 1.0;
    for (std::size_t i = 0; i < m.rows; ++i) {
        for (std::size_t j = 0; j < m.cols; ++j) {
            double v = m(i, j);
            if (!std::isfinite(v)) throw NonFiniteEntry(i, j);
            scale = std::max(scale, std::abs(v));
        }
    }
    const double threshold = tol * scale;

    Matrix a = m;
    std::size_t rank = 0;
    for (std::size_t col = 0; col < a.cols && rank < a.rows; ++col) {
        std::size_t pivot = rank;
        double best = std::abs(a(rank, col));
        for (std::size_t i = rank + 1; i < a.rows; ++i) {
            double v = std::abs(a(i, col));
            if (v > best) {
                best = v;
                pivot = i;
            }
        }
        if (!(best > threshold)) continue;
        if (pivot != rank) {
            std::swap_ranges(a.data.begin() + static_cast<std::ptrdiff_t>(pivot * a.cols),
                             a.data.begin() + static_cast<std::ptrdiff_t>((pivot + 1) * a.cols),
                             a.data.begin() + static_cast<std::ptrdiff_t>(rank * a.cols));
        }
        const double p = a(rank, col);
        for (std::size_t i = rank + 1; i < a.rows; ++i) {
            double factor = a(i, col) / p;
            if (factor == 0.0) continue;
            a(i, col) = 0.0;
            for (std::size_t j = col + 1; j < a.cols; ++j) a(i, j) -= factor * a(rank, j);
        }
        ++rank;
    }
    return rank;
}

} // namespace obsgraph
