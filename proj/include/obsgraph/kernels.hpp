#pragma once

#include "obsgraph/rank.hpp"
#include "obsgraph/tape.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace obsgraph::kernels {

struct SliceFailure {
    std::size_t column;
    EvaluationError error;
};

struct SliceBatch {
    /// One p x n Jacobian slice per sample; rows follow the tape roots.
    std::vector<Matrix> slices;
    /// Lowest failing column per sample, if any. A failed sample's slice is
    /// left partially filled and must not be used.
    std::vector<std::optional<SliceFailure>> failures;
};

/// Inputs shared by both kernels. `bound[s]` holds the tape symbol values of
/// sample s; `state_slot[j]` is the tape symbol index of state column j, or
/// empty when the roots do not mention that state (the column is zero).
/// Inactive samples are skipped and get an empty slice.
struct SliceProblem {
    const Tape* tape = nullptr;
    const std::vector<std::vector<double>>* bound = nullptr;
    std::vector<std::optional<std::size_t>> state_slot;
    std::vector<char> active;
};

/// Reference implementation: one dual sweep per (sample, column), in order.
[[nodiscard]] SliceBatch lie_slice_serial(const SliceProblem& problem);

/// OpenMP over the flattened (sample, column) space. Every cell is written by
/// exactly one iteration with the same arithmetic as the serial kernel, so the
/// results are bit-identical to lie_slice_serial for any thread count.
[[nodiscard]] SliceBatch lie_slice_parallel(const SliceProblem& problem);

} // namespace obsgraph::kernels
