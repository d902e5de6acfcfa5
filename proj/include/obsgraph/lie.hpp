#pragma once

#include "obsgraph/rank.hpp"
#include "obsgraph/system.hpp"

#include <chrono>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace obsgraph {

struct LieChain {
    std::string output;
    std::vector<Expression> terms;  // terms[k] is the order-k Lie derivative
};

/// k-fold Lie derivative of expr along the system's vector field. Inputs are
/// held constant. Throws GraphOnlyModel.
[[nodiscard]] Expression lie_derivative(const DynSystem& system, const Expression& expr, std::size_t k);

/// Orders 0..max_order of output `output_index`.
[[nodiscard]] LieChain lie_chain(const DynSystem& system, std::size_t output_index, std::size_t max_order);

/// Evaluation failure while filling the observability matrix; names the
/// (output, order, state) entry that failed.
class SampleEvaluationError : public std::runtime_error {
public:
    SampleEvaluationError(std::string output, std::size_t order, std::string state, const EvaluationError& cause);

    std::string output;
    std::size_t order;
    std::string state;
    EvaluationError cause;
};

/// Stacked Jacobian of orders 0..max_order at `sample`: row k*p + r holds the
/// gradient of the order-k derivative of output r. Computed by dual sweeps.
[[nodiscard]] Matrix observability_matrix(const DynSystem& system, std::size_t max_order, const Environment& sample);

/// Same layout, entries as symbolic partial derivatives.
[[nodiscard]] std::vector<std::vector<Expression>> symbolic_observability_matrix(const DynSystem& system,
                                                                                 std::size_t max_order);

enum class JacobianMode { Dual, Symbolic };

struct LieOptions {
    std::optional<std::size_t> order_cap;  // default n - 1
    std::size_t samples = 5;
    double tol = 1e-8;
    std::uint64_t seed = 42;
    bool parallel = true;
    JacobianMode mode = JacobianMode::Dual;
    /// Checked between orders; the run stops after the order that exceeds it.
    std::optional<std::chrono::duration<double>> time_budget;
};

enum class LieVerdict { Observable, NotObservableUpToOrder };

[[nodiscard]] std::string_view to_string(LieVerdict v);

struct LieReport {
    std::size_t n = 0;
    std::size_t order_cap = 0;
    std::uint64_t seed = 0;
    double tolerance = 0.0;
    JacobianMode mode = JacobianMode::Dual;
    std::vector<Environment> samples;
    /// rank_by_sample[s][k]; empty tail once sample s failed.
    std::vector<std::vector<std::size_t>> rank_by_sample;
    std::vector<std::optional<std::string>> sample_failures;
    std::vector<std::size_t> rank_by_order;
    std::size_t final_rank = 0;
    LieVerdict verdict = LieVerdict::NotObservableUpToOrder;
    bool budget_exhausted = false;
    double wall_ms = 0.0;
};

class AllSamplesSingular : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Draws the sample points used by generic_rank. Deterministic in `seed`.
[[nodiscard]] std::vector<Environment> draw_samples(const DynSystem& system, std::size_t count, std::uint64_t seed);

[[nodiscard]] LieReport generic_rank(const DynSystem& system, const LieOptions& options = {});

} // namespace obsgraph
