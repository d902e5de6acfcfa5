#pragma once

#include "obsgraph/expr.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace obsgraph {

/// Dependency-only description of a right-hand side: which states and inputs
/// it reads, without saying how. Both lists are kept in declaration order.
struct DependencySpec {
    std::vector<std::string> states;
    std::vector<std::string> inputs;

    friend bool operator==(const DependencySpec&, const DependencySpec&) = default;
};

using RightHandSide = std::variant<Expression, DependencySpec>;

struct Parameter {
    std::string name;
    std::optional<double> default_value;

    friend bool operator==(const Parameter&, const Parameter&) = default;
};

struct Output {
    std::string name;
    RightHandSide rhs;

    friend bool operator==(const Output&, const Output&) = default;
};

/// x' = f(x, u), y = h(x, u). Derivatives are stored by state index, so
/// `derivatives[i]` belongs to `states[i]`; the state order fixes the
/// row/column order of every adjacency and observability matrix.
struct DynSystem {
    std::string name;
    std::vector<std::string> states;
    std::vector<std::string> inputs;
    std::vector<Parameter> parameters;
    std::vector<RightHandSide> derivatives;
    std::vector<Output> outputs;

    [[nodiscard]] bool fully_symbolic() const;
    [[nodiscard]] std::optional<std::size_t> state_index(std::string_view name) const;

    friend bool operator==(const DynSystem&, const DynSystem&) = default;
};

/// Raised when an analysis needs closed-form expressions but the system
/// carries dependency lists.
class GraphOnlyModel : public std::runtime_error {
public:
    explicit GraphOnlyModel(const std::string& system_name)
        : std::runtime_error("model '" + system_name +
                             "' is graph-only (uses 'depends' lists); the Lie analysis needs full expressions") {}
};

/// State dependencies of one right-hand side: dependencies() for expressions,
/// the declared list for dependency specs.
[[nodiscard]] std::vector<std::string> state_dependencies(const RightHandSide& rhs);

} // namespace obsgraph
