#include "obsgraph/system.hpp"

#include <algorithm>

namespace obsgraph {

bool DynSystem::fully_symbolic() const {
    auto is_expr = [](const RightHandSide& rhs) { return std::holds_alternative<Expression>(rhs); };
    return std::all_of(derivatives.begin(), derivatives.end(), is_expr) &&
           std::all_of(outputs.begin(), outputs.end(), [&](const Output& o) { return is_expr(o.rhs); });
}

std::optional<std::size_t> DynSystem::state_index(std::string_view name) const {
    auto it = std::find(states.begin(), states.end(), name);
    if (it == states.end()) return std::nullopt;
    return static_cast<std::size_t>(it - states.begin());
}

std::vector<std::string> state_dependencies(const RightHandSide& rhs) {
    if (const auto* spec = std::get_if<DependencySpec>(&rhs)) return spec->states;
    auto deps = dependencies(std::get<Expression>(rhs));
    return {deps.begin(), deps.end()};
}

} // namespace obsgraph
