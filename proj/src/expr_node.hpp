#pragma once

#include "obsgraph/expr.hpp"

#include <memory>
#include <string>

namespace obsgraph {

namespace detail {

struct Node {
    NodeKind kind = NodeKind::Constant;
    std::uint32_t exponent = 0;
    double value = 0.0;
    std::string name;
    std::shared_ptr<const Node> lhs;
    std::shared_ptr<const Node> rhs;
};

} // namespace detail

struct ExpressionAccess {
    static const detail::Node& node(const Expression& e) { return *e.node_; }
    static const std::shared_ptr<const detail::Node>& ptr(const Expression& e) { return e.node_; }
    static Expression wrap(std::shared_ptr<const detail::Node> n) { return Expression(std::move(n)); }
};

} // namespace obsgraph
