#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

namespace obsgraph {

enum class NodeKind : std::uint8_t {
    Constant,
    Parameter,
    State,
    Input,
    Negate,
    Add,
    Sub,
    Mul,
    Div,
    IntPow,
    Sin,
    Cos,
    Exp,
};

[[nodiscard]] std::string_view to_string(NodeKind kind);
[[nodiscard]] int arity(NodeKind kind);
[[nodiscard]] constexpr bool is_symbol(NodeKind kind) {
    return kind == NodeKind::Parameter || kind == NodeKind::State || kind == NodeKind::Input;
}

namespace detail {
struct Node;
}

/// Immutable expression tree over states, inputs and parameters.
///
/// Subtrees are shared by pointer, so an Expression is cheap to copy and the
/// results of differentiation and Lie chains form DAGs rather than trees.
/// The factory functions and operators build nodes verbatim; local rewrites
/// only happen in simplify() (and in differentiate(), which simplifies).
class Expression {
public:
    /// The zero constant.
    Expression();

    [[nodiscard]] static Expression constant(double value);
    [[nodiscard]] static Expression parameter(std::string name);
    [[nodiscard]] static Expression state(std::string name);
    [[nodiscard]] static Expression input(std::string name);
    [[nodiscard]] static Expression unary(NodeKind kind, Expression operand);
    [[nodiscard]] static Expression binary(NodeKind kind, Expression lhs, Expression rhs);
    [[nodiscard]] static Expression int_pow(Expression base, std::uint32_t exponent);

    [[nodiscard]] NodeKind kind() const;
    [[nodiscard]] double value() const;             // Constant only
    [[nodiscard]] std::uint32_t exponent() const;   // IntPow only
    [[nodiscard]] const std::string& name() const;  // symbols only
    [[nodiscard]] Expression child(int index) const;

    [[nodiscard]] bool is_constant(double v) const;
    [[nodiscard]] bool is_zero() const { return is_constant(0.0); }
    [[nodiscard]] bool is_one() const { return is_constant(1.0); }

    /// Identity of the underlying node; equal ids imply structural equality.
    [[nodiscard]] const void* id() const { return node_.get(); }

    /// Number of distinct nodes reachable from this expression.
    [[nodiscard]] std::size_t dag_size() const;

    /// Structural (tree) equality; constants compare by value.
    friend bool operator==(const Expression& a, const Expression& b);

    friend Expression operator-(Expression e);
    friend Expression operator+(Expression a, Expression b);
    friend Expression operator-(Expression a, Expression b);
    friend Expression operator*(Expression a, Expression b);
    friend Expression operator/(Expression a, Expression b);

private:
    explicit Expression(std::shared_ptr<const detail::Node> node) : node_(std::move(node)) {}
    std::shared_ptr<const detail::Node> node_;

    friend struct ExpressionAccess;
};

[[nodiscard]] Expression pow(Expression base, std::uint32_t exponent);
[[nodiscard]] Expression sin(Expression e);
[[nodiscard]] Expression cos(Expression e);
[[nodiscard]] Expression exp(Expression e);

/// Values for every free symbol, split by symbol kind.
struct Environment {
    std::map<std::string, double> states;
    std::map<std::string, double> inputs;
    std::map<std::string, double> parameters;

    friend bool operator==(const Environment&, const Environment&) = default;
};

class EvaluationError : public std::runtime_error {
public:
    enum class Kind { UnboundSymbol, DivisionByZero };

    EvaluationError(Kind kind, std::string detail, std::string path);

    [[nodiscard]] Kind kind() const { return kind_; }
    /// Symbol name for UnboundSymbol, rendered denominator for DivisionByZero.
    [[nodiscard]] const std::string& detail() const { return detail_; }
    /// Child-index path from the root to the offending node, e.g. "/1/0".
    [[nodiscard]] const std::string& path() const { return path_; }

private:
    Kind kind_;
    std::string detail_;
    std::string path_;
};

[[nodiscard]] double evaluate(const Expression& expr, const Environment& env);

struct DualValue {
    double value = 0.0;
    double derivative = 0.0;
};

/// Forward-mode evaluation along the direction given by `seed` (state name ->
/// tangent component). States missing from the seed have zero tangent.
[[nodiscard]] DualValue dual_evaluate(const Expression& expr, const Environment& env,
                                      const std::map<std::string, double>& seed);

/// Symbolic partial derivative with respect to the state or input `wrt`.
[[nodiscard]] Expression differentiate(const Expression& expr, std::string_view wrt);

/// Bottom-up local rewrites: constant folding and the additive/multiplicative
/// identities. No cancellation (x - x stays as is).
[[nodiscard]] Expression simplify(const Expression& expr);

/// State names occurring in simplify(expr).
[[nodiscard]] std::set<std::string> dependencies(const Expression& expr);

/// Every symbol of the given kind occurring in expr (no simplification).
[[nodiscard]] std::set<std::string> symbols(const Expression& expr, NodeKind kind);

/// DSL concrete syntax. Output re-parses to a structurally equal tree.
[[nodiscard]] std::string to_string(const Expression& expr);

/// Like to_string, but stops after roughly `max_chars` characters and appends "...".
[[nodiscard]] std::string to_string_truncated(const Expression& expr, std::size_t max_chars);

} // namespace obsgraph
