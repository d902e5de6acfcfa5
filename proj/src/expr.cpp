#include "obsgraph/expr.hpp"
#include "obsgraph/tape.hpp"

#include "expr_node.hpp"

#include <charconv>
#include <cmath>
#include <functional>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace obsgraph {

using detail::Node;
using NodePtr = std::shared_ptr<const Node>;

std::string_view to_string(NodeKind kind) {
    switch (kind) {
    case NodeKind::Constant: return "Constant";
    case NodeKind::Parameter: return "Parameter";
    case NodeKind::State: return "State";
    case NodeKind::Input: return "Input";
    case NodeKind::Negate: return "Negate";
    case NodeKind::Add: return "Add";
    case NodeKind::Sub: return "Sub";
    case NodeKind::Mul: return "Mul";
    case NodeKind::Div: return "Div";
    case NodeKind::IntPow: return "IntPow";
    case NodeKind::Sin: return "Sin";
    case NodeKind::Cos: return "Cos";
    case NodeKind::Exp: return "Exp";
    }
    return "?";
}

int arity(NodeKind kind) {
    switch (kind) {
    case NodeKind::Constant:
    case NodeKind::Parameter:
    case NodeKind::State:
    case NodeKind::Input: return 0;
    case NodeKind::Negate:
    case NodeKind::IntPow:
    case NodeKind::Sin:
    case NodeKind::Cos:
    case NodeKind::Exp: return 1;
    case NodeKind::Add:
    case NodeKind::Sub:
    case NodeKind::Mul:
    case NodeKind::Div: return 2;
    }
    return 0;
}

namespace {

NodePtr make_leaf(NodeKind kind, double value, std::string name) {
    auto n = std::make_shared<Node>();
    n->kind = kind;
    n->value = value;
    n->name = std::move(name);
    return n;
}

NodePtr make_node(NodeKind kind, NodePtr lhs, NodePtr rhs = nullptr, std::uint32_t exponent = 0) {
    auto n = std::make_shared<Node>();
    n->kind = kind;
    n->exponent = exponent;
    n->lhs = std::move(lhs);
    n->rhs = std::move(rhs);
    return n;
}

const NodePtr& zero_node() {
    static const NodePtr z = make_leaf(NodeKind::Constant, 0.0, {});
    return z;
}

const NodePtr& one_node() {
    static const NodePtr o = make_leaf(NodeKind::Constant, 1.0, {});
    return o;
}

void require_symbol_name(const std::string& name) {
    if (name.empty()) throw std::invalid_argument("symbol name must not be empty");
}

} // namespace

Expression::Expression() : node_(zero_node()) {}

Expression Expression::constant(double value) {
    if (!std::isfinite(value)) throw std::invalid_argument("constant must be finite");
    if (value == 0.0 && !std::signbit(value)) return Expression(zero_node());
    if (value == 1.0) return Expression(one_node());
    return Expression(make_leaf(NodeKind::Constant, value, {}));
}

Expression Expression::parameter(std::string name) {
    require_symbol_name(name);
    return Expression(make_leaf(NodeKind::Parameter, 0.0, std::move(name)));
}

Expression Expression::state(std::string name) {
    require_symbol_name(name);
    return Expression(make_leaf(NodeKind::State, 0.0, std::move(name)));
}

Expression Expression::input(std::string name) {
    require_symbol_name(name);
    return Expression(make_leaf(NodeKind::Input, 0.0, std::move(name)));
}

Expression Expression::unary(NodeKind kind, Expression operand) {
    if (arity(kind) != 1 || kind == NodeKind::IntPow)
        throw std::invalid_argument("not a unary kind: " + std::string(to_string(kind)));
    return Expression(make_node(kind, std::move(operand.node_)));
}

Expression Expression::binary(NodeKind kind, Expression lhs, Expression rhs) {
    if (arity(kind) != 2) throw std::invalid_argument("not a binary kind: " + std::string(to_string(kind)));
    return Expression(make_node(kind, std::move(lhs.node_), std::move(rhs.node_)));
}

Expression Expression::int_pow(Expression base, std::uint32_t exponent) {
    return Expression(make_node(NodeKind::IntPow, std::move(base.node_), nullptr, exponent));
}

NodeKind Expression::kind() const { return node_->kind; }
double Expression::value() const { return node_->value; }
std::uint32_t Expression::exponent() const { return node_->exponent; }
const std::string& Expression::name() const { return node_->name; }

Expression Expression::child(int index) const {
    if (index < 0 || index >= arity(node_->kind)) throw std::out_of_range("expression child index");
    return Expression(index == 0 ? node_->lhs : node_->rhs);
}

bool Expression::is_constant(double v) const {
    return node_->kind == NodeKind::Constant && node_->value == v;
}

std::size_t Expression::dag_size() const {
    std::unordered_set<const Node*> seen;
    std::vector<const Node*> stack{node_.get()};
    while (!stack.empty()) {
        const Node* n = stack.back();
        stack.pop_back();
        if (!seen.insert(n).second) continue;
        if (n->lhs) stack.push_back(n->lhs.get());
        if (n->rhs) stack.push_back(n->rhs.get());
    }
    return seen.size();
}

namespace {

struct PairHash {
    std::size_t operator()(const std::pair<const Node*, const Node*>& p) const noexcept {
        return std::hash<const void*>{}(p.first) * 31u ^ std::hash<const void*>{}(p.second);
    }
};

bool equal_nodes(const Node* a, const Node* b,
                 std::unordered_set<std::pair<const Node*, const Node*>, PairHash>& known) {
    if (a == b) return true;
    if (a->kind != b->kind) return false;
    switch (a->kind) {
    case NodeKind::Constant: return a->value == b->value;
    case NodeKind::Parameter:
    case NodeKind::State:
    case NodeKind::Input: return a->name == b->name;
    default: break;
    }
    if (a->exponent != b->exponent) return false;
    if (known.contains({a, b})) return true;
    bool eq = equal_nodes(a->lhs.get(), b->lhs.get(), known);
    if (eq && arity(a->kind) == 2) eq = equal_nodes(a->rhs.get(), b->rhs.get(), known);
    if (eq) known.insert({a, b});
    return eq;
}

} // namespace

bool operator==(const Expression& a, const Expression& b) {
    std::unordered_set<std::pair<const Node*, const Node*>, PairHash> known;
    return equal_nodes(a.node_.get(), b.node_.get(), known);
}

Expression operator-(Expression e) { return Expression::unary(NodeKind::Negate, std::move(e)); }
Expression operator+(Expression a, Expression b) { return Expression::binary(NodeKind::Add, std::move(a), std::move(b)); }
Expression operator-(Expression a, Expression b) { return Expression::binary(NodeKind::Sub, std::move(a), std::move(b)); }
Expression operator*(Expression a, Expression b) { return Expression::binary(NodeKind::Mul, std::move(a), std::move(b)); }
Expression operator/(Expression a, Expression b) { return Expression::binary(NodeKind::Div, std::move(a), std::move(b)); }

Expression pow(Expression base, std::uint32_t exponent) { return Expression::int_pow(std::move(base), exponent); }
Expression sin(Expression e) { return Expression::unary(NodeKind::Sin, std::move(e)); }
Expression cos(Expression e) { return Expression::unary(NodeKind::Cos, std::move(e)); }
Expression exp(Expression e) { return Expression::unary(NodeKind::Exp, std::move(e)); }

EvaluationError::EvaluationError(Kind kind, std::string detail, std::string path)
    : std::runtime_error(kind == Kind::UnboundSymbol
                             ? "unbound symbol '" + detail + "'"
                             : "division by zero at " + (path.empty() ? std::string("/") : path) + " (denominator " +
                                   detail + ")"),
      kind_(kind), detail_(std::move(detail)), path_(std::move(path)) {}

// ---------------------------------------------------------------------------
// Local rewrites. Every constructor below returns either one of its
// (already simplified) arguments, a constant, or a fresh node to which no
// rule applies, which is what makes simplify idempotent.

namespace {

bool is_const(const NodePtr& n) { return n->kind == NodeKind::Constant; }
bool is_const(const NodePtr& n, double v) { return n->kind == NodeKind::Constant && n->value == v; }

NodePtr const_node(double v) { return ExpressionAccess::ptr(Expression::constant(v)); }

// Folds only when the result is finite, so folding never manufactures inf/nan.
bool foldable(double v) { return std::isfinite(v); }

double ipow(double x, std::uint32_t n) {
    double result = 1.0;
    while (n) {
        if (n & 1u) result *= x;
        n >>= 1u;
        if (n) x *= x;
    }
    return result;
}

NodePtr s_neg(const NodePtr& a) {
    if (is_const(a)) return const_node(-a->value);
    if (a->kind == NodeKind::Negate) return a->lhs;
    return make_node(NodeKind::Negate, a);
}

NodePtr s_add(const NodePtr& a, const NodePtr& b) {
    if (is_const(a) && is_const(b) && foldable(a->value + b->value)) return const_node(a->value + b->value);
    if (is_const(a, 0.0)) return b;
    if (is_const(b, 0.0)) return a;
    return make_node(NodeKind::Add, a, b);
}

NodePtr s_sub(const NodePtr& a, const NodePtr& b) {
    if (is_const(a) && is_const(b) && foldable(a->value - b->value)) return const_node(a->value - b->value);
    if (is_const(b, 0.0)) return a;
    if (is_const(a, 0.0)) return s_neg(b);
    return make_node(NodeKind::Sub, a, b);
}

NodePtr s_mul(const NodePtr& a, const NodePtr& b) {
    if (is_const(a) && is_const(b) && foldable(a->value * b->value)) return const_node(a->value * b->value);
    if (is_const(a, 0.0) || is_const(b, 0.0)) return zero_node();
    if (is_const(a, 1.0)) return b;
    if (is_const(b, 1.0)) return a;
    return make_node(NodeKind::Mul, a, b);
}

NodePtr s_div(const NodePtr& a, const NodePtr& b) {
    if (is_const(a) && is_const(b) && b->value != 0.0 && foldable(a->value / b->value))
        return const_node(a->value / b->value);
    if (is_const(b, 1.0)) return a;
    return make_node(NodeKind::Div, a, b);
}

NodePtr s_pow(const NodePtr& a, std::uint32_t n) {
    if (n == 0) return one_node();
    if (n == 1) return a;
    if (is_const(a) && foldable(ipow(a->value, n))) return const_node(ipow(a->value, n));
    return make_node(NodeKind::IntPow, a, nullptr, n);
}

NodePtr s_fn(NodeKind kind, const NodePtr& a) {
    if (is_const(a)) {
        double v = kind == NodeKind::Sin ? std::sin(a->value) : kind == NodeKind::Cos ? std::cos(a->value) : std::exp(a->value);
        if (foldable(v)) return const_node(v);
    }
    return make_node(kind, a);
}

NodePtr rebuild(const Node& n, const NodePtr& self, const NodePtr& l, const NodePtr& r) {
    switch (n.kind) {
    case NodeKind::Constant:
    case NodeKind::Parameter:
    case NodeKind::State:
    case NodeKind::Input: return self;
    case NodeKind::Negate: return s_neg(l);
    case NodeKind::Add: return s_add(l, r);
    case NodeKind::Sub: return s_sub(l, r);
    case NodeKind::Mul: return s_mul(l, r);
    case NodeKind::Div: return s_div(l, r);
    case NodeKind::IntPow: return s_pow(l, n.exponent);
    case NodeKind::Sin:
    case NodeKind::Cos:
    case NodeKind::Exp: return s_fn(n.kind, l);
    }
    return self;
}

class Simplifier {
public:
    NodePtr operator()(const NodePtr& n) {
        if (arity(n->kind) == 0) {
            // Canonicalise leaf constants so the shared 0/1 nodes are used.
            return n->kind == NodeKind::Constant ? const_node(n->value) : n;
        }
        if (auto it = memo_.find(n.get()); it != memo_.end()) return it->second;
        NodePtr l = (*this)(n->lhs);
        NodePtr r = n->rhs ? (*this)(n->rhs) : nullptr;
        NodePtr out = (l == n->lhs && r == n->rhs) ? rebuild_same(n, l, r) : rebuild(*n, n, l, r);
        memo_.emplace(n.get(), out);
        return out;
    }

private:
    // Children unchanged: keep the node itself unless a rule fires at the top.
    static NodePtr rebuild_same(const NodePtr& n, const NodePtr& l, const NodePtr& r) {
        NodePtr out = rebuild(*n, n, l, r);
        if (out->kind == n->kind && out->lhs == l && out->rhs == r && out->exponent == n->exponent) return n;
        return out;
    }

    std::unordered_map<const Node*, NodePtr> memo_;
};

class Differentiator {
public:
    explicit Differentiator(std::string_view wrt) : wrt_(wrt) {}

    NodePtr operator()(const NodePtr& n) {
        switch (n->kind) {
        case NodeKind::Constant:
        case NodeKind::Parameter: return zero_node();
        case NodeKind::State:
        case NodeKind::Input: return n->name == wrt_ ? one_node() : zero_node();
        default: break;
        }
        if (auto it = memo_.find(n.get()); it != memo_.end()) return it->second;
        NodePtr out = derive(n);
        memo_.emplace(n.get(), out);
        return out;
    }

private:
    NodePtr derive(const NodePtr& n) {
        const NodePtr& u = n->lhs;
        const NodePtr& v = n->rhs;
        switch (n->kind) {
        case NodeKind::Negate: return s_neg((*this)(u));
        case NodeKind::Add: return s_add((*this)(u), (*this)(v));
        case NodeKind::Sub: return s_sub((*this)(u), (*this)(v));
        case NodeKind::Mul: {
            NodePtr du = (*this)(u);
            NodePtr dv = (*this)(v);
            return s_add(s_mul(du, v), s_mul(u, dv));
        }
        case NodeKind::Div: {
            NodePtr du = (*this)(u);
            NodePtr dv = (*this)(v);
            if (is_const(dv, 0.0)) return s_div(du, v);
            NodePtr v2 = s_pow(v, 2);
            if (is_const(du, 0.0)) return s_neg(s_div(s_mul(u, dv), v2));
            return s_div(s_sub(s_mul(du, v), s_mul(u, dv)), v2);
        }
        case NodeKind::IntPow: {
            if (n->exponent == 0) return zero_node();
            NodePtr du = (*this)(u);
            if (is_const(du, 0.0)) return zero_node();
            return s_mul(s_mul(const_node(static_cast<double>(n->exponent)), s_pow(u, n->exponent - 1)), du);
        }
        case NodeKind::Sin: return s_mul(s_fn(NodeKind::Cos, u), (*this)(u));
        case NodeKind::Cos: return s_mul(s_neg(s_fn(NodeKind::Sin, u)), (*this)(u));
        case NodeKind::Exp: return s_mul(n, (*this)(u));
        default: return zero_node();
        }
    }

    std::string_view wrt_;
    std::unordered_map<const Node*, NodePtr> memo_;
};

void collect_symbols(const Node* root, NodeKind kind, std::set<std::string>& out) {
    std::unordered_set<const Node*> seen;
    std::vector<const Node*> stack{root};
    while (!stack.empty()) {
        const Node* n = stack.back();
        stack.pop_back();
        if (!seen.insert(n).second) continue;
        if (n->kind == kind) out.insert(n->name);
        if (n->lhs) stack.push_back(n->lhs.get());
        if (n->rhs) stack.push_back(n->rhs.get());
    }
}

// ---------------------------------------------------------------------------
// Printing

int precedence(const Node& n) {
    switch (n.kind) {
    case NodeKind::Add:
    case NodeKind::Sub: return 1;
    case NodeKind::Mul:
    case NodeKind::Div: return 2;
    case NodeKind::Negate: return 3;
    case NodeKind::Constant: return n.value < 0.0 || std::signbit(n.value) ? 3 : 5;
    case NodeKind::IntPow: return 4;
    default: return 5;
    }
}

std::string format_number(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

class Printer {
public:
    explicit Printer(std::size_t budget) : budget_(budget) {}

    void print(const Node& n) {
        if (out_.size() > budget_) return;
        switch (n.kind) {
        case NodeKind::Constant: out_ += format_number(n.value); return;
        case NodeKind::Parameter:
        case NodeKind::State:
        case NodeKind::Input: out_ += n.name; return;
        case NodeKind::Negate:
            out_ += '-';
            // A constant directly under a negation must keep its parentheses,
            // otherwise the parser reads "-2" back as the literal -2.
            if (n.lhs->kind == NodeKind::Constant) {
                out_ += '(';
                print(*n.lhs);
                out_ += ')';
            } else {
                wrap(*n.lhs, 3);
            }
            return;
        case NodeKind::Add: binary(n, " + ", 1); return;
        case NodeKind::Sub: binary(n, " - ", 1); return;
        case NodeKind::Mul: binary(n, " * ", 2); return;
        case NodeKind::Div: binary(n, " / ", 2); return;
        case NodeKind::IntPow:
            wrap(*n.lhs, 5);
            out_ += '^';
            out_ += std::to_string(n.exponent);
            return;
        case NodeKind::Sin: call("sin(", n); return;
        case NodeKind::Cos: call("cos(", n); return;
        case NodeKind::Exp: call("exp(", n); return;
        }
    }

    std::string take() { return std::move(out_); }
    [[nodiscard]] bool truncated() const { return out_.size() > budget_; }

private:
    void binary(const Node& n, const char* op, int prec) {
        wrap(*n.lhs, prec);
        out_ += op;
        wrap(*n.rhs, prec + 1);
    }

    void call(const char* head, const Node& n) {
        out_ += head;
        print(*n.lhs);
        out_ += ')';
    }

    void wrap(const Node& n, int min_prec) {
        if (precedence(n) >= min_prec) {
            print(n);
        } else {
            out_ += '(';
            print(n);
            out_ += ')';
        }
    }

    std::size_t budget_;
    std::string out_;
};

} // namespace

Expression simplify(const Expression& expr) {
    Simplifier s;
    return ExpressionAccess::wrap(s(ExpressionAccess::ptr(expr)));
}

Expression differentiate(const Expression& expr, std::string_view wrt) {
    Differentiator d(wrt);
    // The rewrites inside the differentiator assume simplified operands.
    return ExpressionAccess::wrap(d(ExpressionAccess::ptr(simplify(expr))));
}

std::set<std::string> dependencies(const Expression& expr) {
    return symbols(simplify(expr), NodeKind::State);
}

std::set<std::string> symbols(const Expression& expr, NodeKind kind) {
    std::set<std::string> out;
    collect_symbols(&ExpressionAccess::node(expr), kind, out);
    return out;
}

std::string to_string(const Expression& expr) {
    Printer p(static_cast<std::size_t>(-1) / 2);
    p.print(ExpressionAccess::node(expr));
    return p.take();
}

std::string to_string_truncated(const Expression& expr, std::size_t max_chars) {
    Printer p(max_chars);
    p.print(ExpressionAccess::node(expr));
    bool cut = p.truncated();
    std::string s = p.take();
    if (cut) {
        s.resize(max_chars);
        s += "...";
    }
    return s;
}

double evaluate(const Expression& expr, const Environment& env) {
    Tape tape(expr);
    Tape::Workspace ws;
    double out = 0.0;
    tape.run(tape.bind(env), std::span<double>(&out, 1), ws);
    return out;
}

DualValue dual_evaluate(const Expression& expr, const Environment& env, const std::map<std::string, double>& seed) {
    Tape tape(expr);
    Tape::Workspace ws;
    std::vector<double> values = tape.bind(env);
    std::vector<double> tangents(values.size(), 0.0);
    for (std::size_t i = 0; i < tape.symbols().size(); ++i) {
        const auto& sym = tape.symbols()[i];
        if (sym.kind != NodeKind::State) continue;
        if (auto it = seed.find(sym.name); it != seed.end()) tangents[i] = it->second;
    }
    DualValue out;
    tape.run_dual(values, tangents, std::span<double>(&out.value, 1), std::span<double>(&out.derivative, 1), ws);
    return out;
}

} // namespace obsgraph
