#include "obsgraph/tape.hpp"

#include "expr_node.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <unordered_map>

namespace obsgraph {

using detail::Node;

namespace {

struct InstrKey {
    NodeKind kind;
    std::uint32_t exponent;
    std::uint32_t a;
    std::uint32_t b;
    std::uint64_t bits;

    friend bool operator==(const InstrKey&, const InstrKey&) = default;
};

struct InstrKeyHash {
    std::size_t operator()(const InstrKey& k) const noexcept {
        std::uint64_t h = static_cast<std::uint64_t>(k.kind) * 0x9E3779B97F4A7C15ull;
        h ^= (static_cast<std::uint64_t>(k.a) << 32 | k.b) + 0x9E3779B97F4A7C15ull + (h << 6) + (h >> 2);
        h ^= k.bits + 0x9E3779B97F4A7C15ull + (h << 6) + (h >> 2);
        h ^= k.exponent + (h << 6) + (h >> 2);
        return static_cast<std::size_t>(h);
    }
};

std::string path_string(const std::vector<std::uint8_t>& path, std::size_t root, std::size_t root_count) {
    std::string s;
    if (root_count > 1) s = "[" + std::to_string(root) + "]";
    for (auto step : path) {
        s += '/';
        s += static_cast<char>('0' + step);
    }
    return s;
}

double ipow(double x, std::uint32_t n) {
    double result = 1.0;
    while (n) {
        if (n & 1u) result *= x;
        n >>= 1u;
        if (n) x *= x;
    }
    return result;
}

} // namespace


Tape::Tape(const Expression& root) { compile(std::span<const Expression>(&root, 1)); }

Tape::Tape(std::span<const Expression> roots) { compile(roots); }

void Tape::compile(std::span<const Expression> roots) {
    std::unordered_map<const Node*, std::uint32_t> by_node;
    std::unordered_map<InstrKey, std::uint32_t, InstrKeyHash> by_key;
    std::unordered_map<std::string, std::uint32_t> symbol_ids[3];
    std::vector<std::uint8_t> path;
    std::size_t root_index = 0;

    auto symbol_slot = [&](const Node& n) {
        int bucket = n.kind == NodeKind::State ? 0 : n.kind == NodeKind::Input ? 1 : 2;
        auto [it, fresh] = symbol_ids[bucket].try_emplace(n.name, static_cast<std::uint32_t>(symbols_.size()));
        if (fresh) symbols_.push_back({n.kind, n.name});
        return it->second;
    };

    auto intern = [&](const InstrKey& key, const Instr& instr) {
        auto [it, fresh] = by_key.try_emplace(key, static_cast<std::uint32_t>(code_.size()));
        if (fresh) code_.push_back(instr);
        return std::pair{it->second, fresh};
    };

    // Recursive post-order; depth is bounded by expression depth, not size.
    auto visit = [&](auto&& self, const std::shared_ptr<const Node>& ptr) -> std::uint32_t {
        const Node& n = *ptr;
        if (auto it = by_node.find(&n); it != by_node.end()) return it->second;
        Instr instr{n.kind};
        InstrKey key{n.kind, 0, 0, 0, 0};
        switch (n.kind) {
        case NodeKind::Constant:
            instr.value = n.value;
            key.bits = std::bit_cast<std::uint64_t>(n.value);
            break;
        case NodeKind::Parameter:
        case NodeKind::State:
        case NodeKind::Input:
            instr.a = key.a = symbol_slot(n);
            break;
        default:
            path.push_back(0);
            instr.a = key.a = self(self, n.lhs);
            path.pop_back();
            if (n.rhs) {
                path.push_back(1);
                instr.b = key.b = self(self, n.rhs);
                path.pop_back();
            }
            instr.exponent = key.exponent = n.exponent;
            break;
        }
        auto [slot, fresh] = intern(key, instr);
        if (fresh && n.kind == NodeKind::Div) {
            div_sites_.push_back({slot, ExpressionAccess::wrap(n.rhs), path_string(path, root_index, roots.size())});
        }
        by_node.emplace(&n, slot);
        return slot;
    };

    roots_.reserve(roots.size());
    for (root_index = 0; root_index < roots.size(); ++root_index) {
        roots_.push_back(visit(visit, ExpressionAccess::ptr(roots[root_index])));
    }
}

std::optional<std::size_t> Tape::find_symbol(NodeKind kind, std::string_view name) const {
    for (std::size_t i = 0; i < symbols_.size(); ++i) {
        if (symbols_[i].kind == kind && symbols_[i].name == name) return i;
    }
    return std::nullopt;
}

std::vector<double> Tape::bind(const Environment& env) const {
    std::vector<double> values(symbols_.size());
    for (std::size_t i = 0; i < symbols_.size(); ++i) {
        const auto& sym = symbols_[i];
        const auto& table = sym.kind == NodeKind::State ? env.states : sym.kind == NodeKind::Input ? env.inputs : env.parameters;
        auto it = table.find(sym.name);
        if (it == table.end()) throw EvaluationError(EvaluationError::Kind::UnboundSymbol, sym.name, {});
        values[i] = it->second;
    }
    return values;
}

void Tape::throw_division(std::size_t instr) const {
    auto it = std::lower_bound(div_sites_.begin(), div_sites_.end(), instr,
                               [](const DivSite& s, std::size_t i) { return s.instr < i; });
    if (it == div_sites_.end() || it->instr != instr) {
        throw EvaluationError(EvaluationError::Kind::DivisionByZero, "?", "?");
    }
    throw EvaluationError(EvaluationError::Kind::DivisionByZero, to_string_truncated(it->denominator, 120), it->path);
}

void Tape::run(std::span<const double> sym, std::span<double> out, Workspace& ws, double* min_abs_den) const {
    auto& v = ws.values;
    v.resize(code_.size());
    double min_den = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < code_.size(); ++i) {
        const Instr& in = code_[i];
        switch (in.kind) {
        case NodeKind::Constant: v[i] = in.value; break;
        case NodeKind::Parameter:
        case NodeKind::State:
        case NodeKind::Input: v[i] = sym[in.a]; break;
        case NodeKind::Negate: v[i] = -v[in.a]; break;
        case NodeKind::Add: v[i] = v[in.a] + v[in.b]; break;
        case NodeKind::Sub: v[i] = v[in.a] - v[in.b]; break;
        case NodeKind::Mul: v[i] = v[in.a] * v[in.b]; break;
        case NodeKind::Div: {
            double den = v[in.b];
            if (den == 0.0) throw_division(i);
            min_den = std::min(min_den, std::abs(den));
            v[i] = v[in.a] / den;
            break;
        }
        case NodeKind::IntPow: v[i] = ipow(v[in.a], in.exponent); break;
        case NodeKind::Sin: v[i] = std::sin(v[in.a]); break;
        case NodeKind::Cos: v[i] = std::cos(v[in.a]); break;
        case NodeKind::Exp: v[i] = std::exp(v[in.a]); break;
        }
    }
    for (std::size_t r = 0; r < roots_.size(); ++r) out[r] = v[roots_[r]];
    if (min_abs_den) *min_abs_den = min_den;
}

void Tape::run_dual(std::span<const double> sym, std::span<const double> tan, std::span<double> out_values,
                    std::span<double> out_tangents, Workspace& ws) const {
    auto& v = ws.values;
    auto& d = ws.tangents;
    v.resize(code_.size());
    d.resize(code_.size());
    for (std::size_t i = 0; i < code_.size(); ++i) {
        const Instr& in = code_[i];
        switch (in.kind) {
        case NodeKind::Constant:
            v[i] = in.value;
            d[i] = 0.0;
            break;
        case NodeKind::Parameter:
        case NodeKind::State:
        case NodeKind::Input:
            v[i] = sym[in.a];
            d[i] = tan[in.a];
            break;
        case NodeKind::Negate:
            v[i] = -v[in.a];
            d[i] = -d[in.a];
            break;
        case NodeKind::Add:
            v[i] = v[in.a] + v[in.b];
            d[i] = d[in.a] + d[in.b];
            break;
        case NodeKind::Sub:
            v[i] = v[in.a] - v[in.b];
            d[i] = d[in.a] - d[in.b];
            break;
        case NodeKind::Mul:
            v[i] = v[in.a] * v[in.b];
            d[i] = d[in.a] * v[in.b] + v[in.a] * d[in.b];
            break;
        case NodeKind::Div: {
            double den = v[in.b];
            if (den == 0.0) throw_division(i);
            v[i] = v[in.a] / den;
            d[i] = (d[in.a] * den - v[in.a] * d[in.b]) / (den * den);
            break;
        }
        case NodeKind::IntPow: {
            double x = v[in.a];
            v[i] = ipow(x, in.exponent);
            d[i] = in.exponent == 0 ? 0.0 : static_cast<double>(in.exponent) * ipow(x, in.exponent - 1) * d[in.a];
            break;
        }
        case NodeKind::Sin:
            v[i] = std::sin(v[in.a]);
            d[i] = std::cos(v[in.a]) * d[in.a];
            break;
        case NodeKind::Cos:
            v[i] = std::cos(v[in.a]);
            d[i] = -std::sin(v[in.a]) * d[in.a];
            break;
        case NodeKind::Exp:
            v[i] = std::exp(v[in.a]);
            d[i] = v[i] * d[in.a];
            break;
        }
    }
    for (std::size_t r = 0; r < roots_.size(); ++r) {
        out_values[r] = v[roots_[r]];
        out_tangents[r] = d[roots_[r]];
    }
}

} // namespace obsgraph
