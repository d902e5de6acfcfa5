#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace oracle {

using obsgraph::NodeKind;

double uniform(std::mt19937_64& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

namespace {

std::optional<double> walk(const Expression& e, const Environment& env, double& min_den) {
    auto lookup = [](const std::map<std::string, double>& m, const std::string& k) -> std::optional<double> {
        auto it = m.find(k);
        if (it == m.end()) return std::nullopt;
        return it->second;
    };
    switch (e.kind()) {
    case NodeKind::Constant: return e.value();
    case NodeKind::State: return lookup(env.states, e.name());
    case NodeKind::Input: return lookup(env.inputs, e.name());
    case NodeKind::Parameter: return lookup(env.parameters, e.name());
    default: break;
    }
    auto a = walk(e.child(0), env, min_den);
    if (!a) return std::nullopt;
    switch (e.kind()) {
    case NodeKind::Negate: return -*a;
    case NodeKind::Sin: return std::sin(*a);
    case NodeKind::Cos: return std::cos(*a);
    case NodeKind::Exp: return std::exp(*a);
    case NodeKind::IntPow: {
        double r = 1.0;
        for (std::uint32_t i = 0; i < e.exponent(); ++i) r *= *a;
        return r;
    }
    default: break;
    }
    auto b = walk(e.child(1), env, min_den);
    if (!b) return std::nullopt;
    switch (e.kind()) {
    case NodeKind::Add: return *a + *b;
    case NodeKind::Sub: return *a - *b;
    case NodeKind::Mul: return *a * *b;
    case NodeKind::Div:
        if (*b == 0.0) return std::nullopt;
        min_den = std::min(min_den, std::abs(*b));
        return *a / *b;
    default: return std::nullopt;
    }
}

} // namespace

std::optional<NaiveResult> naive_eval(const Expression& e, const Environment& env) {
    double min_den = std::numeric_limits<double>::infinity();
    auto v = walk(e, env, min_den);
    if (!v) return std::nullopt;
    return NaiveResult{*v, min_den};
}

Expression random_expression(std::mt19937_64& rng, const ExprGenConfig& cfg) {
    auto pick = [&](std::size_t n) { return static_cast<std::size_t>(std::uniform_int_distribution<std::size_t>(0, n - 1)(rng)); };
    auto leaf = [&]() -> Expression {
        switch (pick(6)) {
        case 0: return Expression::constant(std::round(uniform(rng, -3.0, 3.0) * 4.0) / 4.0);
        case 1: return Expression::input(cfg.inputs[pick(cfg.inputs.size())]);
        case 2: return Expression::parameter(cfg.params[pick(cfg.params.size())]);
        default: return Expression::state(cfg.states[pick(cfg.states.size())]);
        }
    };
    auto rec = [&](auto&& self, int depth) -> Expression {
        if (depth <= 0 || pick(4) == 0) return leaf();
        switch (pick(11)) {
        case 0: return -self(self, depth - 1);
        case 1:
        case 2: return self(self, depth - 1) + self(self, depth - 1);
        case 3: return self(self, depth - 1) - self(self, depth - 1);
        case 4:
        case 5: return self(self, depth - 1) * self(self, depth - 1);
        case 6: return self(self, depth - 1) / self(self, depth - 1);
        case 7: return obsgraph::pow(self(self, depth - 1), static_cast<std::uint32_t>(pick(5)));
        case 8: return obsgraph::sin(self(self, depth - 1));
        case 9: return obsgraph::cos(self(self, depth - 1));
        default: return obsgraph::exp(self(self, depth - 1));
        }
    };
    return rec(rec, cfg.max_depth);
}

Environment random_environment(std::mt19937_64& rng, const ExprGenConfig& cfg) {
    Environment env;
    for (const auto& x : cfg.states) env.states[x] = uniform(rng, -2.0, 2.0);
    for (const auto& u : cfg.inputs) env.inputs[u] = uniform(rng, -2.0, 2.0);
    for (const auto& p : cfg.params) env.parameters[p] = uniform(rng, 0.5, 1.5);
    return env;
}

std::vector<char> reachability(std::size_t n, const std::vector<std::pair<std::uint32_t, std::uint32_t>>& edges) {
    std::vector<char> r(n * n, 0);
    for (std::size_t i = 0; i < n; ++i) r[i * n + i] = 1;
    for (const auto& [u, v] : edges) r[u * n + v] = 1;
    for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t i = 0; i < n; ++i) {
            if (!r[i * n + k]) continue;
            for (std::size_t j = 0; j < n; ++j) {
                if (r[k * n + j]) r[i * n + j] = 1;
            }
        }
    }
    return r;
}

std::vector<std::vector<std::uint32_t>> scc_by_closure(std::size_t n, const std::vector<std::pair<std::uint32_t, std::uint32_t>>& edges) {
    auto r = reachability(n, edges);
    std::vector<std::vector<std::uint32_t>> classes;
    std::vector<char> taken(n, 0);
    for (std::uint32_t i = 0; i < n; ++i) {
        if (taken[i]) continue;
        std::vector<std::uint32_t> cls;
        for (std::uint32_t j = i; j < n; ++j) {
            if (r[i * n + j] && r[j * n + i]) {
                cls.push_back(j);
                taken[j] = 1;
            }
        }
        classes.push_back(std::move(cls));
    }
    return classes;
}

std::vector<std::pair<std::uint32_t, std::uint32_t>> random_edges(std::mt19937_64& rng, std::size_t n, double density) {
    std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
    std::bernoulli_distribution coin(density);
    for (std::uint32_t i = 0; i < n; ++i) {
        for (std::uint32_t j = 0; j < n; ++j) {
            if (coin(rng)) edges.emplace_back(i, j);
        }
    }
    return edges;
}

obsgraph::InferenceDigraph random_digraph(std::mt19937_64& rng, std::size_t n, double density) {
    std::vector<std::string> names;
    for (std::size_t i = 0; i < n; ++i) names.push_back("v" + std::to_string(i));
    return obsgraph::InferenceDigraph::from_edges(std::move(names), random_edges(rng, n, density));
}

obsgraph::DynSystem random_system(std::mt19937_64& rng, std::size_t n, double density, const std::vector<std::size_t>& measured) {
    obsgraph::DynSystem s;
    s.name = "random";
    for (std::size_t i = 0; i < n; ++i) s.states.push_back("x" + std::to_string(i + 1));
    s.parameters.push_back({"k", 1.3});
    std::bernoulli_distribution coin(density);
    std::uniform_int_distribution<int> shape(0, 3);
    auto x = [&](std::size_t j) { return Expression::state(s.states[j]); };
    for (std::size_t i = 0; i < n; ++i) {
        Expression rhs;
        bool any = false;
        for (std::size_t j = 0; j < n; ++j) {
            if (!coin(rng)) continue;
            double c = uniform(rng, 0.5, 2.0) * (coin(rng) ? 1.0 : -1.0);
            Expression term;
            switch (shape(rng)) {
            case 0: term = Expression::constant(c) * x(j); break;
            case 1: term = Expression::constant(c) * obsgraph::sin(x(j)); break;
            case 2: term = Expression::constant(c) * obsgraph::pow(x(j), 2) + x(j); break;
            default: term = Expression::parameter("k") * x(j) * obsgraph::cos(x(j)); break;
            }
            rhs = any ? rhs + term : term;
            any = true;
        }
        if (!any) rhs = Expression::constant(uniform(rng, -1.0, 1.0));
        s.derivatives.emplace_back(rhs);
    }
    for (auto j : measured) s.outputs.push_back({"y_" + s.states[j], x(j)});
    return s;
}

} // namespace oracle
