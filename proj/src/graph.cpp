#include "obsgraph/graph.hpp"

#include <algorithm>
#include <stdexcept>
#include <string_view>
#include <unordered_map>

namespace obsgraph {

namespace {

void build_csr(std::size_t n, const std::vector<InferenceDigraph::Edge>& edges, bool transpose,
               std::vector<std::uint32_t>& offsets, std::vector<std::uint32_t>& targets) {
    offsets.assign(n + 1, 0);
    for (const auto& [u, v] : edges) ++offsets[(transpose ? v : u) + 1];
    for (std::size_t i = 0; i < n; ++i) offsets[i + 1] += offsets[i];
    targets.resize(edges.size());
    std::vector<std::uint32_t> cursor(offsets.begin(), offsets.end() - 1);
    // Edges arrive sorted by (u, v), so every list comes out ascending in
    // both orientations: a counting sort is stable.
    for (const auto& [u, v] : edges) {
        if (transpose) {
            targets[cursor[v]++] = u;
        } else {
            targets[cursor[u]++] = v;
        }
    }
}

std::string dot_quote(std::string_view s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
    }
    out += '"';
    return out;
}

} // namespace

InferenceDigraph InferenceDigraph::from_edges(std::vector<std::string> nodes, std::vector<Edge> edges) {
    const std::size_t n = nodes.size();
    for (const auto& [u, v] : edges) {
        if (u >= n || v >= n) throw std::out_of_range("edge endpoint out of range");
    }
    // Two stable counting passes (by target, then by source) sort the edges
    // in O(V + E), keeping construction linear.
    std::vector<InferenceDigraph::Edge> tmp(edges.size());
    std::vector<std::uint32_t> count(n + 1);
    auto pass = [&](auto key, const std::vector<Edge>& from, std::vector<Edge>& to) {
        std::fill(count.begin(), count.end(), 0);
        for (const auto& e : from) ++count[key(e) + 1];
        for (std::size_t i = 0; i < n; ++i) count[i + 1] += count[i];
        for (const auto& e : from) to[count[key(e)]++] = e;
    };
    pass([](const Edge& e) { return e.second; }, edges, tmp);
    pass([](const Edge& e) { return e.first; }, tmp, edges);
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    InferenceDigraph g;
    g.nodes_ = std::move(nodes);
    build_csr(n, edges, false, g.offsets_, g.targets_);
    build_csr(n, edges, true, g.t_offsets_, g.sources_);
    return g;
}

bool InferenceDigraph::has_edge(std::size_t i, std::size_t j) const {
    auto s = successors(i);
    return std::binary_search(s.begin(), s.end(), static_cast<std::uint32_t>(j));
}

std::vector<InferenceDigraph::Edge> InferenceDigraph::edges() const {
    std::vector<Edge> out;
    out.reserve(targets_.size());
    for (std::uint32_t u = 0; u < node_count(); ++u) {
        for (auto v : successors(u)) out.emplace_back(u, v);
    }
    return out;
}

std::vector<std::uint8_t> InferenceDigraph::adjacency_matrix() const {
    const std::size_t n = node_count();
    std::vector<std::uint8_t> m(n * n, 0);
    for (std::size_t u = 0; u < n; ++u) {
        for (auto v : successors(u)) m[u * n + v] = 1;
    }
    return m;
}

InferenceDigraph build_digraph(const DynSystem& system) {
    std::unordered_map<std::string_view, std::uint32_t> index;
    index.reserve(system.states.size());
    for (std::uint32_t i = 0; i < system.states.size(); ++i) index.emplace(system.states[i], i);

    std::vector<InferenceDigraph::Edge> edges;
    auto add = [&](std::uint32_t i, const std::string& name) {
        auto it = index.find(name);
        if (it == index.end()) throw std::invalid_argument("derivative of '" + system.states[i] + "' reads unknown state '" + name + "'");
        edges.emplace_back(i, it->second);
    };
    for (std::uint32_t i = 0; i < system.derivatives.size(); ++i) {
        if (const auto* spec = std::get_if<DependencySpec>(&system.derivatives[i])) {
            for (const auto& name : spec->states) add(i, name);
        } else {
            for (const auto& name : dependencies(std::get<Expression>(system.derivatives[i]))) add(i, name);
        }
    }
    return InferenceDigraph::from_edges(system.states, std::move(edges));
}

SccDecomposition kosaraju(const InferenceDigraph& graph) {
    const std::uint32_t n = static_cast<std::uint32_t>(graph.node_count());
    constexpr std::uint32_t unassigned = ~0u;

    // Pass 1: finishing order on the forward graph. Each frame holds a node
    // and the position of the next successor to try, which reproduces the
    // recursive visit order exactly.
    std::vector<std::uint32_t> order;
    order.reserve(n);
    std::vector<bool> visited(n, false);
    std::vector<std::pair<std::uint32_t, std::uint32_t>> frames;
    for (std::uint32_t s = 0; s < n; ++s) {
        if (visited[s]) continue;
        visited[s] = true;
        frames.emplace_back(s, 0);
        while (!frames.empty()) {
            auto& [u, next] = frames.back();
            auto succ = graph.successors(u);
            if (next < succ.size()) {
                std::uint32_t v = succ[next++];
                if (!visited[v]) {
                    visited[v] = true;
                    frames.emplace_back(v, 0);
                }
            } else {
                order.push_back(u);
                frames.pop_back();
            }
        }
    }

    // Pass 2: pop in reverse finishing order, flood the transposed graph.
    SccDecomposition d;
    d.component_of.assign(n, unassigned);
    std::vector<std::uint32_t> work;
    std::uint32_t count = 0;
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        if (d.component_of[*it] != unassigned) continue;
        d.component_of[*it] = count;
        work.push_back(*it);
        while (!work.empty()) {
            std::uint32_t u = work.back();
            work.pop_back();
            for (auto v : graph.predecessors(u)) {
                if (d.component_of[v] == unassigned) {
                    d.component_of[v] = count;
                    work.push_back(v);
                }
            }
        }
        ++count;
    }

    // Bucket by node index so members come out sorted without a sort.
    std::vector<std::uint32_t> sizes(count, 0);
    for (auto c : d.component_of) ++sizes[c];
    d.components.resize(count);
    for (std::uint32_t c = 0; c < count; ++c) d.components[c].reserve(sizes[c]);
    for (std::uint32_t v = 0; v < n; ++v) d.components[d.component_of[v]].push_back(v);
    return d;
}

void root_sccs(SccDecomposition& decomp, const InferenceDigraph& graph) {
    const std::size_t c = decomp.components.size();
    decomp.root_flags.assign(c, true);
    decomp.condensation_edges.clear();
    for (std::uint32_t u = 0; u < graph.node_count(); ++u) {
        const std::uint32_t cu = decomp.component_of[u];
        for (auto v : graph.successors(u)) {
            const std::uint32_t cv = decomp.component_of[v];
            if (cu == cv) continue;
            decomp.root_flags[cv] = false;
            decomp.condensation_edges.emplace_back(cu, cv);
        }
    }
    auto& ce = decomp.condensation_edges;
    std::sort(ce.begin(), ce.end());
    ce.erase(std::unique(ce.begin(), ce.end()), ce.end());
}

SccDecomposition decompose(const InferenceDigraph& graph) {
    SccDecomposition d = kosaraju(graph);
    root_sccs(d, graph);
    return d;
}

std::string_view to_string(Verdict v) {
    return v == Verdict::Observable ? "observable" : "not-observable";
}

std::vector<MeasuredOutput> measured_outputs(const DynSystem& system) {
    std::unordered_map<std::string_view, std::uint32_t> index;
    for (std::uint32_t i = 0; i < system.states.size(); ++i) index.emplace(system.states[i], i);
    std::vector<MeasuredOutput> out;
    out.reserve(system.outputs.size());
    for (const auto& o : system.outputs) {
        MeasuredOutput m{o.name, {}};
        for (const auto& name : state_dependencies(o.rhs)) {
            auto it = index.find(name);
            if (it == index.end()) throw std::invalid_argument("output '" + o.name + "' reads unknown state '" + name + "'");
            m.states.push_back(it->second);
        }
        out.push_back(std::move(m));
    }
    return out;
}

StructuralReport analyze_structure(InferenceDigraph graph, const std::vector<MeasuredOutput>& outputs) {
    StructuralReport r;
    r.graph = std::move(graph);
    r.decomposition = decompose(r.graph);
    const auto& d = r.decomposition;

    constexpr std::uint32_t not_root = ~0u;
    std::vector<std::uint32_t> root_slot(d.components.size(), not_root);
    for (std::uint32_t c = 0; c < d.components.size(); ++c) {
        if (!d.root_flags[c]) continue;
        root_slot[c] = static_cast<std::uint32_t>(r.roots.size());
        r.roots.push_back({c, {}});
    }
    for (const auto& o : outputs) {
        for (auto v : o.states) {
            auto slot = root_slot[d.component_of.at(v)];
            if (slot == not_root) continue;
            auto& covering = r.roots[slot].covering_outputs;
            // An output reading several members of one root SCC is listed once.
            if (covering.empty() || covering.back() != o.name) covering.push_back(o.name);
        }
    }
    for (const auto& rc : r.roots) {
        if (rc.covering_outputs.empty()) r.uncovered_roots.push_back(rc.component);
    }
    r.verdict = r.uncovered_roots.empty() ? Verdict::Observable : Verdict::NotObservable;
    return r;
}

StructuralReport check_structural_observability(const DynSystem& system) {
    return analyze_structure(build_digraph(system), measured_outputs(system));
}

std::vector<std::string> suggest_placement(const StructuralReport& report) {
    std::vector<std::string> out;
    for (auto c : report.uncovered_roots) {
        out.push_back(report.graph.nodes()[report.decomposition.components[c].front()]);
    }
    return out;
}

std::string export_digraph(const InferenceDigraph& graph, ExportFormat format, const SccDecomposition* decomp) {
    const auto& nodes = graph.nodes();
    std::string out;
    if (format == ExportFormat::Csv) {
        out = "state";
        for (const auto& name : nodes) out += "," + name;
        out += "\n";
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            out += nodes[i];
            auto succ = graph.successors(i);
            auto it = succ.begin();
            for (std::size_t j = 0; j < nodes.size(); ++j) {
                bool edge = it != succ.end() && *it == j;
                if (edge) ++it;
                out += edge ? ",1" : ",0";
            }
            out += "\n";
        }
        return out;
    }

    out = "digraph inference {\n";
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        out += "  " + dot_quote(nodes[i]);
        if (decomp != nullptr) {
            auto c = decomp->component_of[i];
            out += " [scc=" + std::to_string(c);
            if (!decomp->root_flags.empty() && decomp->root_flags[c]) out += ", root=true, style=filled, fillcolor=lightblue";
            out += "]";
        }
        out += ";\n";
    }
    for (const auto& [u, v] : graph.edges()) {
        out += "  " + dot_quote(nodes[u]) + " -> " + dot_quote(nodes[v]) + ";\n";
    }
    out += "}\n";
    return out;
}

} // namespace obsgraph
