#pragma once

#include "obsgraph/system.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace obsgraph {

/// Node-per-state digraph. Edge i -> j means the equation of state i reads
/// state j. Adjacency is stored as sorted CSR lists (forward and transposed);
/// the dense matrix is materialized only when asked for.
class InferenceDigraph {
public:
    using Edge = std::pair<std::uint32_t, std::uint32_t>;

    InferenceDigraph() = default;

    /// Duplicate edges are merged.
    [[nodiscard]] static InferenceDigraph from_edges(std::vector<std::string> nodes, std::vector<Edge> edges);

    [[nodiscard]] std::size_t node_count() const { return nodes_.size(); }
    [[nodiscard]] std::size_t edge_count() const { return targets_.size(); }
    [[nodiscard]] const std::vector<std::string>& nodes() const { return nodes_; }

    [[nodiscard]] std::span<const std::uint32_t> successors(std::size_t i) const {
        return {targets_.data() + offsets_[i], targets_.data() + offsets_[i + 1]};
    }
    [[nodiscard]] std::span<const std::uint32_t> predecessors(std::size_t i) const {
        return {sources_.data() + t_offsets_[i], sources_.data() + t_offsets_[i + 1]};
    }

    [[nodiscard]] bool has_edge(std::size_t i, std::size_t j) const;
    /// Edges in row-major order.
    [[nodiscard]] std::vector<Edge> edges() const;
    /// Row-major n*n 0/1 matrix.
    [[nodiscard]] std::vector<std::uint8_t> adjacency_matrix() const;

    friend bool operator==(const InferenceDigraph&, const InferenceDigraph&) = default;

private:
    std::vector<std::string> nodes_;
    std::vector<std::uint32_t> offsets_{0};
    std::vector<std::uint32_t> targets_;
    std::vector<std::uint32_t> t_offsets_{0};
    std::vector<std::uint32_t> sources_;
};

[[nodiscard]] InferenceDigraph build_digraph(const DynSystem& system);

struct SccDecomposition {
    /// Node indices per component, ascending; components in stack-pop order.
    std::vector<std::vector<std::uint32_t>> components;
    std::vector<std::uint32_t> component_of;
    std::vector<bool> root_flags;
    /// Distinct (from, to) component pairs, from != to, sorted.
    std::vector<std::pair<std::uint32_t, std::uint32_t>> condensation_edges;

    friend bool operator==(const SccDecomposition&, const SccDecomposition&) = default;
};

/// Two-pass Kosaraju-Sharir with explicit stacks. Fills components and
/// component_of only.
[[nodiscard]] SccDecomposition kosaraju(const InferenceDigraph& graph);

/// Sets root_flags and condensation_edges from one scan over the edges.
void root_sccs(SccDecomposition& decomp, const InferenceDigraph& graph);

/// kosaraju followed by root_sccs.
[[nodiscard]] SccDecomposition decompose(const InferenceDigraph& graph);

enum class Verdict { Observable, NotObservable };

[[nodiscard]] std::string_view to_string(Verdict v);

struct RootCoverage {
    std::uint32_t component;
    std::vector<std::string> covering_outputs;  // output declaration order
};

struct StructuralReport {
    InferenceDigraph graph;
    SccDecomposition decomposition;
    std::vector<RootCoverage> roots;               // component order
    std::vector<std::uint32_t> uncovered_roots;    // component indices
    Verdict verdict = Verdict::NotObservable;
};

/// An output reduced to the state indices it reads.
struct MeasuredOutput {
    std::string name;
    std::vector<std::uint32_t> states;
};

[[nodiscard]] std::vector<MeasuredOutput> measured_outputs(const DynSystem& system);

/// Decomposition plus root coverage on an already built digraph.
[[nodiscard]] StructuralReport analyze_structure(InferenceDigraph graph, const std::vector<MeasuredOutput>& outputs);

/// build_digraph, measured_outputs and analyze_structure in one call.
[[nodiscard]] StructuralReport check_structural_observability(const DynSystem& system);

/// Lowest-index member of every uncovered root SCC, in component order.
[[nodiscard]] std::vector<std::string> suggest_placement(const StructuralReport& report);

enum class ExportFormat { Dot, Csv };

/// `decomp` may be null; when given, root-SCC members are annotated in dot.
[[nodiscard]] std::string export_digraph(const InferenceDigraph& graph, ExportFormat format,
                                         const SccDecomposition* decomp = nullptr);

} // namespace obsgraph
