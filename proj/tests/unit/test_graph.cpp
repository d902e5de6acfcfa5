#include "obsgraph/catalog.hpp"
#include "obsgraph/dsl.hpp"
#include "obsgraph/graph.hpp"
#include "obsgraph/synthetic.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>

using namespace obsgraph;

namespace {

using EdgeList = std::vector<std::pair<std::uint32_t, std::uint32_t>>;

std::vector<std::string> names(const InferenceDigraph& g, const std::vector<std::uint32_t>& ids) {
    std::vector<std::string> out;
    for (auto i : ids) out.push_back(g.nodes()[i]);
    return out;
}

// Single-machine reference rows, in state order.
const char* const case1_matrix[] = {
    "1110100",
    "1110000",
    "0001000",
    "1111000",
    "0000101",
    "0000110",
    "0000111",
};

// Verbatim three-machine matrix; columns Ed1-3 Eq1-3 delta1-3 omega1-3 Efd1-3 Rf1-3 VR1-3.
const char* const table_literal[] = {
    "111111111000000000000", "111111111000000000000", "111111111000000000000",
    "111111111000100000000", "111111111000010000000", "111111111000001000000",
    "000000000100000000000", "000000000010000000000", "000000000001000000000",
    "111111111100000000000", "111111111010000000000", "111111111001000000000",
    "000000000000100100000", "000000000000010010000", "000000000000001001000",
    "000000000000100100000", "000000000000010010000", "000000000000001001000",
    "000000000000100100100", "000000000000010010010", "000000000000001001001",
};

std::vector<std::uint8_t> to_matrix(const char* const* rows, std::size_t n) {
    std::vector<std::uint8_t> m;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) m.push_back(rows[i][j] == '1' ? 1 : 0);
    }
    return m;
}

void check_invariants(const InferenceDigraph& g, const SccDecomposition& d, const EdgeList& edges) {
    const std::size_t n = g.node_count();
    auto reach = oracle::reachability(n, edges);
    // Partition.
    std::vector<int> seen(n, 0);
    for (std::uint32_t c = 0; c < d.components.size(); ++c) {
        REQUIRE_FALSE(d.components[c].empty());
        CHECK(std::is_sorted(d.components[c].begin(), d.components[c].end()));
        for (auto v : d.components[c]) {
            ++seen[v];
            CHECK(d.component_of[v] == c);
        }
    }
    CHECK(std::all_of(seen.begin(), seen.end(), [](int k) { return k == 1; }));
    // Mutual reachability within, none across.
    for (std::size_t u = 0; u < n; ++u) {
        for (std::size_t v = 0; v < n; ++v) {
            bool mutual = reach[u * n + v] && reach[v * n + u];
            if ((d.component_of[u] == d.component_of[v]) != mutual) {
                FAIL_CHECK("scc mismatch at " << u << "," << v);
                return;
            }
        }
    }
    // Root flags and condensation acyclicity.
    std::vector<bool> has_incoming(d.components.size(), false);
    for (const auto& [a, b] : d.condensation_edges) {
        CHECK(a != b);
        has_incoming[b] = true;
    }
    for (std::size_t c = 0; c < d.components.size(); ++c) CHECK(d.root_flags[c] == !has_incoming[c]);
    for (const auto& [a, b] : d.condensation_edges) {
        auto u = d.components[a].front(), v = d.components[b].front();
        CHECK_FALSE(reach[v * n + u]);
    }
    // Every node is reachable from some root member.
    for (std::size_t v = 0; v < n; ++v) {
        bool from_root = false;
        for (std::size_t c = 0; c < d.components.size() && !from_root; ++c) {
            if (d.root_flags[c]) from_root = reach[d.components[c].front() * n + v];
        }
        CHECK(from_root);
    }
}

DynSystem strip_outputs(DynSystem s) {
    s.outputs.clear();
    return s;
}

} // namespace

TEST_SUITE("graph") {

TEST_CASE("four-state example: six edges, one root SCC") {
    auto g = build_digraph(get_model("example1_y1"));
    EdgeList expected{{0, 0}, {0, 1}, {0, 3}, {1, 2}, {2, 0}, {3, 3}};
    CHECK(g.edges() == expected);
    auto d = decompose(g);
    REQUIRE(d.components.size() == 2);
    CHECK(names(g, d.components[0]) == std::vector<std::string>{"x1", "x2", "x3"});
    CHECK(names(g, d.components[1]) == std::vector<std::string>{"x4"});
    CHECK(d.root_flags == std::vector<bool>{true, false});
}

TEST_CASE("constant derivative gives an empty row") {
    auto r = parse("system s\nstates a b\nparams k = 1\nderiv a = k\nderiv b = a\n");
    REQUIRE(r.ok());
    auto g = build_digraph(*r.system);
    CHECK(g.successors(0).empty());
    CHECK(g.edges() == EdgeList{{1, 0}});
}

TEST_CASE("single self-loop is one component") {
    auto g = InferenceDigraph::from_edges({"x"}, {{0, 0}});
    auto d = decompose(g);
    CHECK(d.components.size() == 1);
    CHECK(d.root_flags == std::vector<bool>{true});
}

TEST_CASE("empty graph") {
    auto g = InferenceDigraph::from_edges({}, {});
    auto d = decompose(g);
    CHECK(d.components.empty());
    CHECK(export_digraph(g, ExportFormat::Csv) == "state\n");
    DynSystem empty;
    empty.name = "empty";
    CHECK(check_structural_observability(empty).verdict == Verdict::Observable);
}

TEST_CASE("single machine adjacency matches the reference matrix") {
    auto s = get_model("wscc_decentralized");
    auto g = build_digraph(s);
    CHECK(g.nodes() == std::vector<std::string>{"Eq1", "Ed1", "delta1", "omega1", "Efd1", "Rf1", "VR1"});
    CHECK(g.adjacency_matrix() == to_matrix(case1_matrix, 7));
    CHECK(g.edge_count() == 19);

    auto report = check_structural_observability(s);
    const auto& d = report.decomposition;
    REQUIRE(d.components.size() == 2);
    REQUIRE(report.roots.size() == 1);
    CHECK(names(g, d.components[report.roots[0].component]) ==
          std::vector<std::string>{"Eq1", "Ed1", "delta1", "omega1"});
    CHECK(report.roots[0].covering_outputs == std::vector<std::string>{"ID", "IQ"});
    CHECK(report.verdict == Verdict::Observable);
    for (std::uint32_t c = 0; c < d.components.size(); ++c) {
        if (!d.root_flags[c]) CHECK(names(g, d.components[c]) == std::vector<std::string>{"Efd1", "Rf1", "VR1"});
    }
}

TEST_CASE("single machine csv export writes zeros explicitly") {
    auto g = build_digraph(get_model("wscc_decentralized"));
    std::string expected = "state,Eq1,Ed1,delta1,omega1,Efd1,Rf1,VR1\n";
    for (std::size_t i = 0; i < 7; ++i) {
        expected += g.nodes()[i];
        for (char c : std::string(case1_matrix[i])) expected += std::string(",") + c;
        expected += "\n";
    }
    CHECK(export_digraph(g, ExportFormat::Csv) == expected);
}

TEST_CASE("centralized structural fixture follows the reduced-model dependency sets") {
    auto s = get_model("wscc_centralized_structural");
    auto g = build_digraph(s);
    REQUIRE(g.node_count() == 21);
    // The verbatim matrix differs only in the Efd rows, which read Efd and VR here.
    auto literal = to_matrix(table_literal, 21);
    auto m = g.adjacency_matrix();
    for (std::size_t i = 0; i < 21; ++i) {
        CAPTURE(g.nodes()[i]);
        for (std::size_t j = 0; j < 21; ++j) {
            std::uint8_t want = literal[i * 21 + j];
            if (i >= 12 && i < 15) {
                want = (j == i || j == i + 6) ? 1 : 0;
            }
            CHECK(m[i * 21 + j] == want);
        }
    }
    auto report = check_structural_observability(s);
    const auto& d = report.decomposition;
    CHECK(d.components.size() == 4);
    REQUIRE(report.roots.size() == 1);
    const auto& root = d.components[report.roots[0].component];
    CHECK(root.size() == 12);
    CHECK(root.back() == 11);
    for (std::uint32_t c = 0; c < d.components.size(); ++c) {
        if (c != report.roots[0].component) CHECK(d.components[c].size() == 3);
    }
    CHECK(report.verdict == Verdict::Observable);
    CHECK(report.roots[0].covering_outputs.size() == 6);
}

TEST_CASE("verbatim matrix fixture loads unchanged and has extra roots") {
    auto s = get_model("tableII_literal");
    auto g = build_digraph(s);
    CHECK(g.adjacency_matrix() == to_matrix(table_literal, 21));
    auto d = decompose(g);
    std::size_t roots = static_cast<std::size_t>(std::count(d.root_flags.begin(), d.root_flags.end(), true));
    CHECK(roots == 4);
}

TEST_CASE("coverage verdicts for the three output variants") {
    CHECK(check_structural_observability(get_model("example1_y1")).verdict == Verdict::Observable);
    CHECK(check_structural_observability(get_model("example1_y2")).verdict == Verdict::Observable);
    auto r3 = check_structural_observability(get_model("example1_y3"));
    CHECK(r3.verdict == Verdict::NotObservable);
    REQUIRE(r3.uncovered_roots.size() == 1);
    CHECK(names(r3.graph, r3.decomposition.components[r3.uncovered_roots[0]]) ==
          std::vector<std::string>{"x1", "x2", "x3"});
    CHECK(suggest_placement(r3) == std::vector<std::string>{"x1"});
}

TEST_CASE("placement suggestions") {
    CHECK(suggest_placement(check_structural_observability(strip_outputs(get_model("example1_y1")))) ==
          std::vector<std::string>{"x1"});
    CHECK(suggest_placement(check_structural_observability(strip_outputs(get_model("wscc_centralized_structural")))) ==
          std::vector<std::string>{"Ed1"});
    CHECK(suggest_placement(check_structural_observability(get_model("wscc_decentralized"))).empty());
}

TEST_CASE("suggested placement always makes the system structurally observable") {
    std::mt19937_64 rng(31);
    for (int i = 0; i < 200; ++i) {
        std::size_t n = 1 + rng() % 30;
        auto edges = oracle::random_edges(rng, n, oracle::uniform(rng, 0.0, 0.3));
        std::vector<std::string> nodes;
        for (std::size_t k = 0; k < n; ++k) nodes.push_back("s" + std::to_string(k));
        auto g = InferenceDigraph::from_edges(nodes, edges);
        auto report = analyze_structure(g, {});
        auto placed = suggest_placement(report);
        CHECK(placed.size() == report.uncovered_roots.size());
        std::vector<MeasuredOutput> outs;
        for (const auto& name : placed) {
            auto idx = static_cast<std::uint32_t>(std::stoul(name.substr(1)));
            outs.push_back({"m_" + name, {idx}});
        }
        CHECK(analyze_structure(g, outs).verdict == Verdict::Observable);
    }
}

TEST_CASE("dot export lists every node and edge and marks roots") {
    auto s = get_model("example1_y1");
    auto report = check_structural_observability(s);
    auto dot = export_digraph(report.graph, ExportFormat::Dot, &report.decomposition);
    std::size_t arrows = 0;
    for (std::size_t pos = 0; (pos = dot.find(" -> ", pos)) != std::string::npos; ++pos) ++arrows;
    CHECK(arrows == 6);
    CHECK(dot.starts_with("digraph inference {\n"));
    CHECK(dot.find("\"x1\" [scc=0, root=true") != std::string::npos);
    CHECK(dot.find("\"x4\" [scc=1];") != std::string::npos);
    CHECK(dot.find("\"x1\" -> \"x4\";") != std::string::npos);
}

TEST_CASE("property: kosaraju matches the transitive-closure oracle on 500 random digraphs") {
    std::mt19937_64 rng(37);
    int mismatches = 0;
    for (int i = 0; i < 500; ++i) {
        std::size_t n = 1 + rng() % 10;
        auto edges = oracle::random_edges(rng, n, oracle::uniform(rng, 0.0, 0.6));
        std::vector<std::string> nodes(n, "v");
        for (std::size_t k = 0; k < n; ++k) nodes[k] += std::to_string(k);
        auto d = kosaraju(InferenceDigraph::from_edges(nodes, edges));
        auto got = d.components;
        std::sort(got.begin(), got.end());
        if (got != oracle::scc_by_closure(n, edges)) ++mismatches;
    }
    CHECK(mismatches == 0);
}

TEST_CASE("property: decomposition invariants on graphs up to 200 nodes") {
    std::mt19937_64 rng(41);
    for (int i = 0; i < 60; ++i) {
        std::size_t n = 1 + rng() % 200;
        double density = (i % 10) / 9.0 * (i % 3 == 0 ? 1.0 : 0.05);
        auto edges = oracle::random_edges(rng, n, density);
        std::vector<std::string> nodes;
        for (std::size_t k = 0; k < n; ++k) nodes.push_back("v" + std::to_string(k));
        auto g = InferenceDigraph::from_edges(nodes, edges);
        std::sort(edges.begin(), edges.end());
        edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
        CHECK(g.edges() == edges);
        for (std::uint32_t v = 0; v < n; ++v) {
            for (auto u : g.predecessors(v)) CHECK(g.has_edge(u, v));
        }
        check_invariants(g, decompose(g), edges);
    }
}

TEST_CASE("property: adding an output never loses observability") {
    std::mt19937_64 rng(43);
    for (int i = 0; i < 200; ++i) {
        std::size_t n = 1 + rng() % 15;
        auto edges = oracle::random_edges(rng, n, oracle::uniform(rng, 0.0, 0.4));
        std::vector<std::string> nodes;
        for (std::size_t k = 0; k < n; ++k) nodes.push_back("v" + std::to_string(k));
        auto g = InferenceDigraph::from_edges(nodes, edges);
        std::vector<MeasuredOutput> outs;
        bool was_observable = analyze_structure(g, outs).verdict == Verdict::Observable;
        for (int k = 0; k < 4; ++k) {
            outs.push_back({"o" + std::to_string(k), {static_cast<std::uint32_t>(rng() % n)}});
            bool now = analyze_structure(g, outs).verdict == Verdict::Observable;
            CHECK((!was_observable || now));
            was_observable = now;
        }
    }
}

TEST_CASE("property: structural results ignore parameter values") {
    std::mt19937_64 rng(47);
    for (const auto& entry : list_models()) {
        CAPTURE(entry.key);
        auto s = get_model(entry.key);
        auto base = check_structural_observability(s);
        for (int t = 0; t < 5; ++t) {
            auto scaled = s;
            for (auto& p : scaled.parameters) {
                double factor = oracle::uniform(rng, 0.1, 10.0) * (rng() % 2 ? 1.0 : -1.0);
                p.default_value = p.default_value.value_or(1.0) * factor;
            }
            auto r = check_structural_observability(scaled);
            CHECK(r.graph == base.graph);
            CHECK(r.decomposition == base.decomposition);
            CHECK(r.verdict == base.verdict);
            CHECK(r.uncovered_roots == base.uncovered_roots);
            CHECK(export_digraph(r.graph, ExportFormat::Dot, &r.decomposition) ==
                  export_digraph(base.graph, ExportFormat::Dot, &base.decomposition));
        }
    }
}

TEST_CASE("long path and chain-of-cycles graphs do not overflow the stack") {
    const std::size_t n = 1'000'000;
    std::vector<std::string> nodes(n);
    EdgeList edges;
    for (std::uint32_t i = 0; i + 1 < n; ++i) edges.emplace_back(i, i + 1);
    auto g = InferenceDigraph::from_edges(std::move(nodes), std::move(edges));
    auto d = decompose(g);
    CHECK(d.components.size() == n);
    CHECK(std::count(d.root_flags.begin(), d.root_flags.end(), true) == 1);

    auto chain = chain_of_cycles(10000);
    auto report = check_structural_observability(chain);
    CHECK(report.roots.size() == 1);
    CHECK(report.verdict == Verdict::Observable);
    CHECK(report.graph.edge_count() >= 10000);
}

}
