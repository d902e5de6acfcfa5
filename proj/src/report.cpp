#include "obsgraph/report.hpp"

#ifndef OBSGRAPH_VERSION
#define OBSGRAPH_VERSION "0.0.0"
#endif

namespace obsgraph {

using nlohmann::json;

namespace {

json names_of(const StructuralReport& r, const std::vector<std::uint32_t>& members) {
    json out = json::array();
    for (auto v : members) out.push_back(r.graph.nodes()[v]);
    return out;
}

std::string join_names(const StructuralReport& r, const std::vector<std::uint32_t>& members) {
    std::string out = "{";
    for (std::size_t i = 0; i < members.size(); ++i) {
        if (i) out += ", ";
        out += r.graph.nodes()[members[i]];
    }
    return out + "}";
}

json environment_json(const Environment& env) {
    return json{{"states", env.states}, {"inputs", env.inputs}, {"parameters", env.parameters}};
}

} // namespace

std::string_view tool_version() { return OBSGRAPH_VERSION; }

json make_document(std::string_view analysis, const ReportSource& source, std::optional<std::uint64_t> seed,
                   std::optional<double> tolerance, double wall_ms) {
    json doc;
    doc["schema_version"] = report_schema_version;
    doc["tool"] = {{"name", "obsgraph"}, {"version", tool_version()}};
    doc["analysis"] = analysis;
    doc["source"] = {{"kind", source.kind}, {"name", source.name}};
    doc["seed"] = seed ? json(*seed) : json(nullptr);
    doc["tolerance"] = tolerance ? json(*tolerance) : json(nullptr);
    doc["timing"] = {{"wall_ms", wall_ms}, {"clock", "steady"}};
    return doc;
}

json structural_payload(const DynSystem& system, const StructuralReport& r, bool include_placement) {
    const auto& d = r.decomposition;
    json p;
    p["system"] = system.name;
    p["states"] = r.graph.nodes();
    p["edge_count"] = r.graph.edge_count();
    json edges = json::array();
    for (const auto& [u, v] : r.graph.edges()) edges.push_back({r.graph.nodes()[u], r.graph.nodes()[v]});
    p["edges"] = std::move(edges);

    json comps = json::array();
    for (std::size_t c = 0; c < d.components.size(); ++c) {
        comps.push_back({{"index", c}, {"members", names_of(r, d.components[c])}, {"root", static_cast<bool>(d.root_flags[c])}});
    }
    p["components"] = std::move(comps);
    p["condensation_edges"] = d.condensation_edges;

    json roots = json::array();
    for (const auto& rc : r.roots) {
        roots.push_back({{"component", rc.component},
                         {"members", names_of(r, d.components[rc.component])},
                         {"covering_outputs", rc.covering_outputs}});
    }
    p["roots"] = std::move(roots);
    p["uncovered_roots"] = r.uncovered_roots;
    p["verdict"] = to_string(r.verdict);
    if (include_placement) p["suggested_placement"] = suggest_placement(r);
    return p;
}

json lie_payload(const DynSystem& system, const LieReport& r) {
    json p;
    p["system"] = system.name;
    p["n"] = r.n;
    p["order_cap"] = r.order_cap;
    p["mode"] = r.mode == JacobianMode::Dual ? "dual" : "symbolic";
    json samples = json::array();
    for (const auto& env : r.samples) samples.push_back(environment_json(env));
    p["samples"] = std::move(samples);
    p["rank_by_order"] = r.rank_by_order;
    p["rank_by_sample"] = r.rank_by_sample;
    json failures = json::array();
    for (const auto& f : r.sample_failures) failures.push_back(f ? json(*f) : json(nullptr));
    p["sample_failures"] = std::move(failures);
    p["final_rank"] = r.final_rank;
    p["verdict"] = to_string(r.verdict);
    p["budget_exhausted"] = r.budget_exhausted;
    p["wall_ms"] = r.wall_ms;
    return p;
}

std::string structural_text(const DynSystem& system, const StructuralReport& r, bool include_placement) {
    const auto& d = r.decomposition;
    std::string out = "system " + system.name + ": " + std::to_string(r.graph.node_count()) + " states, " +
                      std::to_string(r.graph.edge_count()) + " edges\n";
    out += "SCCs (" + std::to_string(d.components.size()) + "):\n";
    for (std::size_t c = 0; c < d.components.size(); ++c) {
        out += "  [" + std::to_string(c) + "] " + join_names(r, d.components[c]);
        if (d.root_flags[c]) out += "  root";
        out += "\n";
    }
    out += "root SCCs:\n";
    for (const auto& rc : r.roots) {
        out += "  [" + std::to_string(rc.component) + "] " + join_names(r, d.components[rc.component]) + " covered by: ";
        if (rc.covering_outputs.empty()) {
            out += "(none)";
        } else {
            for (std::size_t i = 0; i < rc.covering_outputs.size(); ++i) out += (i ? ", " : "") + rc.covering_outputs[i];
        }
        out += "\n";
    }
    out += "verdict: ";
    out += r.verdict == Verdict::Observable ? "structurally observable" : "not structurally observable";
    out += "\n";
    if (include_placement) {
        auto place = suggest_placement(r);
        out += "suggested placement: ";
        if (place.empty()) out += "(none needed)";
        for (std::size_t i = 0; i < place.size(); ++i) out += (i ? ", " : "") + place[i];
        out += "\n";
    }
    return out;
}

std::string lie_text(const DynSystem& system, const LieReport& r) {
    std::string out = "system " + system.name + ": n = " + std::to_string(r.n) + ", " +
                      std::to_string(r.samples.size()) + " samples, seed " + std::to_string(r.seed) + "\n";
    out += "rank by order:";
    for (std::size_t k = 0; k < r.rank_by_order.size(); ++k) {
        out += " " + std::to_string(k) + ":" + std::to_string(r.rank_by_order[k]);
    }
    out += "\n";
    for (std::size_t s = 0; s < r.sample_failures.size(); ++s) {
        if (r.sample_failures[s]) out += "sample " + std::to_string(s) + " dropped: " + *r.sample_failures[s] + "\n";
    }
    if (r.budget_exhausted) out += "time budget exhausted\n";
    out += "final rank: " + std::to_string(r.final_rank) + " of " + std::to_string(r.n) + "\n";
    out += "verdict: ";
    out += r.verdict == LieVerdict::Observable ? "observable"
                                               : "not observable up to order " + std::to_string(r.rank_by_order.size() - 1);
    out += "\n";
    return out;
}

} // namespace obsgraph
