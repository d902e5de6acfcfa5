#include "obsgraph/catalog.hpp"

#include "obsgraph/dsl.hpp"

#include <algorithm>
#include <sstream>
#include <utility>

namespace obsgraph {

namespace detail {
extern const std::pair<std::string_view, std::string_view> embedded_fixtures[];
extern const std::size_t embedded_fixture_count;
} // namespace detail

namespace {

std::vector<std::string> split(std::string_view line, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
        auto pos = line.find(sep, start);
        out.emplace_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) return out;
        start = pos + 1;
    }
}

std::vector<ModelCatalogEntry> build_catalog() {
    std::vector<ModelCatalogEntry> entries{
        {"example1_y1", "four-state nonlinear example, measured y = x2", true, "example1_y1.dyn"},
        {"example1_y2", "four-state nonlinear example, measured y' = x2 + sin(x1)", true, "example1_y2.dyn"},
        {"example1_y3", "four-state nonlinear example, measured y'' = x4", true, "example1_y3.dyn"},
        {"tableII_literal",
         "three-machine adjacency matrix verbatim (Efd rows read Rf instead of VR); documentation only", false,
         "tableII_literal.csv"},
        {"wscc_centralized_structural",
         "three-machine Kron-reduced model, dependency sets only; measured VD_i, VQ_i", false,
         "wscc_centralized_structural.dyn"},
        {"wscc_centralized_synthetic",
         "three-machine model over a random reduced admittance matrix (fixed seed); measured internal voltages", true,
         "wscc_centralized_synthetic.dyn"},
        {"wscc_decentralized",
         "one machine with IEEE type-1 exciter, stator currents substituted via the dq impedance inverse; "
         "inputs VD, VQ; measured ID, IQ",
         true, "wscc_decentralized.dyn"},
    };
    std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) { return a.key < b.key; });
    return entries;
}

} // namespace

UnknownModel::UnknownModel(std::string_view key) : std::invalid_argument("unknown model '" + std::string(key) + "'") {}

const std::vector<ModelCatalogEntry>& list_models() {
    static const std::vector<ModelCatalogEntry> catalog = build_catalog();
    return catalog;
}

std::string_view fixture_text(std::string_view file_name) {
    for (std::size_t i = 0; i < detail::embedded_fixture_count; ++i) {
        if (detail::embedded_fixtures[i].first == file_name) return detail::embedded_fixtures[i].second;
    }
    throw std::invalid_argument("no embedded fixture named '" + std::string(file_name) + "'");
}

DynSystem system_from_adjacency_csv(std::string name, std::string_view csv) {
    std::vector<std::string> lines;
    std::istringstream in{std::string(csv)};
    for (std::string line; std::getline(in, line);) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty()) lines.push_back(std::move(line));
    }
    if (lines.empty()) throw std::invalid_argument("adjacency CSV is empty");
    auto header = split(lines[0], ',');
    DynSystem s;
    s.name = std::move(name);
    s.states.assign(header.begin() + 1, header.end());
    const std::size_t n = s.states.size();
    if (lines.size() != n + 1) throw std::invalid_argument("adjacency CSV must have one row per state");
    for (std::size_t i = 0; i < n; ++i) {
        auto cells = split(lines[i + 1], ',');
        if (cells.size() != n + 1 || cells[0] != s.states[i]) {
            throw std::invalid_argument("adjacency CSV row " + std::to_string(i + 1) + " does not match the header");
        }
        DependencySpec spec;
        for (std::size_t j = 0; j < n; ++j) {
            if (cells[j + 1] == "1") {
                spec.states.push_back(s.states[j]);
            } else if (cells[j + 1] != "0") {
                throw std::invalid_argument("adjacency CSV entries must be 0 or 1");
            }
        }
        s.derivatives.emplace_back(std::move(spec));
    }
    return s;
}

DynSystem get_model(std::string_view key) {
    const auto& catalog = list_models();
    auto it = std::find_if(catalog.begin(), catalog.end(), [&](const auto& e) { return e.key == key; });
    if (it == catalog.end()) throw UnknownModel(key);
    std::string_view text = fixture_text(it->source_file);
    if (it->source_file.ends_with(".csv")) return system_from_adjacency_csv(it->key, text);
    auto result = parse(text);
    if (!result.ok()) {
        std::string msg = "fixture " + it->source_file + " failed to parse";
        for (const auto& d : result.diagnostics) msg += "\n" + format_diagnostic(d, it->source_file);
        throw std::logic_error(msg);
    }
    return std::move(*result.system);
}

} // namespace obsgraph
