#pragma once

#include "obsgraph/system.hpp"

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace obsgraph {

struct ModelCatalogEntry {
    std::string key;
    std::string provenance;
    bool symbolic = false;   // every right-hand side is a closed-form expression
    std::string source_file; // fixture file name under models/
};

class UnknownModel : public std::invalid_argument {
public:
    explicit UnknownModel(std::string_view key);
};

/// Sorted by key.
[[nodiscard]] const std::vector<ModelCatalogEntry>& list_models();

/// Parsed from the embedded fixture text on every call.
[[nodiscard]] DynSystem get_model(std::string_view key);

/// Raw text of an embedded fixture file, e.g. "example1_y1.dyn". Throws
/// std::invalid_argument for names that were not embedded.
[[nodiscard]] std::string_view fixture_text(std::string_view file_name);

/// Graph-only system whose derivatives are the rows of a 0/1 adjacency CSV
/// (header "state,x1,...", one row per state, same order). No outputs.
[[nodiscard]] DynSystem system_from_adjacency_csv(std::string name, std::string_view csv);

} // namespace obsgraph
