#pragma once

#include "obsgraph/graph.hpp"
#include "obsgraph/lie.hpp"

#include <json.hpp>

#include <optional>
#include <string>

namespace obsgraph {

inline constexpr int report_schema_version = 1;

[[nodiscard]] std::string_view tool_version();

struct ReportSource {
    std::string kind;  // "model", "file" or "stdin"
    std::string name;
};

/// Envelope shared by every JSON report. Keys come out sorted.
[[nodiscard]] nlohmann::json make_document(std::string_view analysis, const ReportSource& source,
                                           std::optional<std::uint64_t> seed, std::optional<double> tolerance,
                                           double wall_ms);

[[nodiscard]] nlohmann::json structural_payload(const DynSystem& system, const StructuralReport& report,
                                                bool include_placement);
[[nodiscard]] nlohmann::json lie_payload(const DynSystem& system, const LieReport& report);

[[nodiscard]] std::string structural_text(const DynSystem& system, const StructuralReport& report,
                                          bool include_placement);
[[nodiscard]] std::string lie_text(const DynSystem& system, const LieReport& report);

} // namespace obsgraph
