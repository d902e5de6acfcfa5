#pragma once

#include "obsgraph/system.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace obsgraph {

struct ParseDiagnostic {
    enum class Severity { Error, Warning };

    Severity severity = Severity::Error;
    int line = 1;    // 1-based
    int column = 1;  // 1-based, in code points
    std::string message;
    std::string snippet;  // the offending source line
};

[[nodiscard]] std::string format_diagnostic(const ParseDiagnostic& d, std::string_view source_name = {});

/// On success `system` is set and `diagnostics` holds warnings only; on
/// failure `system` is empty and at least one error is present.
struct ParseResult {
    std::optional<DynSystem> system;
    std::vector<ParseDiagnostic> diagnostics;

    [[nodiscard]] bool ok() const { return system.has_value(); }
};

/// Parses the `.dyn` model format:
///
///     system NAME
///     states x1 x2 ...
///     inputs u1 ...
///     params a = 1.5, b, ...
///     deriv x1 = <expr>            | deriv x1 depends x2, u1, ...
///     output y = <expr>            | output y depends x1, ...
///
/// Declarations may come in any order; `#` starts a line comment.
[[nodiscard]] ParseResult parse(std::string_view text);

/// Canonical text form; parse(serialize(s)) == s.
[[nodiscard]] std::string serialize(const DynSystem& system);

/// Checks the DynSystem invariants for systems built in code. Returns the
/// list of problems (empty when valid).
[[nodiscard]] std::vector<std::string> validate(const DynSystem& system);

} // namespace obsgraph
