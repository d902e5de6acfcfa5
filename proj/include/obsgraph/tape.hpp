#pragma once

#include "obsgraph/expr.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace obsgraph {

/// Straight-line program compiled from one or more expressions.
///
/// Structurally identical subexpressions are merged (hash-consing), so a Lie
/// chain whose DAG contains many equal-but-distinct nodes evaluates in time
/// proportional to its distinct subterms. A Tape is immutable after
/// construction; evaluation state lives in a caller-owned Workspace, so one
/// tape can be run from many threads at once.
class Tape {
public:
    struct Symbol {
        NodeKind kind;
        std::string name;
    };

    struct Workspace {
        std::vector<double> values;
        std::vector<double> tangents;
    };

    explicit Tape(const Expression& root);
    explicit Tape(std::span<const Expression> roots);

    [[nodiscard]] std::size_t size() const { return code_.size(); }
    [[nodiscard]] std::size_t root_count() const { return roots_.size(); }
    [[nodiscard]] const std::vector<Symbol>& symbols() const { return symbols_; }
    [[nodiscard]] std::optional<std::size_t> find_symbol(NodeKind kind, std::string_view name) const;

    /// Symbol values in symbols() order. Throws EvaluationError(UnboundSymbol).
    [[nodiscard]] std::vector<double> bind(const Environment& env) const;

    /// Values of all roots. Throws EvaluationError(DivisionByZero) on an exact
    /// zero denominator. If `min_abs_denominator` is given it receives the
    /// smallest |denominator| met during the pass (infinity if none).
    void run(std::span<const double> symbol_values, std::span<double> out, Workspace& ws,
             double* min_abs_denominator = nullptr) const;

    /// Values and directional derivatives of all roots for the given
    /// per-symbol tangents.
    void run_dual(std::span<const double> symbol_values, std::span<const double> symbol_tangents,
                  std::span<double> out_values, std::span<double> out_tangents, Workspace& ws) const;

private:
    struct Instr {
        NodeKind kind;
        std::uint32_t exponent = 0;
        std::uint32_t a = 0;
        std::uint32_t b = 0;
        double value = 0.0;  // Constant value, or symbol index for symbols
    };

    void compile(std::span<const Expression> roots);
    [[noreturn]] void throw_division(std::size_t instr) const;

    std::vector<Instr> code_;
    std::vector<std::uint32_t> roots_;
    std::vector<Symbol> symbols_;
    // Denominator expression and path for each Div instruction, for error reports.
    struct DivSite {
        std::uint32_t instr;
        Expression denominator;
        std::string path;
    };
    std::vector<DivSite> div_sites_;
};

} // namespace obsgraph
