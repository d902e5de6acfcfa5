#include "obsgraph/dsl.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <set>
#include <unordered_map>

namespace obsgraph {

namespace {

enum class Keyword { None, System, States, Inputs, Params, Deriv, Output, Depends, Sin, Cos, Exp };

const std::unordered_map<std::string_view, Keyword>& keyword_table() {
    static const std::unordered_map<std::string_view, Keyword> table{
        {"system", Keyword::System}, {"states", Keyword::States},   {"inputs", Keyword::Inputs},
        {"params", Keyword::Params}, {"deriv", Keyword::Deriv},     {"output", Keyword::Output},
        {"depends", Keyword::Depends}, {"sin", Keyword::Sin},       {"cos", Keyword::Cos},
        {"exp", Keyword::Exp},
    };
    return table;
}

bool starts_statement(Keyword k) {
    switch (k) {
    case Keyword::System:
    case Keyword::States:
    case Keyword::Inputs:
    case Keyword::Params:
    case Keyword::Deriv:
    case Keyword::Output: return true;
    default: return false;
    }
}

enum class TokKind { Ident, Keyword, Number, Punct, End, Invalid };

struct Token {
    TokKind kind = TokKind::End;
    Keyword keyword = Keyword::None;
    char punct = 0;
    std::string text;
    double number = 0.0;
    bool integer = false;  // digits only
    int line = 1;
    int column = 1;
};

bool is_letter(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }
bool is_digit(char c) { return c >= '0' && c <= '9'; }

class Lexer {
public:
    explicit Lexer(std::string_view text) : text_(text) {}

    std::vector<Token> run() {
        std::vector<Token> out;
        for (;;) {
            skip_space_and_comments();
            Token t;
            t.line = line_;
            t.column = column_;
            if (pos_ >= text_.size()) {
                t.kind = TokKind::End;
                out.push_back(std::move(t));
                return out;
            }
            char c = text_[pos_];
            if (is_letter(c)) {
                std::size_t start = pos_;
                while (pos_ < text_.size() && (is_letter(text_[pos_]) || is_digit(text_[pos_]) || text_[pos_] == '_')) advance();
                t.text = std::string(text_.substr(start, pos_ - start));
                auto it = keyword_table().find(t.text);
                if (it != keyword_table().end()) {
                    t.kind = TokKind::Keyword;
                    t.keyword = it->second;
                } else {
                    t.kind = TokKind::Ident;
                }
            } else if (is_digit(c)) {
                lex_number(t);
            } else if (std::string_view("=,()+-*/^").find(c) != std::string_view::npos) {
                t.kind = TokKind::Punct;
                t.punct = c;
                t.text = std::string(1, c);
                advance();
            } else {
                t.kind = TokKind::Invalid;
                std::size_t start = pos_;
                advance();
                while (pos_ < text_.size() && (static_cast<unsigned char>(text_[pos_]) & 0xC0u) == 0x80u) advance();
                t.text = "unexpected character '" + std::string(text_.substr(start, pos_ - start)) + "'";
            }
            out.push_back(std::move(t));
        }
    }

private:
    void advance() {
        unsigned char c = static_cast<unsigned char>(text_[pos_++]);
        if (c == '\n') {
            ++line_;
            column_ = 1;
        } else if ((c & 0xC0u) != 0x80u) {
            ++column_;  // continuation bytes belong to the previous code point
        }
    }

    void skip_space_and_comments() {
        while (pos_ < text_.size()) {
            char c = text_[pos_];
            if (c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\f' || c == '\v') {
                advance();
            } else if (c == '#') {
                while (pos_ < text_.size() && text_[pos_] != '\n') advance();
            } else {
                break;
            }
        }
    }

    void lex_number(Token& t) {
        std::size_t start = pos_;
        bool integer = true;
        while (pos_ < text_.size() && is_digit(text_[pos_])) advance();
        if (pos_ + 1 < text_.size() && text_[pos_] == '.' && is_digit(text_[pos_ + 1])) {
            integer = false;
            advance();
            while (pos_ < text_.size() && is_digit(text_[pos_])) advance();
        }
        if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
            std::size_t save = pos_;
            std::size_t probe = pos_ + 1;
            if (probe < text_.size() && (text_[probe] == '+' || text_[probe] == '-')) ++probe;
            if (probe < text_.size() && is_digit(text_[probe])) {
                integer = false;
                while (pos_ < probe) advance();
                while (pos_ < text_.size() && is_digit(text_[pos_])) advance();
            } else {
                pos_ = save;
            }
        }
        t.text = std::string(text_.substr(start, pos_ - start));
        t.integer = integer;
        double v = 0.0;
        auto res = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
        if (res.ec != std::errc() || !std::isfinite(v)) {
            t.kind = TokKind::Invalid;
            t.text = "number '" + t.text + "' is out of range";
            return;
        }
        t.kind = TokKind::Number;
        t.number = v;
    }

    std::string_view text_;
    std::size_t pos_ = 0;
    int line_ = 1;
    int column_ = 1;
};

// Unresolved expression tree; symbols are resolved once every declaration
// in the file has been seen.
struct RawExpr {
    enum class Kind { Number, Symbol, Negate, Binary, Power, Call };
    Kind kind = Kind::Number;
    char op = 0;
    Keyword fn = Keyword::None;
    double number = 0.0;
    bool bare_literal = false;
    std::uint32_t exponent = 0;
    int height = 1;
    std::string name;
    int line = 1;
    int column = 1;
    std::unique_ptr<RawExpr> a;
    std::unique_ptr<RawExpr> b;
};

struct SymbolRef {
    std::string name;
    int line;
    int column;
};

struct RawRhs {
    std::unique_ptr<RawExpr> expr;         // "=" form
    std::optional<std::vector<SymbolRef>> deps;  // "depends" form
};

struct Item {
    std::string name;
    int line;
    int column;
    RawRhs rhs;
};

enum class DeclKind { State, Input, Parameter, Output };

struct Decl {
    DeclKind kind;
    std::size_t index;
    int line;
    int column;
};

struct SyntaxError {};

constexpr int max_nesting = 200;
constexpr int max_height = 5000;

class Parser {
public:
    Parser(std::string_view text, std::vector<Token> tokens) : text_(text), tokens_(std::move(tokens)) {
        std::size_t start = 0;
        for (std::size_t i = 0; i <= text.size(); ++i) {
            if (i == text.size() || text[i] == '\n') {
                std::string_view line = text.substr(start, i - start);
                if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
                lines_.push_back(line);
                start = i + 1;
            }
        }
    }

    ParseResult run() {
        for (const auto& t : tokens_) {
            if (t.kind == TokKind::Invalid) error_at(t.line, t.column, t.text);
        }
        if (!diagnostics_.empty()) return finish();

        try {
            expect_keyword(Keyword::System, "expected 'system' at the start of the model");
            system_.name = expect_ident("expected a system name after 'system'").text;
        } catch (const SyntaxError&) {
            return finish();
        }

        while (peek().kind != TokKind::End) {
            try {
                statement();
            } catch (const SyntaxError&) {
                if (!pending_deriv_.empty()) unparsed_derivs_.insert(pending_deriv_);
                synchronize();
            }
            pending_deriv_.clear();
        }
        resolve();
        return finish();
    }

private:
    // -- token helpers -----------------------------------------------------

    const Token& peek() const { return tokens_[pos_]; }
    const Token& next() {
        const Token& t = tokens_[pos_];
        if (t.kind != TokKind::End) ++pos_;
        last_ = &t;
        return t;
    }
    bool at_punct(char c) const { return peek().kind == TokKind::Punct && peek().punct == c; }
    bool at_keyword(Keyword k) const { return peek().kind == TokKind::Keyword && peek().keyword == k; }

    bool accept_punct(char c) {
        if (!at_punct(c)) return false;
        next();
        return true;
    }

    [[noreturn]] void fail(const std::string& message) {
        const Token& t = peek();
        if (t.kind == TokKind::End && last_ != nullptr) {
            // Point at the last real token rather than past the end of input.
            error_at(last_->line, last_->column, message + " (reached end of input)");
        } else {
            error_at(t.line, t.column, message + describe_found(t));
        }
        throw SyntaxError{};
    }

    static std::string describe_found(const Token& t) {
        switch (t.kind) {
        case TokKind::Ident: return ", found identifier '" + t.text + "'";
        case TokKind::Keyword: return ", found keyword '" + t.text + "'";
        case TokKind::Number: return ", found number '" + t.text + "'";
        case TokKind::Punct: return ", found '" + t.text + "'";
        default: return {};
        }
    }

    void expect_keyword(Keyword k, const std::string& message) {
        if (!at_keyword(k)) fail(message);
        next();
    }

    const Token& expect_ident(const std::string& message) {
        if (peek().kind != TokKind::Ident) fail(message);
        return next();
    }

    void expect_punct(char c, const std::string& message) {
        if (!at_punct(c)) fail(message);
        next();
    }

    void synchronize() {
        while (peek().kind != TokKind::End) {
            if (peek().kind == TokKind::Keyword && starts_statement(peek().keyword)) return;
            next();
        }
    }

    // -- statements --------------------------------------------------------

    void statement() {
        const Token& t = peek();
        if (t.kind != TokKind::Keyword || !starts_statement(t.keyword)) {
            fail("expected a declaration (states, inputs, params, deriv or output)");
        }
        switch (t.keyword) {
        case Keyword::System:
            error_at(t.line, t.column, "'system' may appear only once");
            next();
            throw SyntaxError{};
        case Keyword::States: {
            next();
            if (peek().kind != TokKind::Ident) fail("expected at least one state name after 'states'");
            while (peek().kind == TokKind::Ident) declare(next(), DeclKind::State);
            break;
        }
        case Keyword::Inputs:
            next();
            while (peek().kind == TokKind::Ident) declare(next(), DeclKind::Input);
            break;
        case Keyword::Params:
            next();
            do {
                const Token& name = expect_ident("expected a parameter name");
                std::optional<double> value;
                if (accept_punct('=')) {
                    bool negative = accept_punct('-');
                    if (peek().kind != TokKind::Number) fail("expected a number after '='");
                    value = next().number * (negative ? -1.0 : 1.0);
                }
                declare(name, DeclKind::Parameter, value);
            } while (accept_punct(','));
            break;
        case Keyword::Deriv:
        case Keyword::Output: {
            bool is_output = t.keyword == Keyword::Output;
            next();
            const Token& name = expect_ident(is_output ? "expected an output name after 'output'"
                                                       : "expected a state name after 'deriv'");
            Item item{name.text, name.line, name.column, {}};
            if (!is_output) pending_deriv_ = name.text;
            if (accept_punct('=')) {
                depth_ = 0;
                item.rhs.expr = expression();
            } else if (at_keyword(Keyword::Depends)) {
                next();
                item.rhs.deps = symbol_list();
            } else {
                fail("expected '=' or 'depends' after '" + name.text + "'");
            }
            if (is_output) {
                declare(name, DeclKind::Output);
                outputs_.push_back(std::move(item));
            } else {
                derivs_.push_back(std::move(item));
            }
            break;
        }
        default: fail("expected a declaration");
        }
    }

    // An empty list is accepted so that a right-hand side with no
    // dependencies at all can still be written in the dependency form.
    std::vector<SymbolRef> symbol_list() {
        std::vector<SymbolRef> out;
        if (peek().kind != TokKind::Ident) return out;
        do {
            const Token& t = expect_ident("expected a name in the dependency list");
            out.push_back({t.text, t.line, t.column});
        } while (accept_punct(','));
        return out;
    }

    void declare(const Token& t, DeclKind kind, std::optional<double> value = std::nullopt) {
        std::size_t index = 0;
        switch (kind) {
        case DeclKind::State: index = system_.states.size(); break;
        case DeclKind::Input: index = system_.inputs.size(); break;
        case DeclKind::Parameter: index = system_.parameters.size(); break;
        case DeclKind::Output: index = output_count_; break;
        }
        auto [it, fresh] = decls_.try_emplace(t.text, Decl{kind, index, t.line, t.column});
        if (!fresh) {
            error_at(t.line, t.column,
                     "duplicate declaration of '" + t.text + "' (first declared at line " +
                         std::to_string(it->second.line) + ", column " + std::to_string(it->second.column) + ")");
            return;
        }
        switch (kind) {
        case DeclKind::State: system_.states.push_back(t.text); break;
        case DeclKind::Input: system_.inputs.push_back(t.text); break;
        case DeclKind::Parameter: system_.parameters.push_back({t.text, value}); break;
        case DeclKind::Output: ++output_count_; break;
        }
    }

    // -- expressions -------------------------------------------------------

    struct DepthGuard {
        Parser& p;
        explicit DepthGuard(Parser& parser) : p(parser) {
            if (++p.depth_ > max_nesting) p.fail("expression is nested too deeply");
        }
        ~DepthGuard() { --p.depth_; }
    };

    std::unique_ptr<RawExpr> make(RawExpr::Kind kind, const Token& at) {
        auto e = std::make_unique<RawExpr>();
        e->kind = kind;
        e->line = at.line;
        e->column = at.column;
        return e;
    }

    std::unique_ptr<RawExpr> join(char op, const Token& at, std::unique_ptr<RawExpr> a, std::unique_ptr<RawExpr> b) {
        auto node = make(RawExpr::Kind::Binary, at);
        node->op = op;
        node->height = std::max(a->height, b->height) + 1;
        if (node->height > max_height) fail("expression is too long");
        node->a = std::move(a);
        node->b = std::move(b);
        return node;
    }

    std::unique_ptr<RawExpr> expression() {
        DepthGuard guard(*this);
        auto lhs = term();
        while (at_punct('+') || at_punct('-')) {
            const Token& op = next();
            auto rhs = term();
            lhs = join(op.punct, op, std::move(lhs), std::move(rhs));
        }
        return lhs;
    }

    std::unique_ptr<RawExpr> term() {
        auto lhs = unary();
        while (at_punct('*') || at_punct('/')) {
            const Token& op = next();
            auto rhs = unary();
            lhs = join(op.punct, op, std::move(lhs), std::move(rhs));
        }
        return lhs;
    }

    std::unique_ptr<RawExpr> unary() {
        if (at_punct('-')) {
            DepthGuard guard(*this);
            const Token& op = next();
            auto operand = unary();
            // "-2" is the literal -2; "-(2)" and "-2^2" stay negations.
            if (operand->kind == RawExpr::Kind::Number && operand->bare_literal) {
                operand->number = -operand->number;
                operand->line = op.line;
                operand->column = op.column;
                return operand;
            }
            auto node = make(RawExpr::Kind::Negate, op);
            node->height = operand->height + 1;
            node->a = std::move(operand);
            return node;
        }
        return power();
    }

    std::unique_ptr<RawExpr> power() {
        auto base = primary();
        if (at_punct('^')) {
            const Token& op = next();
            auto node = make(RawExpr::Kind::Power, op);
            node->height = base->height + 1;
            node->a = std::move(base);
            node->exponent = exponent_chain();
            return node;
        }
        return base;
    }

    // Right-associative: x^2^3 == x^(2^3) == x^8.
    std::uint32_t exponent_chain() {
        if (peek().kind != TokKind::Number || !peek().integer) {
            fail("exponent must be a non-negative integer literal");
        }
        const Token& t = next();
        if (t.number > static_cast<double>(std::numeric_limits<std::int32_t>::max())) {
            error_at(t.line, t.column, "exponent " + t.text + " is too large");
            throw SyntaxError{};
        }
        auto n = static_cast<std::uint64_t>(t.number);
        if (accept_punct('^')) {
            std::uint64_t m = exponent_chain();
            std::uint64_t result = 1;
            for (std::uint64_t i = 0; i < m; ++i) {
                result *= n;
                if (result > static_cast<std::uint64_t>(std::numeric_limits<std::int32_t>::max())) {
                    error_at(t.line, t.column, "exponent is too large");
                    throw SyntaxError{};
                }
                if (n <= 1) break;
            }
            n = m == 0 ? 1 : result;
        }
        return static_cast<std::uint32_t>(n);
    }

    std::unique_ptr<RawExpr> primary() {
        const Token& t = peek();
        if (t.kind == TokKind::Number) {
            next();
            auto e = make(RawExpr::Kind::Number, t);
            e->number = t.number;
            e->bare_literal = true;
            return e;
        }
        if (t.kind == TokKind::Ident) {
            next();
            auto e = make(RawExpr::Kind::Symbol, t);
            e->name = t.text;
            return e;
        }
        if (t.kind == TokKind::Punct && t.punct == '(') {
            next();
            auto inner = expression();
            expect_punct(')', "expected ')'");
            inner->bare_literal = false;
            return inner;
        }
        if (t.kind == TokKind::Keyword && (t.keyword == Keyword::Sin || t.keyword == Keyword::Cos || t.keyword == Keyword::Exp)) {
            next();
            auto e = make(RawExpr::Kind::Call, t);
            e->fn = t.keyword;
            expect_punct('(', "expected '(' after '" + t.text + "'");
            e->a = expression();
            e->height = e->a->height + 1;
            expect_punct(')', "expected ')'");
            return e;
        }
        fail("expected an expression");
    }

    // -- resolution and validation ----------------------------------------

    std::optional<Expression> resolve_expr(const RawExpr& e) {
        switch (e.kind) {
        case RawExpr::Kind::Number: return Expression::constant(e.number);
        case RawExpr::Kind::Symbol: {
            auto it = decls_.find(e.name);
            if (it == decls_.end()) {
                error_at(e.line, e.column, "undeclared symbol '" + e.name + "'");
                return std::nullopt;
            }
            switch (it->second.kind) {
            case DeclKind::State: return Expression::state(e.name);
            case DeclKind::Input: return Expression::input(e.name);
            case DeclKind::Parameter: return Expression::parameter(e.name);
            case DeclKind::Output:
                error_at(e.line, e.column, "output '" + e.name + "' cannot be used inside an expression");
                return std::nullopt;
            }
            return std::nullopt;
        }
        case RawExpr::Kind::Negate: {
            auto a = resolve_expr(*e.a);
            if (!a) return std::nullopt;
            return -*a;
        }
        case RawExpr::Kind::Binary: {
            auto a = resolve_expr(*e.a);
            auto b = resolve_expr(*e.b);
            if (!a || !b) return std::nullopt;
            switch (e.op) {
            case '+': return *a + *b;
            case '-': return *a - *b;
            case '*': return *a * *b;
            default: return *a / *b;
            }
        }
        case RawExpr::Kind::Power: {
            auto a = resolve_expr(*e.a);
            if (!a) return std::nullopt;
            return pow(*a, e.exponent);
        }
        case RawExpr::Kind::Call: {
            auto a = resolve_expr(*e.a);
            if (!a) return std::nullopt;
            return e.fn == Keyword::Sin ? sin(*a) : e.fn == Keyword::Cos ? cos(*a) : exp(*a);
        }
        }
        return std::nullopt;
    }

    std::optional<RightHandSide> resolve_rhs(const RawRhs& rhs) {
        if (rhs.expr) {
            auto e = resolve_expr(*rhs.expr);
            if (!e) return std::nullopt;
            return RightHandSide{std::move(*e)};
        }
        std::vector<std::pair<std::size_t, std::string>> states;
        std::vector<std::pair<std::size_t, std::string>> inputs;
        std::set<std::string> seen;
        bool ok = true;
        for (const auto& ref : *rhs.deps) {
            auto it = decls_.find(ref.name);
            if (it == decls_.end()) {
                error_at(ref.line, ref.column, "undeclared symbol '" + ref.name + "'");
                ok = false;
                continue;
            }
            if (!seen.insert(ref.name).second) {
                warning_at(ref.line, ref.column, "'" + ref.name + "' is listed more than once");
                continue;
            }
            switch (it->second.kind) {
            case DeclKind::State: states.emplace_back(it->second.index, ref.name); break;
            case DeclKind::Input: inputs.emplace_back(it->second.index, ref.name); break;
            case DeclKind::Parameter:
                warning_at(ref.line, ref.column, "parameter '" + ref.name + "' in a dependency list has no structural effect");
                break;
            case DeclKind::Output:
                error_at(ref.line, ref.column, "output '" + ref.name + "' cannot appear in a dependency list");
                ok = false;
                break;
            }
        }
        if (!ok) return std::nullopt;
        std::sort(states.begin(), states.end());
        std::sort(inputs.begin(), inputs.end());
        DependencySpec spec;
        for (auto& s : states) spec.states.push_back(std::move(s.second));
        for (auto& s : inputs) spec.inputs.push_back(std::move(s.second));
        return RightHandSide{std::move(spec)};
    }

    void resolve() {
        std::vector<std::optional<RightHandSide>> derivs(system_.states.size());
        std::vector<const Item*> first_item(system_.states.size(), nullptr);
        for (const auto& item : derivs_) {
            auto it = decls_.find(item.name);
            if (it == decls_.end()) {
                error_at(item.line, item.column, "derivative for undeclared state '" + item.name + "'");
                continue;
            }
            if (it->second.kind != DeclKind::State) {
                error_at(item.line, item.column, "'" + item.name + "' is not a state, so it cannot have a derivative");
                continue;
            }
            std::size_t idx = it->second.index;
            if (first_item[idx] != nullptr) {
                error_at(item.line, item.column,
                         "duplicate derivative for '" + item.name + "' (first given at line " +
                             std::to_string(first_item[idx]->line) + ")");
                continue;
            }
            first_item[idx] = &item;
            derivs[idx] = resolve_rhs(item.rhs);
        }
        for (std::size_t i = 0; i < system_.states.size(); ++i) {
            // A derivative whose statement failed to parse was already reported.
            if (first_item[i] == nullptr && !unparsed_derivs_.contains(system_.states[i])) {
                const Decl& d = decls_.at(system_.states[i]);
                error_at(d.line, d.column, "missing derivative for " + system_.states[i]);
            }
        }
        for (const auto& item : outputs_) {
            auto rhs = resolve_rhs(item.rhs);
            if (rhs) system_.outputs.push_back({item.name, std::move(*rhs)});
        }
        if (has_errors()) return;
        for (auto& d : derivs) system_.derivatives.push_back(std::move(*d));
    }

    // -- diagnostics -------------------------------------------------------

    void error_at(int line, int column, std::string message) {
        add(ParseDiagnostic::Severity::Error, line, column, std::move(message));
    }
    void warning_at(int line, int column, std::string message) {
        add(ParseDiagnostic::Severity::Warning, line, column, std::move(message));
    }
    void add(ParseDiagnostic::Severity sev, int line, int column, std::string message) {
        ParseDiagnostic d;
        d.severity = sev;
        d.line = line;
        d.column = column;
        d.message = std::move(message);
        if (line >= 1 && static_cast<std::size_t>(line) <= lines_.size()) d.snippet = std::string(lines_[line - 1]);
        diagnostics_.push_back(std::move(d));
    }
    bool has_errors() const {
        return std::any_of(diagnostics_.begin(), diagnostics_.end(),
                           [](const ParseDiagnostic& d) { return d.severity == ParseDiagnostic::Severity::Error; });
    }

    ParseResult finish() {
        ParseResult result;
        std::stable_sort(diagnostics_.begin(), diagnostics_.end(), [](const auto& a, const auto& b) {
            return std::tie(a.line, a.column) < std::tie(b.line, b.column);
        });
        if (!has_errors()) result.system = std::move(system_);
        result.diagnostics = std::move(diagnostics_);
        return result;
    }

    std::string_view text_;
    std::vector<Token> tokens_;
    std::vector<std::string_view> lines_;
    std::size_t pos_ = 0;
    const Token* last_ = nullptr;
    int depth_ = 0;

    DynSystem system_;
    std::map<std::string, Decl> decls_;
    std::size_t output_count_ = 0;
    std::vector<Item> derivs_;
    std::vector<Item> outputs_;
    std::string pending_deriv_;
    std::set<std::string> unparsed_derivs_;
    std::vector<ParseDiagnostic> diagnostics_;
};

std::string format_number(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

void write_rhs(std::string& out, const RightHandSide& rhs) {
    if (const auto* e = std::get_if<Expression>(&rhs)) {
        out += " = ";
        out += to_string(*e);
        return;
    }
    const auto& spec = std::get<DependencySpec>(rhs);
    out += " depends";
    bool first = true;
    for (const auto* list : {&spec.states, &spec.inputs}) {
        for (const auto& name : *list) {
            out += first ? " " : ", ";
            out += name;
            first = false;
        }
    }
}

bool valid_identifier(const std::string& s) {
    if (s.empty() || !is_letter(s[0])) return false;
    if (keyword_table().contains(s)) return false;
    return std::all_of(s.begin(), s.end(), [](char c) { return is_letter(c) || is_digit(c) || c == '_'; });
}

} // namespace

ParseResult parse(std::string_view text) {
    Lexer lexer(text);
    Parser parser(text, lexer.run());
    return parser.run();
}

std::string format_diagnostic(const ParseDiagnostic& d, std::string_view source_name) {
    std::string out;
    if (!source_name.empty()) {
        out += source_name;
        out += ':';
    }
    out += std::to_string(d.line) + ":" + std::to_string(d.column) + ": ";
    out += d.severity == ParseDiagnostic::Severity::Error ? "error: " : "warning: ";
    out += d.message;
    if (!d.snippet.empty()) {
        out += "\n    " + d.snippet + "\n    ";
        // Caret under the column; tabs are kept so the caret lines up.
        int col = 1;
        for (std::size_t i = 0; i < d.snippet.size() && col < d.column; ++i) {
            unsigned char c = static_cast<unsigned char>(d.snippet[i]);
            if ((c & 0xC0u) == 0x80u) continue;
            out += d.snippet[i] == '\t' ? '\t' : ' ';
            ++col;
        }
        out += '^';
    }
    return out;
}

std::string serialize(const DynSystem& s) {
    std::string out = "system " + s.name + "\n";
    if (!s.states.empty()) {
        out += "states";
        for (const auto& x : s.states) out += " " + x;
        out += "\n";
    }
    if (!s.inputs.empty()) {
        out += "inputs";
        for (const auto& u : s.inputs) out += " " + u;
        out += "\n";
    }
    if (!s.parameters.empty()) {
        out += "params ";
        for (std::size_t i = 0; i < s.parameters.size(); ++i) {
            if (i) out += ", ";
            out += s.parameters[i].name;
            if (s.parameters[i].default_value) out += " = " + format_number(*s.parameters[i].default_value);
        }
        out += "\n";
    }
    for (std::size_t i = 0; i < s.states.size() && i < s.derivatives.size(); ++i) {
        out += "deriv " + s.states[i];
        write_rhs(out, s.derivatives[i]);
        out += "\n";
    }
    for (const auto& o : s.outputs) {
        out += "output " + o.name;
        write_rhs(out, o.rhs);
        out += "\n";
    }
    return out;
}

std::vector<std::string> validate(const DynSystem& s) {
    std::vector<std::string> problems;
    std::map<std::string, DeclKind> kinds;
    auto declare = [&](const std::string& name, DeclKind kind) {
        if (!valid_identifier(name)) problems.push_back("'" + name + "' is not a valid identifier");
        if (!kinds.emplace(name, kind).second) problems.push_back("duplicate declaration of '" + name + "'");
    };
    if (!valid_identifier(s.name)) problems.push_back("system name '" + s.name + "' is not a valid identifier");
    for (const auto& x : s.states) declare(x, DeclKind::State);
    for (const auto& u : s.inputs) declare(u, DeclKind::Input);
    for (const auto& p : s.parameters) {
        declare(p.name, DeclKind::Parameter);
        if (p.default_value && !std::isfinite(*p.default_value)) problems.push_back("parameter '" + p.name + "' has a non-finite default");
    }
    for (const auto& o : s.outputs) declare(o.name, DeclKind::Output);
    if (s.derivatives.size() != s.states.size()) {
        problems.push_back("expected " + std::to_string(s.states.size()) + " derivatives, found " +
                           std::to_string(s.derivatives.size()));
    }

    auto check_rhs = [&](const std::string& owner, const RightHandSide& rhs) {
        if (const auto* e = std::get_if<Expression>(&rhs)) {
            for (auto [kind, want] : {std::pair{NodeKind::State, DeclKind::State}, std::pair{NodeKind::Input, DeclKind::Input},
                                      std::pair{NodeKind::Parameter, DeclKind::Parameter}}) {
                for (const auto& name : symbols(*e, kind)) {
                    auto it = kinds.find(name);
                    if (it == kinds.end() || it->second != want) {
                        problems.push_back(owner + ": symbol '" + name + "' is not a declared " +
                                           std::string(to_string(kind)));
                    }
                }
            }
            return;
        }
        const auto& spec = std::get<DependencySpec>(rhs);
        auto check_list = [&](const std::vector<std::string>& names, DeclKind want, const char* what) {
            std::set<std::string> seen;
            for (const auto& name : names) {
                auto it = kinds.find(name);
                if (it == kinds.end() || it->second != want) problems.push_back(owner + ": '" + name + "' is not a declared " + what);
                if (!seen.insert(name).second) problems.push_back(owner + ": '" + name + "' listed twice");
            }
        };
        check_list(spec.states, DeclKind::State, "state");
        check_list(spec.inputs, DeclKind::Input, "input");
    };
    for (std::size_t i = 0; i < s.derivatives.size() && i < s.states.size(); ++i) check_rhs("deriv " + s.states[i], s.derivatives[i]);
    for (const auto& o : s.outputs) check_rhs("output " + o.name, o.rhs);
    return problems;
}

} // namespace obsgraph
