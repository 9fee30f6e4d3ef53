#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "homectx/value.hpp"

namespace homectx::eca {

enum class TokenKind { Ident, Number, Time, String, Punct, End };

struct Token {
    TokenKind kind = TokenKind::End;
    std::string text;
    int line = 1;
    int col = 1;

    friend bool operator==(const Token& a, const Token& b) { return a.kind == b.kind && a.text == b.text; }
};

/// Splits rule text into tokens, dropping whitespace and `//` comments.
/// Identifiers may contain dots and a trailing `*`.
std::vector<Token> tokenize(std::string_view text);

/// Token texts only, for round-trip comparison.
std::vector<std::string> token_texts(std::string_view text);

struct EventRef {
    std::string name;
    bool call_parens = false;  // written `name()`
    int line = 0;
};

struct Operand {
    enum class Kind { Variable, Literal } kind = Kind::Variable;
    std::string lexeme;
    Value literal;
};

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

enum class ExprKind { Operand, Compare, Not, And, Or, Group };

struct Expr {
    ExprKind kind = ExprKind::Operand;
    Operand operand;            // ExprKind::Operand
    std::string op;             // Compare: < <= > >= == !=
    std::vector<ExprPtr> args;  // Compare/And/Or: 2, Not/Group: 1
};

struct ActionArg {
    std::string lexeme;
    Value value;
};

struct ActionSpec {
    std::string provider;
    std::string service;
    std::string method;
    std::vector<ActionArg> args;
    bool semicolon = false;
    int line = 0;

    /// `<provider>.service:method(args)`
    std::string to_string() const;
};

struct Rule {
    EventRef event;
    ExprPtr condition;  // null: always true
    std::vector<ActionSpec> actions;
    bool braced = false;  // `When E() {if C Then DO ...}` form
    std::string when_kw = "When", if_kw = "If", then_kw = "THEN", do_kw = "DO";
    int line = 0;
};

enum class RuleMode { Sequence, Choice, Loop };

std::string_view to_string(RuleMode mode);

struct Target {
    std::string name;
    bool angled = false;

    /// Names ending in `*` are templates and match by prefix.
    bool is_template() const { return !name.empty() && name.back() == '*'; }
    bool matches(std::string_view entity) const;
};

struct RuleSet {
    std::vector<Target> targets;
    RuleMode mode = RuleMode::Sequence;
    std::optional<EventRef> stop_event;  // loop mode only
    std::vector<Rule> rules;
    bool explicit_mode = false;
    std::string rules_kw = "rules", for_kw = "for", mode_kw, until_kw = "until";
    int line = 0;

    /// Target names joined by ',', or `rules@<line>` when untargeted.
    std::string label() const;
};

struct RuleFile {
    std::vector<RuleSet> sets;
    bool wrapped = false;  // Begin { ... } End
    std::string begin_kw = "Begin", end_kw = "End";
};

/// Throws SourceError(SyntaxError) with the offending line and column and
/// the set of tokens that would have been accepted.
RuleFile parse_rules(std::string_view text);

/// Canonical layout; tokenize(unparse(parse(t))) == tokenize(t).
std::string unparse(const RuleFile& file);
std::string unparse(const Expr& expr);

/// Indented AST dump used by the CLI.
std::string pretty_print(const RuleFile& file);

}  // namespace homectx::eca
