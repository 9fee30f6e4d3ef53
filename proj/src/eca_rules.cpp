#include "homectx/eca_rules.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <sstream>

#include "homectx/error.hpp"

namespace homectx::eca {

namespace {

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }
bool digit(char c) { return c >= '0' && c <= '9'; }

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
    return out;
}

const char* const kKeywords[] = {"rules", "for",      "when",   "if",   "then",  "do",   "begin",
                                 "end",   "sequence", "choice", "loop", "until", "true", "false"};

bool is_keyword(const Token& t) {
    if (t.kind != TokenKind::Ident) return false;
    const auto l = lower(t.text);
    return std::find(std::begin(kKeywords), std::end(kKeywords), l) != std::end(kKeywords);
}

std::string quote(std::string_view s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
    }
    return out + '"';
}

}  // namespace

std::vector<Token> tokenize(std::string_view text) {
    std::vector<Token> out;
    int line = 1, col = 1;
    std::size_t i = 0;
    auto advance = [&](std::size_t n) {
        for (std::size_t k = 0; k < n && i < text.size(); ++k, ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
    };
    while (i < text.size()) {
        const char c = text[i];
        if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
            advance(1);
            continue;
        }
        if (c == '/' && i + 1 < text.size() && text[i + 1] == '/') {
            while (i < text.size() && text[i] != '\n') advance(1);
            continue;
        }
        Token t;
        t.line = line;
        t.col = col;
        std::size_t j = i;
        if (ident_start(c)) {
            while (true) {
                while (j < text.size() && ident_char(text[j])) ++j;
                if (j + 1 < text.size() && text[j] == '.' && ident_start(text[j + 1])) {
                    ++j;
                    continue;
                }
                break;
            }
            if (j < text.size() && text[j] == '*') ++j;
            t.kind = TokenKind::Ident;
        } else if (digit(c) || (c == '-' && j + 1 < text.size() && digit(text[j + 1]))) {
            ++j;
            while (j < text.size() && digit(text[j])) ++j;
            if (j + 1 < text.size() && text[j] == ':' && digit(text[j + 1])) {
                ++j;
                while (j < text.size() && digit(text[j])) ++j;
                t.kind = TokenKind::Time;
            } else {
                if (j + 1 < text.size() && text[j] == '.' && digit(text[j + 1])) {
                    ++j;
                    while (j < text.size() && digit(text[j])) ++j;
                }
                t.kind = TokenKind::Number;
            }
        } else if (c == '"') {
            ++j;
            std::string body;
            bool closed = false;
            while (j < text.size()) {
                if (text[j] == '\\' && j + 1 < text.size()) {
                    body += text[j + 1];
                    j += 2;
                    continue;
                }
                if (text[j] == '"') {
                    closed = true;
                    ++j;
                    break;
                }
                if (text[j] == '\n') break;
                body += text[j++];
            }
            if (!closed) throw SourceError(ErrorCode::SyntaxError, line, col, "unterminated string literal");
            t.kind = TokenKind::String;
            t.text = std::move(body);
            out.push_back(std::move(t));
            advance(j - i);
            continue;
        } else {
            static const char* const two[] = {"&&", "||", "<=", ">=", "==", "!="};
            bool matched = false;
            for (const char* op : two) {
                if (text.substr(i, 2) == op) {
                    j = i + 2;
                    matched = true;
                    break;
                }
            }
            if (!matched) {
                if (std::string_view("<>(){},;:.!").find(c) == std::string_view::npos)
                    throw SourceError(ErrorCode::SyntaxError, line, col, std::string("unexpected character '") + c + "'");
                j = i + 1;
            }
            t.kind = TokenKind::Punct;
        }
        t.text = std::string(text.substr(i, j - i));
        out.push_back(std::move(t));
        advance(j - i);
    }
    Token end;
    end.kind = TokenKind::End;
    end.line = line;
    end.col = col;
    out.push_back(end);
    return out;
}

std::vector<std::string> token_texts(std::string_view text) {
    std::vector<std::string> out;
    for (const auto& t : tokenize(text)) {
        if (t.kind == TokenKind::End) break;
        out.push_back(t.kind == TokenKind::String ? quote(t.text) : t.text);
    }
    return out;
}

std::string ActionSpec::to_string() const {
    std::string s = "<" + provider + ">." + service + ":" + method + "(";
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (i) s += ", ";
        s += args[i].lexeme;
    }
    return s + ")";
}

std::string_view to_string(RuleMode mode) {
    switch (mode) {
        case RuleMode::Sequence: return "sequence";
        case RuleMode::Choice: return "choice";
        case RuleMode::Loop: return "loop";
    }
    return "?";
}

bool Target::matches(std::string_view entity) const {
    if (!is_template()) return entity == name;
    const std::string_view prefix(name.data(), name.size() - 1);
    return entity.substr(0, prefix.size()) == prefix;
}

std::string RuleSet::label() const {
    if (targets.empty()) return "rules@" + std::to_string(line);
    std::string s;
    for (std::size_t i = 0; i < targets.size(); ++i) {
        if (i) s += ',';
        s += targets[i].name;
    }
    return s;
}

namespace {

class Parser {
public:
    explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

    RuleFile file() {
        RuleFile f;
        if (kw("begin")) {
            f.wrapped = true;
            f.begin_kw = take().text;
            expect_punct("{");
            while (!punct("}")) {
                if (!kw("rules")) fail({"rules", "}"});
                f.sets.push_back(rule_set());
            }
            take();
            if (!kw("end")) fail({"End"});
            f.end_kw = take().text;
        } else {
            if (!kw("rules")) fail({"rules", "Begin"});
            while (kw("rules")) f.sets.push_back(rule_set());
        }
        if (peek().kind != TokenKind::End) fail({f.wrapped ? "end of input" : "rules"});
        return f;
    }

private:
    const Token& peek(std::size_t ahead = 0) const { return toks_[std::min(pos_ + ahead, toks_.size() - 1)]; }
    Token take() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }

    bool kw(const char* word, std::size_t ahead = 0) const {
        const auto& t = peek(ahead);
        return t.kind == TokenKind::Ident && lower(t.text) == word;
    }
    bool punct(const char* p) const { return peek().kind == TokenKind::Punct && peek().text == p; }

    [[noreturn]] void fail(std::initializer_list<const char*> expected) const {
        const auto& t = peek();
        std::string msg = "expected ";
        bool first = true;
        for (const char* e : expected) {
            msg += first ? "" : " or ";
            msg += "'";
            msg += e;
            msg += "'";
            first = false;
        }
        msg += t.kind == TokenKind::End ? " but reached end of input" : " but found '" + t.text + "'";
        throw SourceError(ErrorCode::SyntaxError, t.line, t.col, msg);
    }

    void expect_punct(const char* p) {
        if (!punct(p)) fail({p});
        take();
    }

    std::string expect_keyword(const char* word, const char* display) {
        if (!kw(word)) fail({display});
        return take().text;
    }

    std::string name(const char* what) {
        if (peek().kind != TokenKind::Ident || is_keyword(peek())) fail({what});
        return take().text;
    }

    RuleSet rule_set() {
        RuleSet rs;
        rs.line = peek().line;
        rs.rules_kw = take().text;
        if (kw("for")) {
            rs.for_kw = take().text;
            do {
                if (!rs.targets.empty()) take();
                Target t;
                if (punct("<")) {
                    take();
                    t.name = name("target name");
                    t.angled = true;
                    expect_punct(">");
                } else {
                    t.name = name("target name");
                }
                rs.targets.push_back(std::move(t));
            } while (punct(","));
        }
        if (kw("sequence") || kw("choice")) {
            rs.explicit_mode = true;
            rs.mode = kw("choice") ? RuleMode::Choice : RuleMode::Sequence;
            rs.mode_kw = take().text;
        } else if (kw("loop")) {
            rs.explicit_mode = true;
            rs.mode = RuleMode::Loop;
            rs.mode_kw = take().text;
            rs.until_kw = expect_keyword("until", "until");
            rs.stop_event = event_ref();
        }
        expect_punct("{");
        while (!punct("}")) {
            if (!kw("when")) fail({"When", "}"});
            rs.rules.push_back(rule());
        }
        take();
        return rs;
    }

    EventRef event_ref() {
        EventRef e;
        e.line = peek().line;
        e.name = name("event name");
        if (punct("(")) {
            take();
            expect_punct(")");
            e.call_parens = true;
        }
        return e;
    }

    Rule rule() {
        Rule r;
        r.line = peek().line;
        r.when_kw = take().text;
        r.event = event_ref();
        if (punct("{")) {
            take();
            r.braced = true;
        }
        if (kw("if")) {
            r.if_kw = take().text;
            r.condition = expr();
        }
        if (!kw("then")) fail(r.condition ? std::initializer_list<const char*>{"THEN DO", "&&", "||"}
                                          : std::initializer_list<const char*>{"THEN DO", "If"});
        r.then_kw = take().text;
        r.do_kw = expect_keyword("do", "THEN DO");
        if (!punct("<")) fail({"<"});
        while (punct("<")) r.actions.push_back(action());
        if (r.braced) {
            if (!punct("}")) fail({"<", "}"});
            take();
        }
        return r;
    }

    ActionSpec action() {
        ActionSpec a;
        a.line = peek().line;
        expect_punct("<");
        a.provider = name("provider name");
        expect_punct(">");
        expect_punct(".");
        a.service = name("service name");
        expect_punct(":");
        a.method = name("method name");
        expect_punct("(");
        if (!punct(")")) {
            while (true) {
                a.args.push_back(argument());
                if (!punct(",")) break;
                take();
            }
        }
        expect_punct(")");
        if (punct(";")) {
            take();
            a.semicolon = true;
        }
        return a;
    }

    ActionArg argument() {
        const auto& t = peek();
        switch (t.kind) {
            case TokenKind::Number:
            case TokenKind::Time:
            case TokenKind::String: {
                auto op = literal();
                return ActionArg{op.lexeme, op.literal};
            }
            case TokenKind::Ident: {
                if (kw("true") || kw("false")) {
                    auto op = literal();
                    return ActionArg{op.lexeme, op.literal};
                }
                auto text = name("argument");
                return ActionArg{text, Value::entity(text)};
            }
            default: fail({"argument", ")"});
        }
    }

    Operand literal() {
        Token t = take();
        Operand op;
        op.kind = Operand::Kind::Literal;
        switch (t.kind) {
            case TokenKind::Number: {
                double v = 0;
                std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
                op.lexeme = t.text;
                op.literal = Value::number(v);
                break;
            }
            case TokenKind::Time: {
                auto m = parse_time_of_day(t.text);
                if (!m) throw SourceError(ErrorCode::SyntaxError, t.line, t.col, "invalid time of day '" + t.text + "'");
                op.lexeme = t.text;
                op.literal = Value::time_of_day(*m);
                break;
            }
            case TokenKind::String:
                op.lexeme = quote(t.text);
                op.literal = Value::text(t.text);
                break;
            default:
                op.lexeme = t.text;
                op.literal = Value::boolean(lower(t.text) == "true");
                break;
        }
        return op;
    }

    ExprPtr expr() {
        auto lhs = conjunction();
        while (punct("||")) {
            take();
            auto e = std::make_shared<Expr>();
            e->kind = ExprKind::Or;
            e->args = {lhs, conjunction()};
            lhs = e;
        }
        return lhs;
    }

    ExprPtr conjunction() {
        auto lhs = unary();
        while (punct("&&")) {
            take();
            auto e = std::make_shared<Expr>();
            e->kind = ExprKind::And;
            e->args = {lhs, unary()};
            lhs = e;
        }
        return lhs;
    }

    ExprPtr unary() {
        if (punct("!")) {
            take();
            auto e = std::make_shared<Expr>();
            e->kind = ExprKind::Not;
            e->args = {unary()};
            return e;
        }
        if (punct("(")) {
            take();
            auto e = std::make_shared<Expr>();
            e->kind = ExprKind::Group;
            e->args = {expr()};
            expect_punct(")");
            return e;
        }
        auto lhs = operand();
        static const char* const ops[] = {"<", "<=", ">", ">=", "==", "!="};
        for (const char* op : ops) {
            if (punct(op)) {
                take();
                auto e = std::make_shared<Expr>();
                e->kind = ExprKind::Compare;
                e->op = op;
                e->args = {lhs, operand()};
                return e;
            }
        }
        return lhs;
    }

    ExprPtr operand() {
        auto e = std::make_shared<Expr>();
        e->kind = ExprKind::Operand;
        const auto& t = peek();
        if (t.kind == TokenKind::Number || t.kind == TokenKind::Time || t.kind == TokenKind::String ||
            kw("true") || kw("false")) {
            e->operand = literal();
        } else if (t.kind == TokenKind::Ident && !is_keyword(t)) {
            e->operand.kind = Operand::Kind::Variable;
            e->operand.lexeme = take().text;
        } else {
            fail({"variable", "literal", "(", "!"});
        }
        return e;
    }

    std::vector<Token> toks_;
    std::size_t pos_ = 0;
};

void emit_event(std::ostream& out, const EventRef& e) {
    out << e.name;
    if (e.call_parens) out << "()";
}

void emit_expr(std::ostream& out, const Expr& e) {
    switch (e.kind) {
        case ExprKind::Operand: out << e.operand.lexeme; break;
        case ExprKind::Compare:
            emit_expr(out, *e.args[0]);
            out << e.op;
            emit_expr(out, *e.args[1]);
            break;
        case ExprKind::Not:
            out << '!';
            emit_expr(out, *e.args[0]);
            break;
        case ExprKind::And:
        case ExprKind::Or:
            emit_expr(out, *e.args[0]);
            out << (e.kind == ExprKind::And ? " && " : " || ");
            emit_expr(out, *e.args[1]);
            break;
        case ExprKind::Group:
            out << '(';
            emit_expr(out, *e.args[0]);
            out << ')';
            break;
    }
}

void emit_action(std::ostream& out, const ActionSpec& a) {
    out << a.to_string();
    if (a.semicolon) out << ';';
}

void emit_set(std::ostream& out, const RuleSet& rs, const std::string& indent) {
    const std::string in1 = indent + "    ", in2 = in1 + "    ";
    out << indent << rs.rules_kw;
    if (!rs.targets.empty()) {
        out << ' ' << rs.for_kw << ' ';
        for (std::size_t i = 0; i < rs.targets.size(); ++i) {
            if (i) out << ", ";
            const auto& t = rs.targets[i];
            out << (t.angled ? "<" + t.name + ">" : t.name);
        }
    }
    if (rs.explicit_mode) {
        out << ' ' << rs.mode_kw;
        if (rs.stop_event) {
            out << ' ' << rs.until_kw << ' ';
            emit_event(out, *rs.stop_event);
        }
    }
    out << " {\n";
    for (const auto& r : rs.rules) {
        out << in1 << r.when_kw << ' ';
        emit_event(out, r.event);
        if (r.braced) {
            out << " {";
            if (r.condition) {
                out << r.if_kw << ' ';
                emit_expr(out, *r.condition);
                out << '\n' << in1;
            }
            out << r.then_kw << ' ' << r.do_kw << '\n';
            for (const auto& a : r.actions) {
                out << in2;
                emit_action(out, a);
                out << '\n';
            }
            out << in1 << "}\n";
        } else {
            if (r.condition) {
                out << ' ' << r.if_kw << ' ';
                emit_expr(out, *r.condition);
            }
            out << ' ' << r.then_kw << ' ' << r.do_kw;
            if (r.actions.size() == 1) {
                out << ' ';
                emit_action(out, r.actions.front());
                out << '\n';
            } else {
                out << '\n';
                for (const auto& a : r.actions) {
                    out << in2;
                    emit_action(out, a);
                    out << '\n';
                }
            }
        }
    }
    out << indent << "}\n";
}

void pretty_expr(std::ostream& out, const Expr& e, const std::string& indent) {
    switch (e.kind) {
        case ExprKind::Operand:
            out << indent << (e.operand.kind == Operand::Kind::Variable ? "var " : "lit ") << e.operand.lexeme << '\n';
            return;
        case ExprKind::Compare: out << indent << "cmp " << e.op << '\n'; break;
        case ExprKind::Not: out << indent << "not\n"; break;
        case ExprKind::And: out << indent << "and\n"; break;
        case ExprKind::Or: out << indent << "or\n"; break;
        case ExprKind::Group: out << indent << "group\n"; break;
    }
    for (const auto& a : e.args) pretty_expr(out, *a, indent + "  ");
}

}  // namespace

RuleFile parse_rules(std::string_view text) { return Parser(tokenize(text)).file(); }

std::string unparse(const RuleFile& file) {
    std::ostringstream out;
    if (file.wrapped) {
        out << file.begin_kw << " {\n";
        for (const auto& rs : file.sets) emit_set(out, rs, "    ");
        out << "} " << file.end_kw << '\n';
    } else {
        for (const auto& rs : file.sets) emit_set(out, rs, "");
    }
    return out.str();
}

std::string unparse(const Expr& expr) {
    std::ostringstream out;
    emit_expr(out, expr);
    return out.str();
}

std::string pretty_print(const RuleFile& file) {
    std::ostringstream out;
    out << "RuleFile" << (file.wrapped ? " (Begin/End)" : "") << " sets=" << file.sets.size() << '\n';
    for (const auto& rs : file.sets) {
        out << "  RuleSet " << rs.label() << " mode=" << to_string(rs.mode);
        if (rs.stop_event) out << " until=" << rs.stop_event->name;
        out << " line=" << rs.line << '\n';
        for (const auto& r : rs.rules) {
            out << "    Rule line=" << r.line << " event=" << r.event.name << '\n';
            if (r.condition) {
                out << "      condition: " << unparse(*r.condition) << '\n';
                pretty_expr(out, *r.condition, "        ");
            }
            for (const auto& a : r.actions) out << "      action: " << a.to_string() << '\n';
        }
    }
    return out.str();
}

}  // namespace homectx::eca
