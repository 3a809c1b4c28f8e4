#include <algorithm>
#include <cctype>

#include "core/rules.hpp"

namespace pacta {

GuardPtr guard_rights(std::string role, std::string op) {
    return std::make_shared<GuardExpr>(
        GuardExpr{GuardExpr::Kind::Rights, std::move(role), std::move(op), nullptr, nullptr});
}
GuardPtr guard_pending(std::string role, std::string obligation) {
    return std::make_shared<GuardExpr>(GuardExpr{GuardExpr::Kind::Pending, std::move(role),
                                                 std::move(obligation), nullptr, nullptr});
}
GuardPtr guard_prohibited(std::string role, std::string op) {
    return std::make_shared<GuardExpr>(
        GuardExpr{GuardExpr::Kind::Prohibited, std::move(role), std::move(op), nullptr, nullptr});
}
GuardPtr guard_state(std::string state) {
    return std::make_shared<GuardExpr>(
        GuardExpr{GuardExpr::Kind::State, "", std::move(state), nullptr, nullptr});
}
GuardPtr guard_not(GuardPtr e) {
    return std::make_shared<GuardExpr>(
        GuardExpr{GuardExpr::Kind::Not, "", "", std::move(e), nullptr});
}
GuardPtr guard_and(GuardPtr a, GuardPtr b) {
    return std::make_shared<GuardExpr>(
        GuardExpr{GuardExpr::Kind::And, "", "", std::move(a), std::move(b)});
}
GuardPtr guard_or(GuardPtr a, GuardPtr b) {
    return std::make_shared<GuardExpr>(
        GuardExpr{GuardExpr::Kind::Or, "", "", std::move(a), std::move(b)});
}

bool guard_equal(const GuardPtr& a, const GuardPtr& b) {
    if (!a || !b) return !a && !b;
    if (a->kind != b->kind || a->role != b->role || a->name != b->name) return false;
    return guard_equal(a->lhs, b->lhs) && guard_equal(a->rhs, b->rhs);
}

bool Rule::operator==(const Rule& other) const {
    return name == other.name && pattern == other.pattern && guard_equal(guard, other.guard) &&
           on_match == other.on_match && on_else == other.on_else;
}

bool RuleSet::has_role(const std::string& r) const {
    return std::find(roles.begin(), roles.end(), r) != roles.end();
}
bool RuleSet::has_operation(const std::string& op) const {
    return std::find(operations.begin(), operations.end(), op) != operations.end();
}
bool RuleSet::has_state(const std::string& s) const {
    return std::find(states.begin(), states.end(), s) != states.end();
}

namespace {

enum class TokKind { Ident, String, Number, DurationTok, Symbol, End };

struct Token {
    TokKind kind = TokKind::End;
    std::string text;       // ident text, string content, or symbol
    std::int64_t value = 0;  // Number / DurationTok value
    std::string unit;        // DurationTok unit suffix
    int line = 1;
    int column = 1;
};

class Lexer {
public:
    explicit Lexer(const std::string& src) : src_(src) { advance(); }

    const Token& peek() const { return tok_; }

    Token next() {
        Token t = tok_;
        advance();
        return t;
    }

private:
    void advance() {
        skip_ws_and_comments();
        tok_ = Token{};
        tok_.line = line_;
        tok_.column = col_;
        if (pos_ >= src_.size()) {
            tok_.kind = TokKind::End;
            return;
        }
        char c = src_[pos_];
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            tok_.kind = TokKind::Ident;
            tok_.text = take_ident();
            return;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            std::int64_t v = 0;
            while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
                v = v * 10 + (src_[pos_] - '0');
                bump();
            }
            if (pos_ < src_.size() &&
                (std::isalpha(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) {
                tok_.kind = TokKind::DurationTok;
                tok_.value = v;
                tok_.unit = take_ident();
            } else {
                tok_.kind = TokKind::Number;
                tok_.value = v;
            }
            return;
        }
        if (c == '"') {
            bump();
            std::string s;
            while (pos_ < src_.size() && src_[pos_] != '"') {
                if (src_[pos_] == '\\' && pos_ + 1 < src_.size()) bump();
                if (src_[pos_] == '\n') {
                    throw ParseError(tok_.line, tok_.column, "unterminated string literal");
                }
                s.push_back(src_[pos_]);
                bump();
            }
            if (pos_ >= src_.size()) {
                throw ParseError(tok_.line, tok_.column, "unterminated string literal");
            }
            bump();  // closing quote
            tok_.kind = TokKind::String;
            tok_.text = std::move(s);
            return;
        }
        static const std::string symbols = ",={}();*:";
        if (symbols.find(c) != std::string::npos) {
            tok_.kind = TokKind::Symbol;
            tok_.text = std::string(1, c);
            bump();
            return;
        }
        throw ParseError(line_, col_, std::string("unexpected character '") + c + "'");
    }

    std::string take_ident() {
        std::string s;
        while (pos_ < src_.size()) {
            char c = src_[pos_];
            if (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-') {
                s.push_back(c);
                bump();
            } else {
                break;
            }
        }
        return s;
    }

    void skip_ws_and_comments() {
        while (pos_ < src_.size()) {
            char c = src_[pos_];
            if (c == '#') {
                while (pos_ < src_.size() && src_[pos_] != '\n') bump();
            } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
                bump();
            } else {
                break;
            }
        }
    }

    void bump() {
        if (src_[pos_] == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        ++pos_;
    }

    const std::string& src_;
    std::size_t pos_ = 0;
    int line_ = 1;
    int col_ = 1;
    Token tok_;
};

Duration duration_from(std::int64_t value, const std::string& unit, const Token& at) {
    if (unit == "ms") return value;
    if (unit == "s") return value * 1000;
    if (unit == "min") return value * 60'000;
    if (unit == "h") return value * 3'600'000;
    if (unit == "d") return value * 86'400'000;
    throw ParseError(at.line, at.column, "unknown duration unit '" + unit + "'");
}

class Parser {
public:
    explicit Parser(const std::string& src) : lex_(src) {}

    RuleSet parse() {
        expect_keyword("contract");
        rs_.contract_name = take(TokKind::Ident, "contract name").text;
        expect_keyword("roles");
        rs_.roles = ident_list("role");
        expect_keyword("operations");
        rs_.operations = ident_list("operation");
        expect_keyword("states");
        rs_.states = ident_list("state");
        expect_keyword("initial");
        Token init = take(TokKind::Ident, "initial state");
        if (std::find(rs_.states.begin(), rs_.states.end(), init.text) == rs_.states.end()) {
            throw ParseError(init.line, init.column,
                             "initial state '" + init.text + "' is not a declared state");
        }
        rs_.initial_state = init.text;
        while (lex_.peek().kind != TokKind::End) {
            rs_.rules.push_back(parse_rule());
        }
        return std::move(rs_);
    }

private:
    Rule parse_rule() {
        expect_keyword("rule");
        Rule rule;
        Token name = take(TokKind::String, "rule name string");
        for (const auto& existing : rs_.rules) {
            if (existing.name == name.text) {
                throw ParseError(name.line, name.column,
                                 "duplicate rule name \"" + name.text + "\"");
            }
        }
        rule.name = name.text;
        expect_keyword("when");
        expect_keyword("event");
        rule.pattern = parse_pattern();
        if (peek_keyword("if")) {
            lex_.next();
            rule.guard = parse_or();
        }
        expect_keyword("then");
        rule.on_match = parse_actions();
        if (peek_keyword("else")) {
            lex_.next();
            rule.on_else = parse_actions();
        }
        Token end = take(TokKind::Ident, "'end'");
        if (end.text != "end") {
            throw ParseError(end.line, end.column, "expected 'end', got '" + end.text + "'");
        }
        if (rule.on_match.empty()) {
            throw ParseError(name.line, name.column,
                             "rule \"" + rule.name + "\" must have at least one action");
        }
        return rule;
    }

    EventPattern parse_pattern() {
        EventPattern p;
        expect_keyword("type");
        expect_symbol("=");
        Token type = take(TokKind::Ident, "event type");
        p.type = type.text;
        if (peek_symbol(":")) {
            lex_.next();
            Token suffix = take(TokKind::Ident, "obligation name after ':'");
            p.type += ":" + suffix.text;
        }
        expect_keyword("originator");
        expect_symbol("=");
        p.originator = role_or_star();
        expect_keyword("responder");
        expect_symbol("=");
        p.responder = role_or_star();
        expect_keyword("status");
        expect_symbol("=");
        if (peek_symbol("*")) {
            lex_.next();
            p.status = StatusPattern::Any;
        } else {
            Token st = take(TokKind::Ident, "status");
            if (st.text == "success") {
                p.status = StatusPattern::Success;
            } else if (st.text == "failure") {
                p.status = StatusPattern::Failure;
            } else {
                throw ParseError(st.line, st.column,
                                 "status must be success, failure or *, got '" + st.text + "'");
            }
        }
        return p;
    }

    GuardPtr parse_or() {
        GuardPtr e = parse_and();
        while (peek_keyword("or")) {
            lex_.next();
            e = guard_or(std::move(e), parse_and());
        }
        return e;
    }

    GuardPtr parse_and() {
        GuardPtr e = parse_unary();
        while (peek_keyword("and")) {
            lex_.next();
            e = guard_and(std::move(e), parse_unary());
        }
        return e;
    }

    GuardPtr parse_unary() {
        if (peek_keyword("not")) {
            lex_.next();
            return guard_not(parse_unary());
        }
        if (peek_symbol("(")) {
            lex_.next();
            GuardPtr e = parse_or();
            expect_symbol(")");
            return e;
        }
        Token fn = take(TokKind::Ident, "guard predicate");
        if (fn.text == "rights" || fn.text == "prohibited") {
            expect_symbol("(");
            std::string role = declared_role();
            expect_symbol(",");
            Token op = take(TokKind::Ident, "operation");
            expect_symbol(")");
            return fn.text == "rights" ? guard_rights(role, op.text)
                                       : guard_prohibited(role, op.text);
        }
        if (fn.text == "pending") {
            expect_symbol("(");
            std::string role = declared_role();
            expect_symbol(",");
            Token name = take(TokKind::String, "obligation name string");
            expect_symbol(")");
            return guard_pending(role, name.text);
        }
        if (fn.text == "state") {
            expect_symbol("(");
            std::string state = declared_state();
            expect_symbol(")");
            return guard_state(state);
        }
        throw ParseError(fn.line, fn.column, "unknown guard predicate '" + fn.text + "'");
    }

    std::vector<Action> parse_actions() {
        std::vector<Action> actions;
        actions.push_back(parse_action());
        while (peek_symbol(";")) {
            lex_.next();
            actions.push_back(parse_action());
        }
        return actions;
    }

    Action parse_action() {
        Token fn = take(TokKind::Ident, "action");
        if (fn.text == "remove_right") {
            expect_symbol("(");
            std::string role = declared_role();
            expect_symbol(",");
            Token op = take(TokKind::Ident, "operation");
            expect_symbol(",");
            std::string cp = declared_role();
            expect_symbol(")");
            return RemoveRightAction{role, op.text, cp};
        }
        if (fn.text == "add_right") {
            expect_symbol("(");
            std::string role = declared_role();
            expect_symbol(",");
            auto ops = op_set();
            expect_symbol(",");
            std::string cp = declared_role();
            expect_symbol(")");
            return AddRightAction{role, std::move(ops), cp};
        }
        if (fn.text == "add_obligation") {
            expect_symbol("(");
            Token name = take(TokKind::String, "obligation name string");
            expect_symbol(",");
            auto ops = op_set();
            expect_symbol(",");
            std::string obligor = declared_role();
            expect_symbol(",");
            std::string cp = declared_role();
            expect_symbol(",");
            Token dur = take(TokKind::DurationTok, "duration (e.g. 10min)");
            expect_symbol(")");
            Duration ms = duration_from(dur.value, dur.unit, dur);
            if (ms <= 0) {
                throw ParseError(dur.line, dur.column, "obligation deadline must be positive");
            }
            return AddObligationAction{name.text, std::move(ops), obligor, cp, ms};
        }
        if (fn.text == "add_prohibition") {
            expect_symbol("(");
            std::string role = declared_role();
            expect_symbol(",");
            auto ops = op_set();
            expect_symbol(")");
            return AddProhibitionAction{role, std::move(ops)};
        }
        if (fn.text == "set_state") {
            expect_symbol("(");
            std::string state = declared_state();
            expect_symbol(")");
            return SetStateAction{state};
        }
        if (fn.text == "compliant") {
            expect_symbol("(");
            Token b = take(TokKind::Ident, "true or false");
            expect_symbol(")");
            if (b.text != "true" && b.text != "false") {
                throw ParseError(b.line, b.column, "compliant() takes true or false");
            }
            return SetComplianceAction{b.text == "true"};
        }
        throw ParseError(fn.line, fn.column, "unknown action '" + fn.text + "'");
    }

    std::set<std::string> op_set() {
        expect_symbol("{");
        std::set<std::string> ops;
        ops.insert(take(TokKind::Ident, "operation").text);
        while (peek_symbol(",")) {
            lex_.next();
            ops.insert(take(TokKind::Ident, "operation").text);
        }
        expect_symbol("}");
        return ops;
    }

    std::string role_or_star() {
        if (peek_symbol("*")) {
            lex_.next();
            return "*";
        }
        return declared_role();
    }

    std::string declared_role() {
        Token t = take(TokKind::Ident, "role");
        if (!rs_.has_role(t.text)) {
            throw ParseError(t.line, t.column, "role '" + t.text + "' is not declared");
        }
        return t.text;
    }

    std::string declared_state() {
        Token t = take(TokKind::Ident, "state");
        if (!rs_.has_state(t.text)) {
            throw ParseError(t.line, t.column, "state '" + t.text + "' is not declared");
        }
        return t.text;
    }

    std::vector<std::string> ident_list(const char* what) {
        std::vector<std::string> items;
        for (;;) {
            Token t = take(TokKind::Ident, what);
            if (std::find(items.begin(), items.end(), t.text) != items.end()) {
                throw ParseError(t.line, t.column,
                                 "duplicate " + std::string(what) + " '" + t.text + "'");
            }
            items.push_back(t.text);
            if (!peek_symbol(",")) break;
            lex_.next();
        }
        return items;
    }

    bool peek_keyword(const char* kw) const {
        return lex_.peek().kind == TokKind::Ident && lex_.peek().text == kw;
    }

    bool peek_symbol(const char* sym) const {
        return lex_.peek().kind == TokKind::Symbol && lex_.peek().text == sym;
    }

    void expect_keyword(const char* kw) {
        Token t = lex_.next();
        if (t.kind != TokKind::Ident || t.text != kw) {
            throw ParseError(t.line, t.column,
                             "expected '" + std::string(kw) + "', got '" + describe(t) + "'");
        }
    }

    void expect_symbol(const char* sym) {
        Token t = lex_.next();
        if (t.kind != TokKind::Symbol || t.text != sym) {
            throw ParseError(t.line, t.column,
                             "expected '" + std::string(sym) + "', got '" + describe(t) + "'");
        }
    }

    Token take(TokKind kind, const char* what) {
        Token t = lex_.next();
        if (t.kind != kind) {
            throw ParseError(t.line, t.column,
                             "expected " + std::string(what) + ", got '" + describe(t) + "'");
        }
        return t;
    }

    static std::string describe(const Token& t) {
        switch (t.kind) {
            case TokKind::End: return "end of input";
            case TokKind::String: return "\"" + t.text + "\"";
            case TokKind::Number: return std::to_string(t.value);
            case TokKind::DurationTok: return std::to_string(t.value) + t.unit;
            default: return t.text;
        }
    }

    Lexer lex_;
    RuleSet rs_;
};

}  // namespace

RuleSet parse_rules(const std::string& source) { return Parser(source).parse(); }

}  // namespace pacta
