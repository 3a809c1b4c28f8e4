#include <sstream>

#include "core/rules.hpp"

namespace pacta {

namespace {

std::string quote(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') out.push_back('\\');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

void join_idents(std::ostringstream& out, const std::vector<std::string>& items) {
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) out << ", ";
        out << items[i];
    }
}

std::string op_set(const std::set<std::string>& ops) {
    std::string out = "{";
    bool first = true;
    for (const auto& op : ops) {
        if (!first) out += ", ";
        out += op;
        first = false;
    }
    return out + "}";
}

// Precedence: or < and < not < atom. Parenthesize a child when it binds
// looser than its parent, or equally on the right of a left-associative
// operator, so the printed form re-parses to the same tree.
int precedence(GuardExpr::Kind kind) {
    switch (kind) {
        case GuardExpr::Kind::Or: return 1;
        case GuardExpr::Kind::And: return 2;
        case GuardExpr::Kind::Not: return 3;
        default: return 4;
    }
}

void print_guard(std::ostringstream& out, const GuardPtr& g, int parent_prec, bool rhs) {
    int prec = precedence(g->kind);
    bool parens = prec < parent_prec || (prec == parent_prec && rhs && prec <= 2);
    if (parens) out << "(";
    switch (g->kind) {
        case GuardExpr::Kind::Rights:
            out << "rights(" << g->role << ", " << g->name << ")";
            break;
        case GuardExpr::Kind::Pending:
            out << "pending(" << g->role << ", " << quote(g->name) << ")";
            break;
        case GuardExpr::Kind::Prohibited:
            out << "prohibited(" << g->role << ", " << g->name << ")";
            break;
        case GuardExpr::Kind::State:
            out << "state(" << g->name << ")";
            break;
        case GuardExpr::Kind::Not:
            out << "not ";
            print_guard(out, g->lhs, precedence(GuardExpr::Kind::Not), false);
            break;
        case GuardExpr::Kind::And:
        case GuardExpr::Kind::Or:
            print_guard(out, g->lhs, prec, false);
            out << (g->kind == GuardExpr::Kind::And ? " and " : " or ");
            print_guard(out, g->rhs, prec, true);
            break;
    }
    if (parens) out << ")";
}

std::string action_text(const Action& action) {
    std::ostringstream out;
    if (const auto* a = std::get_if<RemoveRightAction>(&action)) {
        out << "remove_right(" << a->role << ", " << a->op << ", " << a->counterparty << ")";
    } else if (const auto* a = std::get_if<AddRightAction>(&action)) {
        out << "add_right(" << a->role << ", " << op_set(a->ops) << ", " << a->counterparty << ")";
    } else if (const auto* a = std::get_if<AddObligationAction>(&action)) {
        out << "add_obligation(" << quote(a->name) << ", " << op_set(a->ops) << ", " << a->obligor
            << ", " << a->counterparty << ", " << format_duration(a->deadline_ms) << ")";
    } else if (const auto* a = std::get_if<AddProhibitionAction>(&action)) {
        out << "add_prohibition(" << a->role << ", " << op_set(a->ops) << ")";
    } else if (const auto* a = std::get_if<SetStateAction>(&action)) {
        out << "set_state(" << a->state << ")";
    } else if (const auto* a = std::get_if<SetComplianceAction>(&action)) {
        out << "compliant(" << (a->compliant ? "true" : "false") << ")";
    }
    return out.str();
}

void print_actions(std::ostringstream& out, const std::vector<Action>& actions,
                   const std::string& head) {
    out << "  " << head << " ";
    std::string indent(head.size() + 3, ' ');
    for (std::size_t i = 0; i < actions.size(); ++i) {
        if (i) out << ";\n" << indent;
        out << action_text(actions[i]);
    }
    out << "\n";
}

}  // namespace

std::string format_duration(Duration ms) {
    struct Unit {
        Duration factor;
        const char* suffix;
    };
    static const Unit units[] = {{86'400'000, "d"}, {3'600'000, "h"}, {60'000, "min"}, {1000, "s"}};
    for (const auto& u : units) {
        if (ms % u.factor == 0 && ms != 0) return std::to_string(ms / u.factor) + u.suffix;
    }
    return std::to_string(ms) + "ms";
}

std::string pretty_print(const RuleSet& rs) {
    std::ostringstream out;
    out << "contract " << rs.contract_name << "\n";
    out << "roles ";
    join_idents(out, rs.roles);
    out << "\noperations ";
    join_idents(out, rs.operations);
    out << "\nstates ";
    join_idents(out, rs.states);
    out << " initial " << rs.initial_state << "\n";
    for (const auto& rule : rs.rules) {
        out << "\nrule " << quote(rule.name) << "\n";
        out << "  when event type=" << rule.pattern.type << " originator="
            << rule.pattern.originator << " responder=" << rule.pattern.responder << " status=";
        switch (rule.pattern.status) {
            case StatusPattern::Success: out << "success"; break;
            case StatusPattern::Failure: out << "failure"; break;
            case StatusPattern::Any: out << "*"; break;
        }
        out << "\n";
        if (rule.guard) {
            std::ostringstream g;
            print_guard(g, rule.guard, 0, false);
            out << "  if " << g.str() << "\n";
        }
        print_actions(out, rule.on_match, "then");
        if (!rule.on_else.empty()) {
            print_actions(out, rule.on_else, "else");
        }
        out << "end\n";
    }
    return out.str();
}

}  // namespace pacta
