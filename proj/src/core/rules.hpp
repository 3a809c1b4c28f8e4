#pragma once

#include <memory>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "core/errors.hpp"
#include "core/rop.hpp"

namespace pacta {

// Event type reserved for the rule fired once when an instance is created.
inline constexpr const char* kInitEventType = "__init__";
// Prefix of the synthesized event type emitted when an obligation expires;
// the obligation name follows the colon.
inline constexpr const char* kTimeoutEventPrefix = "__timeout__:";

enum class StatusPattern { Success, Failure, Any };

struct EventPattern {
    std::string type;        // operation label or a reserved __init__/__timeout__ form
    std::string originator;  // role name or "*"
    std::string responder;   // role name or "*"
    StatusPattern status = StatusPattern::Any;

    bool operator==(const EventPattern&) const = default;
};

// Guard expression tree. Nodes are immutable once built and shared freely.
struct GuardExpr;
using GuardPtr = std::shared_ptr<const GuardExpr>;

struct GuardExpr {
    enum class Kind { Rights, Pending, Prohibited, State, Not, And, Or };

    Kind kind;
    std::string role;  // Rights / Pending / Prohibited
    std::string name;  // operation, obligation name, or state label
    GuardPtr lhs;      // Not operand, or left child
    GuardPtr rhs;      // right child
};

GuardPtr guard_rights(std::string role, std::string op);
GuardPtr guard_pending(std::string role, std::string obligation);
GuardPtr guard_prohibited(std::string role, std::string op);
GuardPtr guard_state(std::string state);
GuardPtr guard_not(GuardPtr e);
GuardPtr guard_and(GuardPtr a, GuardPtr b);
GuardPtr guard_or(GuardPtr a, GuardPtr b);

bool guard_equal(const GuardPtr& a, const GuardPtr& b);

struct RemoveRightAction {
    std::string role, op, counterparty;
    bool operator==(const RemoveRightAction&) const = default;
};
struct AddRightAction {
    std::string role;
    std::set<std::string> ops;
    std::string counterparty;
    bool operator==(const AddRightAction&) const = default;
};
struct AddObligationAction {
    std::string name;
    std::set<std::string> ops;
    std::string obligor, counterparty;
    Duration deadline_ms = 0;
    bool operator==(const AddObligationAction&) const = default;
};
struct AddProhibitionAction {
    std::string role;
    std::set<std::string> ops;
    bool operator==(const AddProhibitionAction&) const = default;
};
struct SetStateAction {
    std::string state;
    bool operator==(const SetStateAction&) const = default;
};
struct SetComplianceAction {
    bool compliant = false;
    bool operator==(const SetComplianceAction&) const = default;
};

using Action = std::variant<RemoveRightAction, AddRightAction, AddObligationAction,
                            AddProhibitionAction, SetStateAction, SetComplianceAction>;

struct Rule {
    std::string name;
    EventPattern pattern;
    GuardPtr guard;  // null means "always true"
    std::vector<Action> on_match;
    std::vector<Action> on_else;

    bool operator==(const Rule& other) const;
};

struct RuleSet {
    std::string contract_name;
    std::vector<std::string> roles;
    std::vector<std::string> operations;
    std::vector<std::string> states;
    std::string initial_state;
    std::vector<Rule> rules;

    bool has_role(const std::string& r) const;
    bool has_operation(const std::string& op) const;
    bool has_state(const std::string& s) const;

    bool operator==(const RuleSet&) const = default;
};

class ParseError : public DomainError {
public:
    ParseError(int line, int column, const std::string& message)
        : DomainError(ErrorCode::Parse, message), line_(line), column_(column) {}

    int line() const { return line_; }
    int column() const { return column_; }

private:
    int line_;
    int column_;
};

// Parses rule source text. Aborts at the first syntax error; undeclared role
// and state references are parse errors reported at the offending token.
RuleSet parse_rules(const std::string& source);

// Canonical source form; parse_rules(pretty_print(rs)) == rs.
std::string pretty_print(const RuleSet& rs);

struct Diagnostic {
    enum class Kind {
        UnreachableRule,
        UnknownOperation,
        ObligationWithoutDischargingRule,
        RightProhibitionConflictPossible,
    };
    Kind kind;
    std::string rule;  // empty when not tied to a rule
    std::string detail;
};

const char* diagnostic_kind_name(Diagnostic::Kind kind);

// Semantic lint over a parsed rule set; empty result means clean.
std::vector<Diagnostic> validate(const RuleSet& rs);

// Renders a duration with the largest unit that divides it exactly.
std::string format_duration(Duration ms);

}  // namespace pacta
