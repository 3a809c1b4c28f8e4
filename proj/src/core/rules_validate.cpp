#include <functional>
#include <map>
#include <set>

#include "core/rules.hpp"

namespace pacta {

const char* diagnostic_kind_name(Diagnostic::Kind kind) {
    switch (kind) {
        case Diagnostic::Kind::UnreachableRule: return "unreachable-rule";
        case Diagnostic::Kind::UnknownOperation: return "unknown-operation";
        case Diagnostic::Kind::ObligationWithoutDischargingRule:
            return "obligation-without-discharging-rule";
        case Diagnostic::Kind::RightProhibitionConflictPossible:
            return "right-prohibition-conflict-possible";
    }
    return "unknown";
}

namespace {

bool reserved_event_type(const std::string& type) {
    return type == kInitEventType || type.rfind(kTimeoutEventPrefix, 0) == 0;
}

void collect_guard_ops(const GuardPtr& g, std::vector<std::string>& ops) {
    if (!g) return;
    if (g->kind == GuardExpr::Kind::Rights || g->kind == GuardExpr::Kind::Prohibited) {
        ops.push_back(g->name);
    }
    collect_guard_ops(g->lhs, ops);
    collect_guard_ops(g->rhs, ops);
}

}  // namespace

std::vector<Diagnostic> validate(const RuleSet& rs) {
    std::vector<Diagnostic> out;
    auto report = [&](Diagnostic::Kind kind, const std::string& rule, std::string detail) {
        out.push_back(Diagnostic{kind, rule, std::move(detail)});
    };

    // Unknown operation references: pattern types and every operation named
    // in guards and actions must be declared. Reserved __init__ /
    // __timeout__:* pattern types are exempt.
    for (const auto& rule : rs.rules) {
        if (!reserved_event_type(rule.pattern.type) && !rs.has_operation(rule.pattern.type)) {
            report(Diagnostic::Kind::UnknownOperation, rule.name,
                   "pattern type '" + rule.pattern.type + "' is not a declared operation");
        }
        std::vector<std::string> referenced;
        collect_guard_ops(rule.guard, referenced);
        auto scan_actions = [&](const std::vector<Action>& actions) {
            for (const auto& action : actions) {
                if (const auto* a = std::get_if<RemoveRightAction>(&action)) {
                    referenced.push_back(a->op);
                } else if (const auto* a = std::get_if<AddRightAction>(&action)) {
                    referenced.insert(referenced.end(), a->ops.begin(), a->ops.end());
                } else if (const auto* a = std::get_if<AddObligationAction>(&action)) {
                    referenced.insert(referenced.end(), a->ops.begin(), a->ops.end());
                } else if (const auto* a = std::get_if<AddProhibitionAction>(&action)) {
                    referenced.insert(referenced.end(), a->ops.begin(), a->ops.end());
                }
            }
        };
        scan_actions(rule.on_match);
        scan_actions(rule.on_else);
        for (const auto& op : referenced) {
            if (!rs.has_operation(op)) {
                report(Diagnostic::Kind::UnknownOperation, rule.name,
                       "operation '" + op + "' is not declared");
            }
        }
    }

    // A rule is unreachable when an earlier rule has an identical pattern and
    // an equal guard: first-match evaluation will never reach it.
    for (std::size_t j = 1; j < rs.rules.size(); ++j) {
        for (std::size_t i = 0; i < j; ++i) {
            if (rs.rules[i].pattern == rs.rules[j].pattern &&
                guard_equal(rs.rules[i].guard, rs.rules[j].guard)) {
                report(Diagnostic::Kind::UnreachableRule, rs.rules[j].name,
                       "shadowed by earlier rule \"" + rs.rules[i].name + "\"");
                break;
            }
        }
    }

    // Every obligation must be dischargeable: some rule must react to at
    // least one of its alternative operations.
    auto has_rule_for_type = [&](const std::string& type) {
        for (const auto& rule : rs.rules) {
            if (rule.pattern.type == type) return true;
        }
        return false;
    };
    for (const auto& rule : rs.rules) {
        auto scan = [&](const std::vector<Action>& actions) {
            for (const auto& action : actions) {
                const auto* a = std::get_if<AddObligationAction>(&action);
                if (!a) continue;
                bool dischargeable = false;
                for (const auto& op : a->ops) {
                    if (has_rule_for_type(op)) {
                        dischargeable = true;
                        break;
                    }
                }
                if (!dischargeable) {
                    report(Diagnostic::Kind::ObligationWithoutDischargingRule, rule.name,
                           "no rule reacts to any alternative of obligation \"" + a->name + "\"");
                }
            }
        };
        scan(rule.on_match);
        scan(rule.on_else);
    }

    // Over-approximate right/prohibition conflicts: an operation that some
    // rule grants as a right and some rule prohibits for the same role could
    // collide at runtime depending on event ordering.
    std::map<std::string, std::set<std::string>> granted, prohibited;
    for (const auto& rule : rs.rules) {
        auto scan = [&](const std::vector<Action>& actions) {
            for (const auto& action : actions) {
                if (const auto* a = std::get_if<AddRightAction>(&action)) {
                    granted[a->role].insert(a->ops.begin(), a->ops.end());
                } else if (const auto* a = std::get_if<AddProhibitionAction>(&action)) {
                    prohibited[a->role].insert(a->ops.begin(), a->ops.end());
                }
            }
        };
        scan(rule.on_match);
        scan(rule.on_else);
    }
    for (const auto& [role, ops] : granted) {
        auto it = prohibited.find(role);
        if (it == prohibited.end()) continue;
        for (const auto& op : ops) {
            if (it->second.count(op)) {
                report(Diagnostic::Kind::RightProhibitionConflictPossible, "",
                       "operation '" + op + "' is both granted and prohibited for role '" + role +
                           "' in some rule");
            }
        }
    }

    return out;
}

}  // namespace pacta
