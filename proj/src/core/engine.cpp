#include "core/engine.hpp"

#include <algorithm>
#include <sstream>

#include "core/errors.hpp"

namespace pacta {

const char* event_status_name(EventStatus status) {
    return status == EventStatus::Success ? "success" : "failure";
}

namespace {

bool reserved_type(const std::string& type) { return type.rfind("__", 0) == 0; }

struct WorkingState {
    std::string state;
    std::map<std::string, RopSet> rops;
};

bool status_matches(StatusPattern pattern, EventStatus status) {
    switch (pattern) {
        case StatusPattern::Any: return true;
        case StatusPattern::Success: return status == EventStatus::Success;
        case StatusPattern::Failure: return status == EventStatus::Failure;
    }
    return false;
}

bool party_matches(const std::string& role_pattern,
                   const std::map<std::string, std::string>& bindings, const std::string& party) {
    if (role_pattern == "*") return true;
    auto it = bindings.find(role_pattern);
    return it != bindings.end() && it->second == party;
}

bool pattern_matches(const EventPattern& pattern,
                     const std::map<std::string, std::string>& bindings, const Event& event) {
    return pattern.type == event.type &&
           party_matches(pattern.originator, bindings, event.originator) &&
           party_matches(pattern.responder, bindings, event.responder) &&
           status_matches(pattern.status, event.status);
}

const RopSet& rop_of_role(const WorkingState& ws,
                          const std::map<std::string, std::string>& bindings,
                          const std::string& role) {
    return ws.rops.at(bindings.at(role));
}

bool eval_guard(const GuardPtr& guard, const WorkingState& ws,
                const std::map<std::string, std::string>& bindings, Timestamp now) {
    if (!guard) return true;
    switch (guard->kind) {
        case GuardExpr::Kind::Rights:
            return matches_rights(rop_of_role(ws, bindings, guard->role), guard->name, now);
        case GuardExpr::Kind::Pending:
            return has_pending_obligation(rop_of_role(ws, bindings, guard->role), guard->name);
        case GuardExpr::Kind::Prohibited:
            return is_prohibited(rop_of_role(ws, bindings, guard->role), guard->name);
        case GuardExpr::Kind::State:
            return ws.state == guard->name;
        case GuardExpr::Kind::Not:
            return !eval_guard(guard->lhs, ws, bindings, now);
        case GuardExpr::Kind::And:
            return eval_guard(guard->lhs, ws, bindings, now) &&
                   eval_guard(guard->rhs, ws, bindings, now);
        case GuardExpr::Kind::Or:
            return eval_guard(guard->lhs, ws, bindings, now) ||
                   eval_guard(guard->rhs, ws, bindings, now);
    }
    return false;
}

// Applies one rule action to the working state. Compliance actions only
// touch the verdict; `compliant` may be null for __init__ processing.
void apply_action(const Action& action, WorkingState& ws,
                  const std::map<std::string, std::string>& bindings, Timestamp now,
                  bool* compliant) {
    if (const auto* a = std::get_if<RemoveRightAction>(&action)) {
        remove_right(ws.rops.at(bindings.at(a->role)), a->op, bindings.at(a->counterparty));
    } else if (const auto* a = std::get_if<AddRightAction>(&action)) {
        Right right;
        right.holder = bindings.at(a->role);
        right.operations = a->ops;
        right.counterparty = bindings.at(a->counterparty);
        RopSet& rop = ws.rops.at(right.holder);
        add_right(rop, std::move(right));
    } else if (const auto* a = std::get_if<AddObligationAction>(&action)) {
        add_obligation(ws.rops.at(bindings.at(a->obligor)), a->name, a->ops,
                       bindings.at(a->counterparty), a->deadline_ms, now);
    } else if (const auto* a = std::get_if<AddProhibitionAction>(&action)) {
        add_prohibition(ws.rops.at(bindings.at(a->role)), Prohibition{bindings.at(a->role), a->ops});
    } else if (const auto* a = std::get_if<SetStateAction>(&action)) {
        ws.state = a->state;
    } else if (const auto* a = std::get_if<SetComplianceAction>(&action)) {
        if (compliant) *compliant = a->compliant;
    }
}

std::string render_bindings(const std::map<std::string, std::string>& bindings) {
    std::ostringstream out;
    bool first = true;
    for (const auto& [role, party] : bindings) {
        if (!first) out << ",";
        out << role << "=" << party;
        first = false;
    }
    return out.str();
}

}  // namespace

std::string InstanceManager::load_ruleset(RuleSet rs) {
    if (rs.contract_name.empty()) {
        fail(ErrorCode::InvalidArgument, "contract name must not be empty");
    }
    std::unique_lock lock(registry_mutex_);
    if (rulesets_.count(rs.contract_name)) {
        fail(ErrorCode::DuplicateContract,
             "contract '" + rs.contract_name + "' is already deployed");
    }
    std::string name = rs.contract_name;
    rulesets_.emplace(name, std::make_shared<const RuleSet>(std::move(rs)));
    return name;
}

bool InstanceManager::has_contract(const std::string& name) const {
    std::shared_lock lock(registry_mutex_);
    return rulesets_.count(name) > 0;
}

std::shared_ptr<const RuleSet> InstanceManager::ruleset(const std::string& name) const {
    std::shared_lock lock(registry_mutex_);
    auto it = rulesets_.find(name);
    return it == rulesets_.end() ? nullptr : it->second;
}

std::vector<std::string> InstanceManager::contract_names() const {
    std::shared_lock lock(registry_mutex_);
    std::vector<std::string> names;
    for (const auto& [name, rs] : rulesets_) names.push_back(name);
    return names;
}

std::string InstanceManager::create_instance(const std::string& contract,
                                             const std::map<std::string, std::string>& bindings,
                                             Timestamp now) {
    auto rules = ruleset(contract);
    if (!rules) fail(ErrorCode::UnknownContract, "contract '" + contract + "' is not deployed");

    for (const auto& role : rules->roles) {
        auto it = bindings.find(role);
        if (it == bindings.end() || it->second.empty()) {
            fail(ErrorCode::IncompleteBindings, "role '" + role + "' is not bound to a party");
        }
    }
    std::set<std::string> seen;
    for (const auto& [role, party] : bindings) {
        if (!rules->has_role(role)) {
            fail(ErrorCode::InvalidArgument, "binding names undeclared role '" + role + "'");
        }
        if (!seen.insert(party).second) {
            fail(ErrorCode::InvalidArgument, "party '" + party + "' bound to more than one role");
        }
    }

    auto inst = std::make_unique<Instance>();
    inst->rules = rules;
    inst->bindings = bindings;
    for (const auto& [role, party] : bindings) {
        inst->role_of_party[party] = role;
        inst->rops[party] = RopSet{party, {}, {}, {}};
    }
    inst->state = rules->initial_state;
    inst->clock = now;

    // Fire the __init__ rule, when declared, to grant initial rights.
    for (const auto& rule : rules->rules) {
        if (rule.pattern.type != kInitEventType) continue;
        WorkingState ws{inst->state, inst->rops};
        if (eval_guard(rule.guard, ws, inst->bindings, now)) {
            for (const auto& action : rule.on_match) {
                apply_action(action, ws, inst->bindings, now, nullptr);
            }
            inst->state = std::move(ws.state);
            inst->rops = std::move(ws.rops);
        }
        break;
    }

    std::string id;
    {
        std::unique_lock lock(registry_mutex_);
        id = "i-" + std::to_string(next_instance_++);
        inst->id = id;
        HistoryRecord rec;
        rec.seq = 1;
        rec.kind = HistoryRecord::Kind::Creation;
        rec.at = now;
        rec.note = contract;
        inst->history.push_back(std::move(rec));
        instances_.emplace(id, std::move(inst));
    }
    if (ledger_) {
        ledger_->append(EntryKind::Creation, now,
                        {{"instance", id, false},
                         {"contract", contract, false},
                         {"bindings", render_bindings(bindings), false}});
    }
    return id;
}

InstanceManager::Instance& InstanceManager::instance_ref(const std::string& id) const {
    std::shared_lock lock(registry_mutex_);
    auto it = instances_.find(id);
    if (it == instances_.end()) {
        fail(ErrorCode::UnknownInstance, "unknown instance '" + id + "'");
    }
    return *it->second;
}

void InstanceManager::append_event_entry(const Instance& inst, const Event& event) {
    if (!ledger_) return;
    std::vector<LedgerField> fields = {
        {"instance", inst.id, false},
        {"seq", std::to_string(event.sequence), false},
        {"type", event.type, false},
        {"originator", event.originator, false},
        {"responder", event.responder, false},
        {"status", event_status_name(event.status), false},
        {"at", std::to_string(event.timestamp), false},
    };
    if (!event.payload.empty()) fields.push_back({"payload", event.payload, false});
    for (const auto& [name, value] : event.personal) {
        fields.push_back({name, value, true});
    }
    std::string subject = event.subject.empty() ? event.originator : event.subject;
    ledger_->append(EntryKind::Event, event.timestamp, std::move(fields),
                    event.personal.empty() ? "" : subject);
}

void InstanceManager::append_verdict_entry(const Instance& inst, const Verdict& verdict,
                                           Timestamp at) {
    if (!ledger_) return;
    std::string violations;
    for (const auto& v : verdict.violations) {
        if (!violations.empty()) violations += ",";
        violations += v;
    }
    std::vector<LedgerField> fields = {
        {"instance", inst.id, false},
        {"event_seq", std::to_string(verdict.event_seq), false},
        {"compliant", verdict.compliant ? "true" : "false", false},
        {"rule", verdict.triggered_rule.value_or(""), false},
        {"state", verdict.resulting_state, false},
    };
    if (!violations.empty()) fields.push_back({"violations", violations, false});
    if (verdict.engine_error) fields.push_back({"engine_error", verdict.error_message, false});
    ledger_->append(EntryKind::Verdict, at, std::move(fields));
}

std::vector<ViolationRecord> InstanceManager::sweep_locked(Instance& inst, Timestamp now) {
    std::vector<ViolationRecord> records;
    for (auto& [party, rop] : inst.rops) {
        for (const auto& expired : expired_obligations(rop, now)) {
            ViolationRecord rec;
            rec.instance_id = inst.id;
            rec.obligation = expired.name;
            rec.obligor = expired.obligor;
            rec.counterparty = expired.counterparty;
            rec.due_at = expired.due_at();
            rec.detected_at = now;
            rec.seq = inst.history.size() + 1;

            HistoryRecord hist;
            hist.seq = rec.seq;
            hist.kind = HistoryRecord::Kind::Violation;
            hist.at = now;
            hist.violation = rec;
            inst.history.push_back(std::move(hist));

            if (ledger_) {
                ledger_->append(EntryKind::Violation, now,
                                {{"instance", inst.id, false},
                                 {"obligation", rec.obligation, false},
                                 {"obligor", rec.obligor, false},
                                 {"due_at", std::to_string(rec.due_at), false},
                                 {"detected_at", std::to_string(now), false}});
            }
            records.push_back(std::move(rec));
        }
    }

    // Let the contract react to expirations through __timeout__ rules.
    for (const auto& rec : records) {
        std::string timeout_type = kTimeoutEventPrefix + rec.obligation;
        bool handled = std::any_of(
            inst.rules->rules.begin(), inst.rules->rules.end(),
            [&](const Rule& rule) { return rule.pattern.type == timeout_type; });
        if (!handled) continue;
        Event timeout_event;
        timeout_event.instance_id = inst.id;
        timeout_event.type = timeout_type;
        timeout_event.originator = rec.obligor;
        timeout_event.responder = rec.counterparty;
        timeout_event.status = EventStatus::Failure;
        timeout_event.timestamp = now;
        process_locked(inst, std::move(timeout_event), true);
    }
    return records;
}

std::optional<Verdict> InstanceManager::process_locked(Instance& inst, Event event, bool internal) {
    event.sequence = inst.history.size() + 1;

    const Rule* matched = nullptr;
    for (const auto& rule : inst.rules->rules) {
        if (rule.pattern.type == kInitEventType) continue;
        if (pattern_matches(rule.pattern, inst.bindings, event)) {
            matched = &rule;
            break;
        }
    }
    if (!matched && internal) return std::nullopt;

    Verdict verdict;
    verdict.instance_id = inst.id;
    verdict.event_seq = event.sequence;
    verdict.resulting_state = inst.state;

    if (matched) {
        WorkingState ws{inst.state, inst.rops};
        bool guard_ok = eval_guard(matched->guard, ws, inst.bindings, event.timestamp);
        verdict.triggered_rule = matched->name;
        verdict.compliant = guard_ok;
        const auto& actions = guard_ok ? matched->on_match : matched->on_else;
        try {
            for (const auto& action : actions) {
                apply_action(action, ws, inst.bindings, event.timestamp, &verdict.compliant);
                verdict.applied_actions.push_back(action);
            }
            if (verdict.compliant) {
                auto rop_it = ws.rops.find(event.originator);
                if (rop_it != ws.rops.end()) {
                    fulfill_obligation(rop_it->second, event.type, event.timestamp);
                }
            }
            inst.state = std::move(ws.state);
            inst.rops = std::move(ws.rops);
            verdict.resulting_state = inst.state;
        } catch (const DomainError& e) {
            // All-or-nothing: leave the pre-event state untouched.
            verdict.engine_error = true;
            verdict.compliant = false;
            verdict.applied_actions.clear();
            verdict.error_message =
                std::string(error_code_name(e.code())) + ": " + e.what();
            verdict.resulting_state = inst.state;
        }
    }

    HistoryRecord rec;
    rec.seq = event.sequence;
    rec.kind = HistoryRecord::Kind::Event;
    rec.at = event.timestamp;
    rec.event = event;
    rec.verdict = verdict;
    inst.history.push_back(std::move(rec));

    append_event_entry(inst, event);
    append_verdict_entry(inst, verdict, event.timestamp);
    return verdict;
}

Verdict InstanceManager::submit_event(Event event) {
    if (event.type.empty()) fail(ErrorCode::InvalidArgument, "event type must not be empty");
    if (reserved_type(event.type)) {
        fail(ErrorCode::InvalidArgument, "event type '" + event.type + "' is reserved");
    }
    if (event.originator == event.responder) {
        fail(ErrorCode::InvalidArgument, "originator and responder must differ");
    }
    Instance& inst = instance_ref(event.instance_id);
    std::lock_guard lock(inst.mutex);
    if (inst.terminated) {
        fail(ErrorCode::TerminatedInstance, "instance '" + inst.id + "' is terminated");
    }
    if (event.timestamp < inst.clock) {
        fail(ErrorCode::ClockRegression, "event timestamp " + std::to_string(event.timestamp) +
                                             " precedes instance clock " +
                                             std::to_string(inst.clock));
    }
    if (!event.personal.empty() && ledger_) {
        std::string subject = event.subject.empty() ? event.originator : event.subject;
        if (ledger_->subject_erased(subject)) {
            fail(ErrorCode::SubjectKeyDestroyed,
                 "subject '" + subject + "' was erased; event carries personal data");
        }
    }

    Timestamp at = event.timestamp;
    auto violations = sweep_locked(inst, at);
    auto verdict = process_locked(inst, std::move(event), false);
    inst.clock = at;
    for (const auto& v : violations) {
        verdict->violations.push_back(v.obligation);
    }
    return *verdict;
}

std::vector<ViolationRecord> InstanceManager::advance_clock(const std::string& instance_id,
                                                            Timestamp now) {
    Instance& inst = instance_ref(instance_id);
    std::lock_guard lock(inst.mutex);
    if (inst.terminated) {
        fail(ErrorCode::TerminatedInstance, "instance '" + inst.id + "' is terminated");
    }
    if (now < inst.clock) {
        fail(ErrorCode::ClockRegression, "clock target " + std::to_string(now) +
                                             " precedes instance clock " +
                                             std::to_string(inst.clock));
    }
    auto violations = sweep_locked(inst, now);
    inst.clock = now;
    return violations;
}

Snapshot InstanceManager::snapshot_locked(const Instance& inst) const {
    Snapshot snap;
    snap.instance_id = inst.id;
    snap.contract = inst.rules->contract_name;
    snap.state = inst.state;
    snap.bindings = inst.bindings;
    snap.rops = inst.rops;
    snap.clock = inst.clock;
    snap.terminated = inst.terminated;
    snap.history_len = inst.history.size();
    for (const auto& [party, rop] : inst.rops) {
        for (const auto& o : rop.obligations) {
            if (o.status != ObligationStatus::Pending) continue;
            PendingObligationView view;
            view.name = o.name;
            view.obligor = o.obligor;
            view.counterparty = o.counterparty;
            view.alternatives = o.alternatives;
            view.due_at = o.due_at();
            view.remaining_ms = o.due_at() - inst.clock;
            snap.pending.push_back(std::move(view));
        }
    }
    return snap;
}

Snapshot InstanceManager::query_state(const std::string& instance_id) const {
    const Instance& inst = instance_ref(instance_id);
    std::lock_guard lock(inst.mutex);
    return snapshot_locked(inst);
}

Snapshot InstanceManager::terminate_instance(const std::string& instance_id, Timestamp now,
                                             const std::string& reason) {
    Instance& inst = instance_ref(instance_id);
    std::lock_guard lock(inst.mutex);
    if (inst.terminated) {
        fail(ErrorCode::AlreadyTerminated, "instance '" + inst.id + "' is already terminated");
    }
    if (now < inst.clock) {
        fail(ErrorCode::ClockRegression, "termination time precedes instance clock");
    }
    inst.terminated = true;
    inst.clock = now;
    HistoryRecord rec;
    rec.seq = inst.history.size() + 1;
    rec.kind = HistoryRecord::Kind::Termination;
    rec.at = now;
    rec.note = reason;
    inst.history.push_back(std::move(rec));
    if (ledger_) {
        ledger_->append(EntryKind::Termination, now,
                        {{"instance", inst.id, false}, {"reason", reason, false}});
    }
    return snapshot_locked(inst);
}

std::vector<HistoryRecord> InstanceManager::history_since(const std::string& instance_id,
                                                          std::uint64_t since) const {
    const Instance& inst = instance_ref(instance_id);
    std::lock_guard lock(inst.mutex);
    std::vector<HistoryRecord> out;
    for (const auto& rec : inst.history) {
        if (rec.seq > since) out.push_back(rec);
    }
    return out;
}

std::vector<std::string> InstanceManager::instance_ids() const {
    std::shared_lock lock(registry_mutex_);
    std::vector<std::string> ids;
    for (const auto& [id, inst] : instances_) ids.push_back(id);
    return ids;
}

}  // namespace pacta
