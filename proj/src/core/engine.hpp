#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "core/ledger.hpp"
#include "core/rop.hpp"
#include "core/rules.hpp"

namespace pacta {

enum class EventStatus { Success, Failure };

const char* event_status_name(EventStatus status);

// A contractual operation reported by a party. `originator` executed the
// operation towards `responder`; both are party ids, mapped to roles through
// the instance bindings when patterns are matched.
struct Event {
    std::string instance_id;
    std::string type;
    std::string originator;
    std::string responder;
    EventStatus status = EventStatus::Success;
    Timestamp timestamp = 0;
    std::string payload;                          // opaque, optional
    std::map<std::string, std::string> personal;  // label -> plaintext, optional
    std::string subject;   // data subject for personal fields; defaults to originator
    std::uint64_t sequence = 0;  // history sequence, assigned by the engine

    bool operator==(const Event&) const = default;
};

struct Verdict {
    std::string instance_id;
    std::uint64_t event_seq = 0;
    bool compliant = false;
    std::optional<std::string> triggered_rule;
    std::vector<Action> applied_actions;
    std::string resulting_state;
    std::vector<std::string> violations;  // obligations newly violated at this timestamp
    bool engine_error = false;
    std::string error_message;
};

struct ViolationRecord {
    std::string instance_id;
    std::string obligation;
    std::string obligor;
    std::string counterparty;
    Timestamp due_at = 0;
    Timestamp detected_at = 0;
    std::uint64_t seq = 0;  // history sequence
};

struct HistoryRecord {
    enum class Kind { Creation, Event, Violation, Termination };

    std::uint64_t seq = 0;
    Kind kind = Kind::Event;
    Timestamp at = 0;
    std::optional<Event> event;
    std::optional<Verdict> verdict;
    std::optional<ViolationRecord> violation;
    std::string note;
};

struct PendingObligationView {
    std::string name;
    std::string obligor;
    std::string counterparty;
    std::set<std::string> alternatives;
    Timestamp due_at = 0;
    Duration remaining_ms = 0;  // relative to the instance clock
};

struct Snapshot {
    std::string instance_id;
    std::string contract;
    std::string state;
    std::map<std::string, std::string> bindings;  // role -> party id
    std::map<std::string, RopSet> rops;           // party id -> deontic state
    std::vector<PendingObligationView> pending;
    Timestamp clock = 0;
    bool terminated = false;
    std::uint64_t history_len = 0;

    bool operator==(const Snapshot&) const = default;
};

// Executes rule sets over per-instance event streams. Rules are scanned in
// declaration order and the first pattern match wins; a matched rule's guard
// selects the then- or else-branch. All mutations of one event are atomic.
//
// Instances are independent: events for one instance are serialized on its
// own mutex while other instances progress in parallel.
class InstanceManager {
public:
    explicit InstanceManager(Ledger* ledger) : ledger_(ledger) {}

    // Registers a parsed rule set under its contract name. Throws
    // DuplicateContract when the name is taken (rule sets are immutable once
    // deployed).
    std::string load_ruleset(RuleSet rs);

    bool has_contract(const std::string& name) const;
    std::shared_ptr<const RuleSet> ruleset(const std::string& name) const;
    std::vector<std::string> contract_names() const;

    // Creates an instance with the given role bindings, fires the contract's
    // __init__ rule (when present) to grant initial rights, and records the
    // creation. Bindings must cover every declared role with distinct ids.
    std::string create_instance(const std::string& contract,
                                const std::map<std::string, std::string>& bindings, Timestamp now);

    Verdict submit_event(Event event);

    std::vector<ViolationRecord> advance_clock(const std::string& instance_id, Timestamp now);

    Snapshot query_state(const std::string& instance_id) const;

    Snapshot terminate_instance(const std::string& instance_id, Timestamp now,
                                const std::string& reason);

    // History records with seq > since, in order. Used by the verdict
    // polling endpoint.
    std::vector<HistoryRecord> history_since(const std::string& instance_id,
                                             std::uint64_t since) const;

    std::vector<std::string> instance_ids() const;

    Ledger& ledger() { return *ledger_; }

private:
    struct Instance {
        std::string id;
        std::shared_ptr<const RuleSet> rules;
        std::map<std::string, std::string> bindings;       // role -> party
        std::map<std::string, std::string> role_of_party;  // party -> role
        std::string state;
        std::map<std::string, RopSet> rops;  // party id -> rop
        std::vector<HistoryRecord> history;
        Timestamp clock = 0;
        bool terminated = false;
        mutable std::mutex mutex;
    };

    Instance& instance_ref(const std::string& id) const;
    Snapshot snapshot_locked(const Instance& inst) const;

    // Marks obligations expired at `now`, records the violations, and runs
    // any __timeout__ rules the contract defines. Returns the records.
    std::vector<ViolationRecord> sweep_locked(Instance& inst, Timestamp now);

    // First-match rule evaluation over a working copy of the deontic state;
    // commits on success, rolls back on action failure. When `internal` is
    // set the event came from the engine itself (timeout notifications) and
    // is dropped without trace if no pattern matches.
    std::optional<Verdict> process_locked(Instance& inst, Event event, bool internal);

    void append_event_entry(const Instance& inst, const Event& event);
    void append_verdict_entry(const Instance& inst, const Verdict& verdict, Timestamp at);

    mutable std::shared_mutex registry_mutex_;
    std::map<std::string, std::shared_ptr<const RuleSet>> rulesets_;
    std::map<std::string, std::unique_ptr<Instance>> instances_;
    std::uint64_t next_instance_ = 1;
    Ledger* ledger_;
};

}  // namespace pacta
