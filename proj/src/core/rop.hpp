#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace pacta {

// Logical time. Timestamps and durations are milliseconds; no wall-clock
// binding anywhere in the core.
using Timestamp = std::int64_t;
using Duration = std::int64_t;

struct Party {
    std::string id;
    std::string role;
};

struct BusinessOperation {
    std::string name;
    std::string payload_schema_id;  // optional label, empty when unset
};

struct Right {
    std::string holder;                 // party id
    std::set<std::string> operations;   // non-empty
    std::string counterparty;           // party id, != holder
    std::optional<Timestamp> expiry;    // valid through expiry, inclusive

    bool operator==(const Right&) const = default;
};

enum class ObligationStatus { Pending, Fulfilled, Violated };

const char* obligation_status_name(ObligationStatus status);

// An obligation is discharged by executing ANY one of its alternatives on or
// before created_at + deadline_ms. Terminal statuses are never revisited.
struct Obligation {
    std::string name;
    std::string obligor;                 // party id owing the obligation
    std::set<std::string> alternatives;  // non-empty
    std::string counterparty;            // party id
    Duration deadline_ms = 0;            // > 0
    Timestamp created_at = 0;
    ObligationStatus status = ObligationStatus::Pending;

    Timestamp due_at() const { return created_at + deadline_ms; }

    bool operator==(const Obligation&) const = default;
};

struct Prohibition {
    std::string party;
    std::set<std::string> operations;  // non-empty

    bool operator==(const Prohibition&) const = default;
};

// The deontic state of one contracting party. Violated and fulfilled
// obligations are retained for audit; only pending ones constrain behaviour.
struct RopSet {
    std::string party;
    std::vector<Right> rights;
    std::vector<Obligation> obligations;
    std::vector<Prohibition> prohibitions;

    bool operator==(const RopSet&) const = default;
};

// True iff some unexpired right in `rop` covers `op`. Rights without an
// expiry never expire; when `now` is not supplied expiries are ignored.
bool matches_rights(const RopSet& rop, const std::string& op,
                    std::optional<Timestamp> now = std::nullopt);

bool is_prohibited(const RopSet& rop, const std::string& op);

bool has_pending_obligation(const RopSet& rop, const std::string& name);

// Removes `op` from every right whose counterparty matches; rights whose
// operation set empties are dropped. Throws NoSuchRight when nothing matched.
void remove_right(RopSet& rop, const std::string& op, const std::string& counterparty);

// Set-semantics insert; re-adding an identical right is a no-op. Throws
// ConflictingDeonticState when any operation of the right is actively
// prohibited for the holder.
void add_right(RopSet& rop, Right right);

// Throws ConflictingDeonticState when any operation of the prohibition is
// covered by an active right of the same party.
void add_prohibition(RopSet& rop, Prohibition prohibition);

// Appends a pending obligation with created_at = now. Throws
// DuplicateObligation when a pending obligation with the same name already
// exists for this party, InvalidArgument on empty alternatives or a
// non-positive deadline.
void add_obligation(RopSet& rop, const std::string& name,
                    std::set<std::string> alternatives, const std::string& counterparty,
                    Duration deadline_ms, Timestamp now);

// Marks fulfilled every pending obligation whose alternatives contain `op`
// and whose deadline has not passed (due_at >= now, boundary inclusive).
// Returns the names of the discharged obligations; empty when none matched.
std::vector<std::string> fulfill_obligation(RopSet& rop, const std::string& op, Timestamp now);

// Marks violated every pending obligation with due_at < now and returns
// copies of them (with status already set to Violated).
std::vector<Obligation> expired_obligations(RopSet& rop, Timestamp now);

}  // namespace pacta
