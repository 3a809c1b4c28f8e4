#include "core/rop.hpp"

#include <algorithm>

#include "core/errors.hpp"

namespace pacta {

const char* obligation_status_name(ObligationStatus status) {
    switch (status) {
        case ObligationStatus::Pending: return "pending";
        case ObligationStatus::Fulfilled: return "fulfilled";
        case ObligationStatus::Violated: return "violated";
    }
    return "unknown";
}

namespace {

bool right_active(const Right& right, std::optional<Timestamp> now) {
    if (!right.expiry || !now) return true;
    return *now <= *right.expiry;
}

}  // namespace

bool matches_rights(const RopSet& rop, const std::string& op, std::optional<Timestamp> now) {
    return std::any_of(rop.rights.begin(), rop.rights.end(), [&](const Right& r) {
        return right_active(r, now) && r.operations.count(op) > 0;
    });
}

bool is_prohibited(const RopSet& rop, const std::string& op) {
    return std::any_of(rop.prohibitions.begin(), rop.prohibitions.end(),
                       [&](const Prohibition& p) { return p.operations.count(op) > 0; });
}

bool has_pending_obligation(const RopSet& rop, const std::string& name) {
    return std::any_of(rop.obligations.begin(), rop.obligations.end(), [&](const Obligation& o) {
        return o.status == ObligationStatus::Pending && o.name == name;
    });
}

void remove_right(RopSet& rop, const std::string& op, const std::string& counterparty) {
    bool matched = false;
    for (auto it = rop.rights.begin(); it != rop.rights.end();) {
        if (it->counterparty == counterparty && it->operations.erase(op) > 0) {
            matched = true;
            if (it->operations.empty()) {
                it = rop.rights.erase(it);
                continue;
            }
        }
        ++it;
    }
    if (!matched) {
        fail(ErrorCode::NoSuchRight,
             "no right over '" + op + "' towards '" + counterparty + "' held by '" + rop.party + "'");
    }
}

void add_right(RopSet& rop, Right right) {
    if (right.operations.empty()) {
        fail(ErrorCode::InvalidArgument, "right must cover at least one operation");
    }
    if (right.holder == right.counterparty) {
        fail(ErrorCode::InvalidArgument, "right holder and counterparty must differ");
    }
    for (const auto& op : right.operations) {
        if (is_prohibited(rop, op)) {
            fail(ErrorCode::ConflictingDeonticState,
                 "operation '" + op + "' is prohibited for '" + rop.party + "'");
        }
    }
    if (std::find(rop.rights.begin(), rop.rights.end(), right) != rop.rights.end()) {
        return;  // set semantics
    }
    rop.rights.push_back(std::move(right));
}

void add_prohibition(RopSet& rop, Prohibition prohibition) {
    if (prohibition.operations.empty()) {
        fail(ErrorCode::InvalidArgument, "prohibition must cover at least one operation");
    }
    for (const auto& op : prohibition.operations) {
        if (matches_rights(rop, op)) {
            fail(ErrorCode::ConflictingDeonticState,
                 "operation '" + op + "' is covered by an active right of '" + rop.party + "'");
        }
    }
    if (std::find(rop.prohibitions.begin(), rop.prohibitions.end(), prohibition) !=
        rop.prohibitions.end()) {
        return;
    }
    rop.prohibitions.push_back(std::move(prohibition));
}

void add_obligation(RopSet& rop, const std::string& name, std::set<std::string> alternatives,
                    const std::string& counterparty, Duration deadline_ms, Timestamp now) {
    if (alternatives.empty()) {
        fail(ErrorCode::InvalidArgument, "obligation '" + name + "' has no alternatives");
    }
    if (deadline_ms <= 0) {
        fail(ErrorCode::InvalidArgument, "obligation '" + name + "' deadline must be positive");
    }
    if (has_pending_obligation(rop, name)) {
        fail(ErrorCode::DuplicateObligation,
             "pending obligation '" + name + "' already exists for '" + rop.party + "'");
    }
    Obligation o;
    o.name = name;
    o.obligor = rop.party;
    o.alternatives = std::move(alternatives);
    o.counterparty = counterparty;
    o.deadline_ms = deadline_ms;
    o.created_at = now;
    o.status = ObligationStatus::Pending;
    rop.obligations.push_back(std::move(o));
}

std::vector<std::string> fulfill_obligation(RopSet& rop, const std::string& op, Timestamp now) {
    std::vector<std::string> discharged;
    for (auto& o : rop.obligations) {
        if (o.status != ObligationStatus::Pending) continue;
        if (o.alternatives.count(op) == 0) continue;
        if (o.due_at() < now) continue;  // too late; the sweep will flag it
        o.status = ObligationStatus::Fulfilled;
        discharged.push_back(o.name);
    }
    return discharged;
}

std::vector<Obligation> expired_obligations(RopSet& rop, Timestamp now) {
    std::vector<Obligation> expired;
    for (auto& o : rop.obligations) {
        if (o.status != ObligationStatus::Pending) continue;
        if (o.due_at() >= now) continue;  // deadline boundary is inclusive
        o.status = ObligationStatus::Violated;
        expired.push_back(o);
    }
    return expired;
}

}  // namespace pacta
