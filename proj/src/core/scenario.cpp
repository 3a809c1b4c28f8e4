#include "core/scenario.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string_view>

#include "core/ledger.hpp"
#include "core/rules.hpp"

namespace pacta {

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::InvalidArgument, "cannot read file " + path);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

Timestamp median_of(std::vector<Timestamp> values) {
    if (values.empty()) return 0;
    std::sort(values.begin(), values.end());
    std::size_t n = values.size();
    if (n % 2 == 1) return values[n / 2];
    return (values[n / 2 - 1] + values[n / 2]) / 2;
}

Timestamp p95_of(std::vector<Timestamp> values) {
    if (values.empty()) return 0;
    std::sort(values.begin(), values.end());
    std::size_t rank = (values.size() * 95 + 99) / 100;  // ceil(0.95 n)
    return values[rank - 1];
}

std::map<std::string, std::string> effective_bindings(
    const RuleSet& rules, const Trace& trace,
    const std::map<std::string, std::string>& overrides) {
    std::map<std::string, std::string> bindings = trace.bindings;
    for (const auto& [role, party] : overrides) bindings[role] = party;
    for (const auto& role : rules.roles) {
        if (!bindings.count(role)) bindings[role] = role;  // self-binding default
    }
    return bindings;
}

std::string erasure_subject_of(const Event& event) {
    return event.subject.empty() ? event.responder : event.subject;
}

// TTP deployment: the engine processes events directly; verdict transport
// latency is zero simulated milliseconds by construction.
wire::Json run_ttp_target(const RuleSet& rules, const Trace& trace,
                          const std::map<std::string, std::string>& overrides) {
    auto ledger = Ledger::in_memory();
    InstanceManager mgr(ledger.get());
    RuleSet copy = rules;
    mgr.load_ruleset(std::move(copy));

    auto bindings = effective_bindings(rules, trace, overrides);
    Timestamp start = trace.items.empty() ? 0 : trace.items.front().at;
    std::string instance = mgr.create_instance(rules.contract_name, bindings, start);

    std::uint64_t events = 0, compliant = 0, errors = 0;
    std::vector<Timestamp> latencies;
    std::vector<std::string> violations;
    wire::Json erasures = wire::Json::array();
    std::vector<std::string> erased_plaintexts;
    std::set<std::string> erased_subjects;

    for (const auto& item : trace.items) {
        if (item.kind == TraceItem::Kind::ClockAdvance) {
            for (const auto& v : mgr.advance_clock(instance, item.at)) {
                violations.push_back(v.obligation);
            }
            continue;
        }
        Event event = item.event;
        event.instance_id = instance;
        event.timestamp = item.at;
        ++events;
        try {
            Verdict verdict = mgr.submit_event(event);
            latencies.push_back(0);
            if (verdict.compliant) ++compliant;
            for (const auto& v : verdict.violations) violations.push_back(v);
            if (verdict.compliant && event.type == "deletePersonalData") {
                std::string subject = erasure_subject_of(event);
                if (mgr.ledger().subject_known(subject) &&
                    !mgr.ledger().subject_erased(subject)) {
                    auto receipt = mgr.ledger().erase_subject(subject, event.timestamp);
                    erasures.push_back(wire::erasure_receipt_to_json(receipt));
                    erased_subjects.insert(subject);
                }
            }
        } catch (const DomainError&) {
            ++errors;
        }
    }

    // No plaintext of an erased subject may survive anywhere in the ledger.
    for (const auto& item : trace.items) {
        if (item.kind != TraceItem::Kind::Event) continue;
        if (!erased_subjects.count(erasure_subject_of(item.event)) &&
            !erased_subjects.count(item.event.originator)) {
            continue;
        }
        for (const auto& [name, value] : item.event.personal) {
            if (!value.empty()) erased_plaintexts.push_back(value);
        }
    }
    auto bytes = mgr.ledger().raw_bytes();
    std::string_view image(reinterpret_cast<const char*>(bytes.data()), bytes.size());
    std::uint64_t leaks = 0;
    for (const auto& plain : erased_plaintexts) {
        if (image.find(plain) != std::string_view::npos) ++leaks;
    }

    auto verify = mgr.ledger().verify();
    Snapshot snap = mgr.query_state(instance);

    wire::Json out;
    out["completed"] = true;
    out["deployment"] = "ttp";
    out["events"] = events;
    out["compliant_events"] = compliant;
    out["engine_errors"] = errors;
    out["median_latency_ms"] = median_of(latencies);
    out["p95_latency_ms"] = p95_of(latencies);
    out["violations"] = violations;
    out["final_state"] = snap.state;
    if (erasures.empty()) {
        out["erasure_supported"] = nullptr;  // not exercised by this trace
    } else {
        out["erasure_supported"] = true;
        out["erasures"] = erasures;
    }
    out["ledger"] = wire::Json{{"ok", verify.ok},
                               {"entries", verify.entries},
                               {"personal_plaintext_leaks", leaks}};
    return out;
}

// On-chain deployment: every event becomes a transaction from its
// originator's account; blocks are produced on the configured interval.
wire::Json run_chain_target(const Trace& trace, SimConfig config) {
    ChainSim sim(std::move(config));
    struct TrackedTx {
        std::string type;
        std::uint64_t id = 0;
        bool rejected = false;
        std::string error;
    };
    std::vector<TrackedTx> tracked;
    bool saw_erasure_event = false;

    for (const auto& item : trace.items) {
        if (item.kind != TraceItem::Kind::Event) continue;
        while (sim.now() < item.at) {
            sim.produce_block();
            sim.maybe_reorg();
        }
        if (item.event.type == "deletePersonalData") saw_erasure_event = true;
        TrackedTx t;
        t.type = item.event.type;
        try {
            t.id = sim.submit_event_tx(item.event.originator, item.event.type);
        } catch (const DomainError& e) {
            t.rejected = true;
            t.error = e.what();
        }
        tracked.push_back(std::move(t));
    }

    // Drain until every submitted tx settles (bounded; reorgs can delay).
    const std::uint64_t drain_limit =
        sim.height() + 200000 + 50ull * static_cast<std::uint64_t>(sim.config().finality_depth);
    auto unsettled = [&]() {
        for (const auto& t : tracked) {
            if (t.rejected) continue;
            TxStatus s = sim.tx(t.id).status;
            if (s == TxStatus::Pending || s == TxStatus::Included) return true;
        }
        return false;
    };
    while (unsettled() && sim.height() < drain_limit) {
        sim.produce_block();
        sim.maybe_reorg();
    }

    std::vector<Timestamp> latencies;
    Gas total_gas = 0;
    std::uint64_t rejected = 0;
    wire::Json per_event = wire::Json::array();
    for (const auto& t : tracked) {
        wire::Json rec;
        rec["type"] = t.type;
        if (t.rejected) {
            ++rejected;
            rec["status"] = "rejected";
            rec["error"] = t.error;
            per_event.push_back(rec);
            continue;
        }
        const SimTx& tx = sim.tx(t.id);
        rec["status"] = tx_status_name(tx.status);
        rec["submitted_at"] = tx.submitted_at;
        rec["included_at"] = tx.included_at;
        rec["finalized_at"] = tx.finalized_at;
        rec["gas"] = tx.gas_used;
        if (tx.status == TxStatus::Final) {
            latencies.push_back(tx.finalized_at - tx.submitted_at);
            total_gas += tx.gas_used;
        }
        per_event.push_back(rec);
    }

    wire::Json out;
    out["completed"] = true;
    out["deployment"] = "chain";
    out["events"] = tracked.size();
    out["median_finality_latency_ms"] = median_of(latencies);
    out["p95_finality_latency_ms"] = p95_of(latencies);
    out["total_gas"] = total_gas;
    out["rejected"] = rejected;
    out["reverted_then_remined"] = sim.reverted_then_remined();
    out["final_reverts"] = sim.final_reverts();
    out["blocks"] = sim.height();
    out["orphaned_blocks"] = sim.orphaned_blocks();
    out["erasure_supported"] = saw_erasure_event ? wire::Json(false) : wire::Json(nullptr);
    out["per_event"] = per_event;
    return out;
}

}  // namespace

SimConfig sim_config_from_json(const wire::Json& j) {
    SimConfig config;
    try {
        config.block_interval_ms = j.value("block_interval_ms", config.block_interval_ms);
        config.block_gas_limit = j.value("block_gas_limit", config.block_gas_limit);
        config.base_tx_cost = j.value("base_tx_cost", config.base_tx_cost);
        config.default_action_gas = j.value("default_action_gas", config.default_action_gas);
        config.per_iteration_gas = j.value("per_iteration_gas", config.per_iteration_gas);
        config.reorg_probability = j.value("reorg_probability", config.reorg_probability);
        config.max_reorg_depth = j.value("max_reorg_depth", config.max_reorg_depth);
        config.finality_depth = j.value("finality_depth", config.finality_depth);
        config.seed = j.value("seed", config.seed);
        config.drop_on_reorg = j.value("drop_on_reorg", config.drop_on_reorg);
        if (j.contains("per_action_gas")) {
            for (const auto& [op, gas] : j.at("per_action_gas").items()) {
                config.per_action_gas[op] = gas.get<Gas>();
            }
        }
    } catch (const wire::Json::exception& e) {
        fail(ErrorCode::InvalidArgument, std::string("bad sim config: ") + e.what());
    }
    return config;
}

Scenario load_scenario(const std::string& path) {
    namespace fs = std::filesystem;
    wire::Json j;
    try {
        j = wire::Json::parse(read_file(path));
    } catch (const wire::Json::exception& e) {
        fail(ErrorCode::Parse, "scenario " + path + ": " + e.what());
    }
    Scenario scenario;
    fs::path base = fs::path(path).parent_path();
    try {
        scenario.name = j.value("name", fs::path(path).stem().string());
        scenario.contract_path = (base / j.at("contract").get<std::string>()).string();
        scenario.trace_path = (base / j.at("trace").get<std::string>()).string();
        if (j.contains("bindings")) {
            for (const auto& [role, party] : j.at("bindings").items()) {
                scenario.bindings[role] = party.get<std::string>();
            }
        }
        scenario.targets = j.value("targets", std::vector<std::string>{"ttp", "chain"});
        if (j.contains("sim")) scenario.sim = sim_config_from_json(j.at("sim"));
    } catch (const wire::Json::exception& e) {
        fail(ErrorCode::InvalidArgument, "scenario " + path + ": " + e.what());
    }
    for (const auto& target : scenario.targets) {
        if (target != "ttp" && target != "chain") {
            fail(ErrorCode::InvalidArgument, "unknown deployment target '" + target + "'");
        }
    }
    return scenario;
}

ReplayResult replay_trace(InstanceManager& mgr, const std::string& contract, const Trace& trace,
                          const std::map<std::string, std::string>& binding_overrides) {
    auto rules = mgr.ruleset(contract);
    if (!rules) fail(ErrorCode::UnknownContract, "contract '" + contract + "' is not deployed");
    auto bindings = effective_bindings(*rules, trace, binding_overrides);
    Timestamp start = trace.items.empty() ? 0 : trace.items.front().at;

    ReplayResult result;
    result.instance_id = mgr.create_instance(contract, bindings, start);
    for (const auto& item : trace.items) {
        if (item.kind == TraceItem::Kind::ClockAdvance) {
            wire::Json line;
            line["at"] = item.at;
            line["clock"] = true;
            line["violations"] = wire::Json::array();
            try {
                for (const auto& v : mgr.advance_clock(result.instance_id, item.at)) {
                    line["violations"].push_back(wire::violation_to_json(v));
                }
            } catch (const DomainError& e) {
                line["error"] = e.what();
            }
            result.lines.push_back(std::move(line));
            continue;
        }
        Event event = item.event;
        event.instance_id = result.instance_id;
        event.timestamp = item.at;
        wire::Json line;
        line["at"] = item.at;
        line["type"] = event.type;
        try {
            Verdict verdict = mgr.submit_event(std::move(event));
            line["verdict"] = wire::verdict_to_json(verdict);
        } catch (const DomainError& e) {
            line["error"] = e.what();
        }
        result.lines.push_back(std::move(line));
    }
    result.snapshot = mgr.query_state(result.instance_id);
    return result;
}

wire::Json run_scenario(const Scenario& scenario, std::optional<std::uint64_t> seed_override) {
    RuleSet rules = parse_rules(read_file(scenario.contract_path));
    Trace trace = parse_trace(read_file(scenario.trace_path));
    SimConfig sim = scenario.sim;
    if (seed_override) sim.seed = *seed_override;

    wire::Json report;
    report["scenario"] = scenario.name;
    report["contract"] = rules.contract_name;
    report["seed"] = sim.seed;
    std::uint64_t events = 0;
    for (const auto& item : trace.items) {
        if (item.kind == TraceItem::Kind::Event) ++events;
    }
    report["trace_events"] = events;
    report["targets"] = wire::Json::object();

    for (const auto& target : scenario.targets) {
        try {
            if (target == "ttp") {
                report["targets"]["ttp"] = run_ttp_target(rules, trace, scenario.bindings);
            } else {
                report["targets"]["chain"] = run_chain_target(trace, sim);
            }
        } catch (const std::exception& e) {
            report["targets"][target] =
                wire::Json{{"completed", false}, {"deployment", target}, {"error", e.what()}};
        }
    }
    return report;
}

namespace {

std::string cell(const wire::Json& target, const std::string& issue) {
    if (target.is_null()) return "-";
    if (!target.value("completed", false)) {
        return "failed: " + target.value("error", std::string("unknown"));
    }
    bool chain = target.value("deployment", "") == "chain";
    std::ostringstream out;
    if (issue == "encryption") {
        if (chain) {
            out << "n/a: broadcast data is public; access revocation impossible";
        } else {
            auto ledger = target.at("ledger");
            out << "per-subject encrypted fields; "
                << ledger.value("personal_plaintext_leaks", 0) << " plaintext leaks";
        }
    } else if (issue == "gdpr-erasure") {
        auto flag = target.at("erasure_supported");
        if (flag.is_null()) {
            out << "not exercised";
        } else if (flag.get<bool>()) {
            out << "supported (" << target.at("erasures").size() << " erasure(s), chain intact)";
        } else {
            out << "unsupported (append-only ledger)";
        }
    } else if (issue == "gas-cost") {
        if (chain) {
            out << "total " << target.value("total_gas", 0) << " gas";
        } else {
            out << "n/a (no gas metering; host charges may apply)";
        }
    } else if (issue == "direct-api-calls") {
        if (chain) {
            out << "polling for finality; median " << target.value("median_finality_latency_ms", 0)
                << " ms, p95 " << target.value("p95_finality_latency_ms", 0) << " ms";
        } else {
            out << "direct calls; median verdict " << target.value("median_latency_ms", 0)
                << " ms";
        }
    } else if (issue == "data-inconsistency") {
        if (chain) {
            out << target.value("reverted_then_remined", 0) << " reverted-then-remined, "
                << target.value("final_reverts", 0) << " final reverts, "
                << target.value("orphaned_blocks", 0) << " orphaned blocks";
        } else {
            out << "no risk (single authoritative instance)";
        }
    } else if (issue == "deadline-violations") {
        if (chain) {
            out << "not monitored on-chain";
        } else {
            out << target.at("violations").size() << " violation(s)";
        }
    }
    return out.str();
}

}  // namespace

std::string render_report_table(const wire::Json& report) {
    static const std::pair<const char*, const char*> rows[] = {
        {"encryption", "Encryption"},
        {"gdpr-erasure", "GDPR erasure"},
        {"gas-cost", "Gas cost"},
        {"direct-api-calls", "Direct API calls"},
        {"data-inconsistency", "Data inconsistency"},
        {"deadline-violations", "Deadline violations"},
    };
    const auto& targets = report.at("targets");
    wire::Json chain = targets.contains("chain") ? targets.at("chain") : wire::Json();
    wire::Json ttp = targets.contains("ttp") ? targets.at("ttp") : wire::Json();

    std::ostringstream out;
    out << "scenario: " << report.value("scenario", "") << "  contract: "
        << report.value("contract", "") << "  seed: " << report.value("seed", 0)
        << "  events: " << report.value("trace_events", 0) << "\n\n";
    out << std::left << std::setw(22) << "Issue" << std::setw(62) << "on-chain"
        << "on-TTP" << "\n";
    out << std::string(140, '-') << "\n";
    for (const auto& [key, label] : rows) {
        out << std::left << std::setw(22) << label << std::setw(62) << cell(chain, key)
            << cell(ttp, key) << "\n";
    }
    return out.str();
}

}  // namespace pacta
