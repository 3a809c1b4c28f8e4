#pragma once

#include <optional>
#include <string>
#include <vector>

#include "core/chain_sim.hpp"
#include "core/engine.hpp"
#include "core/trace.hpp"
#include "core/wire.hpp"

namespace pacta {

// A comparison scenario: one contract, one trace, and the deployment targets
// to run it under.
struct Scenario {
    std::string name;
    std::string contract_path;  // resolved against the scenario file directory
    std::string trace_path;
    std::map<std::string, std::string> bindings;  // overrides the trace preamble
    std::vector<std::string> targets;             // subset of {"ttp", "chain"}
    SimConfig sim;
};

SimConfig sim_config_from_json(const wire::Json& j);

Scenario load_scenario(const std::string& path);

struct ReplayResult {
    std::string instance_id;
    std::vector<wire::Json> lines;  // one record per processed trace item
    Snapshot snapshot;
};

// Creates a fresh instance of `contract` and pushes the trace through it.
// Engine rejections (clock regression, reserved types, ...) are recorded as
// error lines and the replay continues.
ReplayResult replay_trace(InstanceManager& mgr, const std::string& contract, const Trace& trace,
                          const std::map<std::string, std::string>& binding_overrides);

// Runs the scenario under each requested target and builds the
// machine-readable comparison report. Per-target failures are recorded in
// the report, not thrown. Deterministic for a fixed scenario and seed.
wire::Json run_scenario(const Scenario& scenario,
                        std::optional<std::uint64_t> seed_override = std::nullopt);

// Human-readable table mirroring the on-chain vs on-TTP tradeoff rows
// (encryption, GDPR erasure, gas cost, API calls, data inconsistency,
// deadline violations).
std::string render_report_table(const wire::Json& report);

}  // namespace pacta
