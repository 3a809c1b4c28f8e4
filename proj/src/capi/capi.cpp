#include "pacta.h"

#include <cstdlib>
#include <cstring>
#include <memory>
#include <string>

#include "core/engine.hpp"
#include "core/gateway.hpp"
#include "core/chain_sim.hpp"
#include "core/ledger.hpp"
#include "core/rules.hpp"
#include "core/scenario.hpp"
#include "core/trace.hpp"
#include "core/wire.hpp"

using pacta::DomainError;
using pacta::ErrorCode;
using Json = pacta::wire::Json;

extern "C" {

struct pacta_ruleset {
    pacta::RuleSet rs;
};

struct pacta_engine {
    std::unique_ptr<pacta::Ledger> ledger;
    std::unique_ptr<pacta::InstanceManager> mgr;
};

struct pacta_gateway {
    std::unique_ptr<pacta::Gateway> gw;
};

struct pacta_sim {
    std::unique_ptr<pacta::ChainSim> sim;
};

}  // extern "C"

namespace {

char* dup_string(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (!out) return nullptr;
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

void set_out(char** out, const std::string& value) {
    if (out) *out = dup_string(value);
}

pacta_status status_for(ErrorCode code) {
    switch (code) {
        case ErrorCode::Parse: return PACTA_ERR_PARSE;
        case ErrorCode::Validation: return PACTA_ERR_VALIDATION;
        case ErrorCode::UnknownContract:
        case ErrorCode::UnknownInstance:
        case ErrorCode::UnknownSubject:
        case ErrorCode::UnknownTx:
        case ErrorCode::OutOfRange:
            return PACTA_ERR_NOT_FOUND;
        case ErrorCode::DuplicateContract:
        case ErrorCode::DuplicateObligation:
        case ErrorCode::ConflictingDeonticState:
        case ErrorCode::TerminatedInstance:
        case ErrorCode::AlreadyTerminated:
        case ErrorCode::AlreadyErased:
        case ErrorCode::SubjectKeyDestroyed:
        case ErrorCode::ClockRegression:
        case ErrorCode::NonceInPast:
            return PACTA_ERR_CONFLICT;
        case ErrorCode::StorageFailure:
            return PACTA_ERR_STORAGE;
        case ErrorCode::Internal:
            return PACTA_ERR_INTERNAL;
        default:
            return PACTA_ERR_INVALID_ARGUMENT;
    }
}

pacta_status report_error(const DomainError& e, char** error_json) {
    Json err{{"code", pacta::error_code_name(e.code())}, {"message", e.what()}};
    if (const auto* pe = dynamic_cast<const pacta::ParseError*>(&e)) {
        err["line"] = pe->line();
        err["column"] = pe->column();
    }
    set_out(error_json, err.dump());
    return status_for(e.code());
}

pacta_status report_error(const std::exception& e, char** error_json) {
    set_out(error_json, Json{{"code", "Internal"}, {"message", e.what()}}.dump());
    return PACTA_ERR_INTERNAL;
}

template <typename Fn>
pacta_status guarded(char** error_json, Fn&& fn) {
    try {
        return fn();
    } catch (const DomainError& e) {
        return report_error(e, error_json);
    } catch (const Json::exception& e) {
        set_out(error_json, Json{{"code", "InvalidArgument"}, {"message", e.what()}}.dump());
        return PACTA_ERR_INVALID_ARGUMENT;
    } catch (const std::exception& e) {
        return report_error(e, error_json);
    }
}

pacta_status require(bool ok, const char* message, char** error_json) {
    if (ok) return PACTA_OK;
    set_out(error_json, Json{{"code", "InvalidArgument"}, {"message", message}}.dump());
    return PACTA_ERR_INVALID_ARGUMENT;
}

}  // namespace

extern "C" {

const char* pacta_version(void) { return "1.0.0"; }

void pacta_string_free(char* s) { std::free(s); }

pacta_status pacta_ruleset_parse(const char* source, pacta_ruleset** out, char** error_json) {
    if (auto rc = require(source && out, "source and out are required", error_json)) return rc;
    return guarded(error_json, [&] {
        auto handle = std::make_unique<pacta_ruleset>();
        handle->rs = pacta::parse_rules(source);
        *out = handle.release();
        return PACTA_OK;
    });
}

pacta_status pacta_ruleset_validate(const pacta_ruleset* rs, char** diagnostics_json) {
    if (!rs) return PACTA_ERR_INVALID_ARGUMENT;
    return guarded(nullptr, [&] {
        auto diagnostics = pacta::validate(rs->rs);
        set_out(diagnostics_json, pacta::wire::diagnostics_to_json(diagnostics).dump());
        return diagnostics.empty() ? PACTA_OK : PACTA_ERR_VALIDATION;
    });
}

pacta_status pacta_ruleset_pretty(const pacta_ruleset* rs, char** source_out) {
    if (!rs || !source_out) return PACTA_ERR_INVALID_ARGUMENT;
    return guarded(nullptr, [&] {
        set_out(source_out, pacta::pretty_print(rs->rs));
        return PACTA_OK;
    });
}

const char* pacta_ruleset_name(const pacta_ruleset* rs) {
    return rs ? rs->rs.contract_name.c_str() : nullptr;
}

void pacta_ruleset_free(pacta_ruleset* rs) { delete rs; }

pacta_status pacta_engine_open(const char* ledger_path, pacta_engine** out, char** error_json) {
    if (auto rc = require(out != nullptr, "out is required", error_json)) return rc;
    return guarded(error_json, [&] {
        auto handle = std::make_unique<pacta_engine>();
        handle->ledger = ledger_path ? pacta::Ledger::open(ledger_path)
                                     : pacta::Ledger::in_memory();
        handle->mgr = std::make_unique<pacta::InstanceManager>(handle->ledger.get());
        *out = handle.release();
        return PACTA_OK;
    });
}

pacta_status pacta_engine_load_rules(pacta_engine* engine, const char* source,
                                     char** contract_name_out, char** error_json) {
    if (auto rc = require(engine && source, "engine and source are required", error_json)) {
        return rc;
    }
    return guarded(error_json, [&] {
        pacta::RuleSet rs = pacta::parse_rules(source);
        auto diagnostics = pacta::validate(rs);
        if (!diagnostics.empty()) {
            set_out(error_json,
                    Json{{"code", "Validation"},
                         {"message", "rule set has diagnostics"},
                         {"diagnostics", pacta::wire::diagnostics_to_json(diagnostics)}}
                        .dump());
            return PACTA_ERR_VALIDATION;
        }
        std::string name = engine->mgr->load_ruleset(std::move(rs));
        set_out(contract_name_out, name);
        return PACTA_OK;
    });
}

pacta_status pacta_engine_create_instance(pacta_engine* engine, const char* contract_name,
                                          const char* bindings_json, int64_t now_ms,
                                          char** instance_id_out, char** error_json) {
    if (auto rc = require(engine && contract_name && bindings_json && instance_id_out,
                          "engine, contract, bindings and out are required", error_json)) {
        return rc;
    }
    return guarded(error_json, [&] {
        std::map<std::string, std::string> bindings;
        for (const auto& [role, party] : Json::parse(bindings_json).items()) {
            bindings[role] = party.get<std::string>();
        }
        set_out(instance_id_out, engine->mgr->create_instance(contract_name, bindings, now_ms));
        return PACTA_OK;
    });
}

pacta_status pacta_engine_submit_event(pacta_engine* engine, const char* event_json,
                                       char** verdict_json_out, char** error_json) {
    if (auto rc = require(engine && event_json, "engine and event are required", error_json)) {
        return rc;
    }
    return guarded(error_json, [&] {
        pacta::Event event = pacta::wire::event_from_json(Json::parse(event_json));
        pacta::Verdict verdict = engine->mgr->submit_event(std::move(event));
        set_out(verdict_json_out, pacta::wire::verdict_to_json(verdict).dump());
        return PACTA_OK;
    });
}

pacta_status pacta_engine_submit_event_xml(pacta_engine* engine, const char* instance_id,
                                           const char* event_xml, char** verdict_xml_out,
                                           char** error_json) {
    if (auto rc = require(engine && instance_id && event_xml,
                          "engine, instance and event are required", error_json)) {
        return rc;
    }
    return guarded(error_json, [&] {
        bool has_timestamp = false;
        pacta::Event event = pacta::wire::decode_event_xml(event_xml, &has_timestamp);
        event.instance_id = instance_id;
        if (!has_timestamp) event.timestamp = engine->mgr->query_state(instance_id).clock;
        pacta::Verdict verdict = engine->mgr->submit_event(std::move(event));
        set_out(verdict_xml_out, pacta::wire::encode_verdict_xml(verdict));
        return PACTA_OK;
    });
}

pacta_status pacta_engine_advance_clock(pacta_engine* engine, const char* instance_id,
                                        int64_t now_ms, char** violations_json_out,
                                        char** error_json) {
    if (auto rc = require(engine && instance_id, "engine and instance are required", error_json)) {
        return rc;
    }
    return guarded(error_json, [&] {
        Json violations = Json::array();
        for (const auto& v : engine->mgr->advance_clock(instance_id, now_ms)) {
            violations.push_back(pacta::wire::violation_to_json(v));
        }
        set_out(violations_json_out, violations.dump());
        return PACTA_OK;
    });
}

pacta_status pacta_engine_query_state(pacta_engine* engine, const char* instance_id,
                                      char** snapshot_json_out, char** error_json) {
    if (auto rc = require(engine && instance_id, "engine and instance are required", error_json)) {
        return rc;
    }
    return guarded(error_json, [&] {
        set_out(snapshot_json_out,
                pacta::wire::snapshot_to_json(engine->mgr->query_state(instance_id)).dump());
        return PACTA_OK;
    });
}

pacta_status pacta_engine_terminate_instance(pacta_engine* engine, const char* instance_id,
                                             int64_t now_ms, const char* reason,
                                             char** snapshot_json_out, char** error_json) {
    if (auto rc = require(engine && instance_id, "engine and instance are required", error_json)) {
        return rc;
    }
    return guarded(error_json, [&] {
        auto snap = engine->mgr->terminate_instance(instance_id, now_ms,
                                                    reason ? reason : "");
        set_out(snapshot_json_out, pacta::wire::snapshot_to_json(snap).dump());
        return PACTA_OK;
    });
}

pacta_status pacta_engine_replay_trace(pacta_engine* engine, const char* contract_name,
                                       const char* trace_text, char** report_json_out,
                                       char** error_json) {
    if (auto rc = require(engine && contract_name && trace_text,
                          "engine, contract and trace are required", error_json)) {
        return rc;
    }
    return guarded(error_json, [&] {
        pacta::Trace trace = pacta::parse_trace(trace_text);
        auto result = pacta::replay_trace(*engine->mgr, contract_name, trace, {});
        Json report;
        report["instance"] = result.instance_id;
        report["lines"] = result.lines;
        report["snapshot"] = pacta::wire::snapshot_to_json(result.snapshot);
        set_out(report_json_out, report.dump());
        return PACTA_OK;
    });
}

pacta_status pacta_engine_erase_subject(pacta_engine* engine, const char* subject_id,
                                        int64_t now_ms, char** receipt_json_out,
                                        char** error_json) {
    if (auto rc = require(engine && subject_id, "engine and subject are required", error_json)) {
        return rc;
    }
    return guarded(error_json, [&] {
        auto receipt = engine->ledger->erase_subject(subject_id, now_ms);
        set_out(receipt_json_out, pacta::wire::erasure_receipt_to_json(receipt).dump());
        return PACTA_OK;
    });
}

pacta_status pacta_engine_verify_ledger(pacta_engine* engine, char** report_json_out,
                                        char** error_json) {
    if (auto rc = require(engine != nullptr, "engine is required", error_json)) return rc;
    return guarded(error_json, [&] {
        set_out(report_json_out,
                pacta::wire::verify_report_to_json(engine->ledger->verify()).dump());
        return PACTA_OK;
    });
}

void pacta_engine_free(pacta_engine* engine) { delete engine; }

pacta_status pacta_gateway_start(pacta_engine* engine, const char* config_json,
                                 pacta_gateway** out, char** error_json) {
    if (auto rc = require(engine && out, "engine and out are required", error_json)) return rc;
    return guarded(error_json, [&] {
        pacta::GatewayConfig config;
        if (config_json && *config_json) {
            Json j = Json::parse(config_json);
            config.host = j.value("host", config.host);
            config.port = j.value("port", config.port);
            config.wall_clock = j.value("wall_clock", config.wall_clock);
            config.clock_tick_ms = j.value("clock_tick_ms", config.clock_tick_ms);
        }
        auto handle = std::make_unique<pacta_gateway>();
        handle->gw = std::make_unique<pacta::Gateway>(*engine->mgr, config);
        handle->gw->start();
        *out = handle.release();
        return PACTA_OK;
    });
}

int pacta_gateway_port(const pacta_gateway* gateway) {
    return gateway ? gateway->gw->port() : -1;
}

pacta_status pacta_gateway_stop(pacta_gateway* gateway) {
    if (!gateway) return PACTA_ERR_INVALID_ARGUMENT;
    gateway->gw->stop();
    return PACTA_OK;
}

void pacta_gateway_free(pacta_gateway* gateway) { delete gateway; }

pacta_status pacta_sim_new(const char* config_json, pacta_sim** out, char** error_json) {
    if (auto rc = require(out != nullptr, "out is required", error_json)) return rc;
    return guarded(error_json, [&] {
        pacta::SimConfig config;
        if (config_json && *config_json) {
            config = pacta::sim_config_from_json(Json::parse(config_json));
        }
        auto handle = std::make_unique<pacta_sim>();
        handle->sim = std::make_unique<pacta::ChainSim>(config);
        *out = handle.release();
        return PACTA_OK;
    });
}

pacta_status pacta_sim_submit_tx(pacta_sim* sim, const char* tx_json, uint64_t* tx_id_out,
                                 char** error_json) {
    if (auto rc = require(sim && tx_json && tx_id_out, "sim, tx and out are required",
                          error_json)) {
        return rc;
    }
    return guarded(error_json, [&] {
        Json j = Json::parse(tx_json);
        std::string from = j.at("from").get<std::string>();
        std::string op = j.at("op").get<std::string>();
        std::int64_t loop_count = j.value("loop_count", 0);
        pacta::Gas used = sim->sim->action_gas(op, loop_count);
        if (j.contains("nonce") || j.contains("gas_price") || j.contains("gas_limit")) {
            std::uint64_t nonce = j.value("nonce", 0ull);
            pacta::Gas price = j.value("gas_price", pacta::Gas{1});
            pacta::Gas limit = j.value("gas_limit", used);
            *tx_id_out = sim->sim->submit_tx(from, nonce, price, limit, op, loop_count);
        } else {
            *tx_id_out = sim->sim->submit_event_tx(from, op);
        }
        return PACTA_OK;
    });
}

pacta_status pacta_sim_produce_block(pacta_sim* sim, char** block_json_out, char** error_json) {
    if (auto rc = require(sim != nullptr, "sim is required", error_json)) return rc;
    return guarded(error_json, [&] {
        const pacta::Block& block = sim->sim->produce_block();
        Json j{{"height", block.height},
               {"id", block.id},
               {"parent_id", block.parent_id},
               {"txs", block.txs},
               {"gas_used", block.gas_used},
               {"gas_limit", block.gas_limit},
               {"produced_at", block.produced_at}};
        set_out(block_json_out, j.dump());
        return PACTA_OK;
    });
}

pacta_status pacta_sim_maybe_reorg(pacta_sim* sim, char** report_json_out, char** error_json) {
    if (auto rc = require(sim != nullptr, "sim is required", error_json)) return rc;
    return guarded(error_json, [&] {
        auto report = sim->sim->maybe_reorg();
        Json j{{"occurred", report.occurred},
               {"depth", report.depth},
               {"reverted_txs", report.reverted_txs}};
        set_out(report_json_out, j.dump());
        return PACTA_OK;
    });
}

pacta_status pacta_sim_confirmations(pacta_sim* sim, uint64_t tx_id, int64_t* depth_out,
                                     char** error_json) {
    if (auto rc = require(sim && depth_out, "sim and out are required", error_json)) return rc;
    return guarded(error_json, [&] {
        *depth_out = sim->sim->confirmations(tx_id);
        return PACTA_OK;
    });
}

pacta_status pacta_sim_is_final(pacta_sim* sim, uint64_t tx_id, int* final_out,
                                char** error_json) {
    if (auto rc = require(sim && final_out, "sim and out are required", error_json)) return rc;
    return guarded(error_json, [&] {
        *final_out = sim->sim->is_final(tx_id) ? 1 : 0;
        return PACTA_OK;
    });
}

void pacta_sim_free(pacta_sim* sim) { delete sim; }

int64_t pacta_max_loop_iterations(int64_t block_gas_limit, int64_t base_tx_cost,
                                  int64_t per_iteration_gas) {
    try {
        return pacta::max_loop_iterations(block_gas_limit, base_tx_cost, per_iteration_gas);
    } catch (const DomainError&) {
        return -1;
    }
}

int64_t pacta_avg_gas_per_tx(int64_t block_gas_limit, int64_t txs_per_block) {
    try {
        return pacta::avg_gas_per_tx(block_gas_limit, txs_per_block);
    } catch (const DomainError&) {
        return -1;
    }
}

pacta_status pacta_scenario_run(const char* scenario_path, uint64_t seed_override,
                                int has_seed_override, char** report_json_out,
                                char** error_json) {
    if (auto rc = require(scenario_path && report_json_out,
                          "scenario path and out are required", error_json)) {
        return rc;
    }
    return guarded(error_json, [&] {
        pacta::Scenario scenario = pacta::load_scenario(scenario_path);
        std::optional<std::uint64_t> seed;
        if (has_seed_override) seed = seed_override;
        set_out(report_json_out, pacta::run_scenario(scenario, seed).dump());
        return PACTA_OK;
    });
}

pacta_status pacta_report_render(const char* report_json, char** table_out, char** error_json) {
    if (auto rc = require(report_json && table_out, "report and out are required", error_json)) {
        return rc;
    }
    return guarded(error_json, [&] {
        set_out(table_out, pacta::render_report_table(Json::parse(report_json)));
        return PACTA_OK;
    });
}

}  // extern "C"
