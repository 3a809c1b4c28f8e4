/*
 * pacta — contract compliance engine and on-chain execution simulator.
 *
 * C API over the pacta core. All handles are opaque; every fallible call
 * returns a pacta_status and reports details through an optional error
 * string (JSON: {"code": ..., "message": ..., "line"?, "column"?}).
 *
 * Strings returned through char** out-parameters are heap-allocated and
 * must be released with pacta_string_free(). Out-parameters are only
 * written on PACTA_OK unless noted. Handles are not thread-safe for
 * concurrent mutation of the same handle unless stated; the engine handle
 * is safe to share across threads.
 */

#ifndef PACTA_H
#define PACTA_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum pacta_status {
    PACTA_OK = 0,
    PACTA_ERR_INVALID_ARGUMENT = 1,
    PACTA_ERR_PARSE = 2,            /* rule source or wire body rejected */
    PACTA_ERR_VALIDATION = 3,       /* semantic diagnostics present */
    PACTA_ERR_NOT_FOUND = 4,        /* unknown contract/instance/subject/tx */
    PACTA_ERR_CONFLICT = 5,         /* duplicate, terminated, erased, clock */
    PACTA_ERR_STORAGE = 6,          /* ledger or socket I/O failure */
    PACTA_ERR_INTERNAL = 7
} pacta_status;

typedef struct pacta_ruleset pacta_ruleset;
typedef struct pacta_engine pacta_engine;
typedef struct pacta_gateway pacta_gateway;
typedef struct pacta_sim pacta_sim;

const char* pacta_version(void);

void pacta_string_free(char* s);

/* ------------------------------------------------------------------ *
 * Rule language                                                       *
 * ------------------------------------------------------------------ */

/* Parses rule source text. On PACTA_ERR_PARSE the error JSON carries the
 * line and column of the first offending token. */
pacta_status pacta_ruleset_parse(const char* source, pacta_ruleset** out, char** error_json);

/* Semantic lint. Writes a JSON array of diagnostics (empty when clean) and
 * returns PACTA_ERR_VALIDATION when any diagnostic is present. */
pacta_status pacta_ruleset_validate(const pacta_ruleset* rs, char** diagnostics_json);

/* Canonical source form; parsing it again yields an identical rule set. */
pacta_status pacta_ruleset_pretty(const pacta_ruleset* rs, char** source_out);

/* Contract name; owned by the handle, do not free. */
const char* pacta_ruleset_name(const pacta_ruleset* rs);

void pacta_ruleset_free(pacta_ruleset* rs);

/* ------------------------------------------------------------------ *
 * Engine                                                              *
 * ------------------------------------------------------------------ */

/* Opens an engine over an audit ledger. ledger_path NULL keeps the ledger
 * in memory; otherwise the file (plus "<path>.keys") is created or
 * recovered. */
pacta_status pacta_engine_open(const char* ledger_path, pacta_engine** out, char** error_json);

/* Parses, validates, and deploys rule source. Contract names are immutable
 * once deployed: a second deployment of the same name is a conflict. */
pacta_status pacta_engine_load_rules(pacta_engine* engine, const char* source,
                                     char** contract_name_out, char** error_json);

/* bindings_json: {"role": "party-id", ...} covering every declared role. */
pacta_status pacta_engine_create_instance(pacta_engine* engine, const char* contract_name,
                                          const char* bindings_json, int64_t now_ms,
                                          char** instance_id_out, char** error_json);

/* event_json: {"instance", "type", "originator", "responder", "status",
 * "at", "payload"?, "personal"?, "subject"?}. Returns the full verdict as
 * JSON. */
pacta_status pacta_engine_submit_event(pacta_engine* engine, const char* event_json,
                                       char** verdict_json_out, char** error_json);

/* XML wire form of the same operation; returns the minimal verdict XML
 * <result><contractcompliance>...</contractcompliance></result>. */
pacta_status pacta_engine_submit_event_xml(pacta_engine* engine, const char* instance_id,
                                           const char* event_xml, char** verdict_xml_out,
                                           char** error_json);

/* Sweeps obligation deadlines up to now_ms; returns a JSON array of
 * violation records. */
pacta_status pacta_engine_advance_clock(pacta_engine* engine, const char* instance_id,
                                        int64_t now_ms, char** violations_json_out,
                                        char** error_json);

pacta_status pacta_engine_query_state(pacta_engine* engine, const char* instance_id,
                                      char** snapshot_json_out, char** error_json);

pacta_status pacta_engine_terminate_instance(pacta_engine* engine, const char* instance_id,
                                             int64_t now_ms, const char* reason,
                                             char** snapshot_json_out, char** error_json);

/* Replays a trace (newline-delimited JSON records) against a fresh
 * instance of the named contract. Returns {"instance", "lines", "snapshot"}. */
pacta_status pacta_engine_replay_trace(pacta_engine* engine, const char* contract_name,
                                       const char* trace_text, char** report_json_out,
                                       char** error_json);

/* GDPR crypto-erasure: destroys the subject's ledger key. Prior entries
 * stay in place but the personal fields are permanently unreadable. */
pacta_status pacta_engine_erase_subject(pacta_engine* engine, const char* subject_id,
                                        int64_t now_ms, char** receipt_json_out,
                                        char** error_json);

/* Recomputes the ledger hash chain: {"ok", "entries", "first_bad_seq"?}. */
pacta_status pacta_engine_verify_ledger(pacta_engine* engine, char** report_json_out,
                                        char** error_json);

void pacta_engine_free(pacta_engine* engine);

/* ------------------------------------------------------------------ *
 * Gateway                                                             *
 * ------------------------------------------------------------------ */

/* config_json: {"host"?, "port"?, "wall_clock"?, "clock_tick_ms"?}.
 * Port 0 picks a free port; read it back with pacta_gateway_port. */
pacta_status pacta_gateway_start(pacta_engine* engine, const char* config_json,
                                 pacta_gateway** out, char** error_json);

int pacta_gateway_port(const pacta_gateway* gateway);

/* Stops serving and joins the worker threads; also run by _free. */
pacta_status pacta_gateway_stop(pacta_gateway* gateway);

void pacta_gateway_free(pacta_gateway* gateway);

/* ------------------------------------------------------------------ *
 * Chain simulator                                                     *
 * ------------------------------------------------------------------ */

/* config_json fields (all optional): block_interval_ms, block_gas_limit,
 * base_tx_cost, per_action_gas {op: gas}, default_action_gas,
 * per_iteration_gas, reorg_probability, max_reorg_depth, finality_depth,
 * seed, drop_on_reorg. */
pacta_status pacta_sim_new(const char* config_json, pacta_sim** out, char** error_json);

/* tx_json: {"from", "nonce"?, "gas_price"?, "gas_limit"?, "op",
 * "loop_count"?}. Omitted nonce uses the account's next; omitted limit uses
 * the computed gas. */
pacta_status pacta_sim_submit_tx(pacta_sim* sim, const char* tx_json, uint64_t* tx_id_out,
                                 char** error_json);

pacta_status pacta_sim_produce_block(pacta_sim* sim, char** block_json_out, char** error_json);

/* Reorg draw for the current block: {"occurred", "depth", "reverted_txs"}. */
pacta_status pacta_sim_maybe_reorg(pacta_sim* sim, char** report_json_out, char** error_json);

pacta_status pacta_sim_confirmations(pacta_sim* sim, uint64_t tx_id, int64_t* depth_out,
                                     char** error_json);

pacta_status pacta_sim_is_final(pacta_sim* sim, uint64_t tx_id, int* final_out,
                                char** error_json);

void pacta_sim_free(pacta_sim* sim);

/* Gas arithmetic helpers (pure). */
int64_t pacta_max_loop_iterations(int64_t block_gas_limit, int64_t base_tx_cost,
                                  int64_t per_iteration_gas);
int64_t pacta_avg_gas_per_tx(int64_t block_gas_limit, int64_t txs_per_block);

/* ------------------------------------------------------------------ *
 * Scenario runner                                                     *
 * ------------------------------------------------------------------ */

/* Loads a scenario file and runs it under its deployment targets.
 * has_seed_override != 0 replaces the configured RNG seed. Returns the
 * machine-readable comparison report as JSON. */
pacta_status pacta_scenario_run(const char* scenario_path, uint64_t seed_override,
                                int has_seed_override, char** report_json_out,
                                char** error_json);

/* Renders a report from pacta_scenario_run as a comparison table. */
pacta_status pacta_report_render(const char* report_json, char** table_out, char** error_json);

#ifdef __cplusplus
}
#endif

#endif /* PACTA_H */
