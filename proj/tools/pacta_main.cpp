// pacta command-line front end. Talks to the core exclusively through the
// C API in pacta.h; file handling and presentation live here.

#include <pacta.h>

#include <CLI11.hpp>
#include <json.hpp>

#include <atomic>
#include <chrono>
#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>

namespace {

using Json = nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitInputError = 1;
constexpr int kExitDiagnostics = 2;

std::atomic<bool> g_stop{false};

void on_signal(int) { g_stop = true; }

struct CString {
    char* value = nullptr;
    ~CString() { pacta_string_free(value); }
    std::string str() const { return value ? value : ""; }
};

bool read_file(const std::string& path, std::string& out) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return false;
    std::ostringstream buf;
    buf << in.rdbuf();
    out = buf.str();
    return true;
}

void print_error(const std::string& error_json) {
    if (error_json.empty()) {
        std::cerr << "error: unknown failure\n";
        return;
    }
    auto j = Json::parse(error_json, nullptr, false);
    if (j.is_discarded()) {
        std::cerr << "error: " << error_json << "\n";
        return;
    }
    std::cerr << "error";
    if (j.contains("line")) std::cerr << " at line " << j["line"] << ":" << j["column"];
    std::cerr << ": " << j.value("message", error_json) << "\n";
    if (j.contains("diagnostics")) {
        for (const auto& d : j["diagnostics"]) {
            std::cerr << "  " << d.value("kind", "") << ": " << d.value("detail", "") << "\n";
        }
    }
}

bool write_output(const std::string& out_path, const std::string& content) {
    if (out_path.empty()) {
        std::cout << content;
        if (!content.empty() && content.back() != '\n') std::cout << "\n";
        return true;
    }
    std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
    out << content;
    return static_cast<bool>(out);
}

int cmd_validate(const std::string& rules_path) {
    std::string source;
    if (!read_file(rules_path, source)) {
        std::cerr << "error: cannot read " << rules_path << "\n";
        return kExitInputError;
    }
    pacta_ruleset* rs = nullptr;
    CString error;
    if (pacta_ruleset_parse(source.c_str(), &rs, &error.value) != PACTA_OK) {
        print_error(error.str());
        return kExitInputError;
    }
    CString diagnostics;
    pacta_status rc = pacta_ruleset_validate(rs, &diagnostics.value);
    if (rc == PACTA_OK) {
        std::cout << pacta_ruleset_name(rs) << ": ok\n";
        pacta_ruleset_free(rs);
        return kExitOk;
    }
    for (const auto& d : Json::parse(diagnostics.str())) {
        std::cout << d.value("kind", "") << " (" << d.value("rule", "-") << "): "
                  << d.value("detail", "") << "\n";
    }
    pacta_ruleset_free(rs);
    return kExitDiagnostics;
}

int cmd_replay(const std::string& rules_path, const std::string& trace_path,
               const std::string& format, const std::string& out_path) {
    std::string source, trace;
    if (!read_file(rules_path, source)) {
        std::cerr << "error: cannot read " << rules_path << "\n";
        return kExitInputError;
    }
    if (!read_file(trace_path, trace)) {
        std::cerr << "error: cannot read " << trace_path << "\n";
        return kExitInputError;
    }

    pacta_engine* engine = nullptr;
    CString error;
    if (pacta_engine_open(nullptr, &engine, &error.value) != PACTA_OK) {
        print_error(error.str());
        return kExitInputError;
    }
    CString contract;
    pacta_status rc = pacta_engine_load_rules(engine, source.c_str(), &contract.value,
                                              &error.value);
    if (rc != PACTA_OK) {
        print_error(error.str());
        pacta_engine_free(engine);
        return rc == PACTA_ERR_VALIDATION ? kExitDiagnostics : kExitInputError;
    }
    CString report;
    if (pacta_engine_replay_trace(engine, contract.value, trace.c_str(), &report.value,
                                  &error.value) != PACTA_OK) {
        print_error(error.str());
        pacta_engine_free(engine);
        return kExitInputError;
    }
    pacta_engine_free(engine);

    Json j = Json::parse(report.str());
    std::ostringstream out;
    if (format == "records") {
        out << j.dump(2) << "\n";
    } else {
        for (const auto& line : j["lines"]) {
            out << "[" << line.value("at", 0) << "] ";
            if (line.value("clock", false)) {
                out << "clock advance";
                if (!line["violations"].empty()) {
                    out << " -> violations:";
                    for (const auto& v : line["violations"]) {
                        out << " " << v.value("obligation", "");
                    }
                } else {
                    out << " -> no violations";
                }
            } else if (line.contains("error")) {
                out << line.value("type", "") << " -> error: " << line.value("error", "");
            } else {
                const auto& verdict = line["verdict"];
                out << line.value("type", "") << " -> "
                    << (verdict.value("compliant", false) ? "compliant" : "non-compliant");
                if (!verdict["rule"].is_null()) {
                    out << " rule=\"" << verdict.value("rule", "") << "\"";
                }
                out << " state=" << verdict.value("state", "");
                if (!verdict["violations"].empty()) {
                    out << " violations:";
                    for (const auto& v : verdict["violations"]) out << " " << v.get<std::string>();
                }
            }
            out << "\n";
        }
        const auto& snap = j["snapshot"];
        out << "final state: " << snap.value("state", "") << " (pending obligations: "
            << snap["pending"].size() << ", history: " << snap.value("history_len", 0) << ")\n";
    }
    if (!write_output(out_path, out.str())) {
        std::cerr << "error: cannot write " << out_path << "\n";
        return kExitInputError;
    }
    return kExitOk;
}

int cmd_simulate(const std::string& scenario_path, bool has_seed, std::uint64_t seed,
                 const std::string& format, const std::string& out_path) {
    CString report, error;
    if (pacta_scenario_run(scenario_path.c_str(), seed, has_seed ? 1 : 0, &report.value,
                           &error.value) != PACTA_OK) {
        print_error(error.str());
        return kExitInputError;
    }
    std::string content;
    if (format == "records") {
        content = report.str() + "\n";
    } else {
        CString table;
        if (pacta_report_render(report.value, &table.value, &error.value) != PACTA_OK) {
            print_error(error.str());
            return kExitInputError;
        }
        content = table.str();
    }
    if (!write_output(out_path, content)) {
        std::cerr << "error: cannot write " << out_path << "\n";
        return kExitInputError;
    }
    Json j = Json::parse(report.str());
    for (const auto& [name, target] : j["targets"].items()) {
        if (target.value("completed", false)) return kExitOk;
    }
    std::cerr << "error: no deployment target completed\n";
    return kExitInputError;
}

int cmd_serve(const std::string& config_path, int port_override,
              const std::string& ledger_override, bool wall_clock) {
    Json config = Json::object();
    std::filesystem::path base = ".";
    if (!config_path.empty()) {
        std::string text;
        if (!read_file(config_path, text)) {
            std::cerr << "error: cannot read " << config_path << "\n";
            return kExitInputError;
        }
        config = Json::parse(text, nullptr, false);
        if (config.is_discarded()) {
            std::cerr << "error: " << config_path << " is not valid JSON\n";
            return kExitInputError;
        }
        base = std::filesystem::path(config_path).parent_path();
    }
    if (port_override >= 0) config["port"] = port_override;
    if (!ledger_override.empty()) config["ledger"] = ledger_override;
    if (wall_clock) config["wall_clock"] = true;

    std::string ledger_path;
    if (config.contains("ledger")) {
        std::filesystem::path p = config["ledger"].get<std::string>();
        ledger_path = (p.is_absolute() ? p : base / p).string();
    }

    pacta_engine* engine = nullptr;
    CString error;
    if (pacta_engine_open(ledger_path.empty() ? nullptr : ledger_path.c_str(), &engine,
                          &error.value) != PACTA_OK) {
        print_error(error.str());
        return kExitInputError;
    }

    for (const auto& entry : config.value("contracts", Json::array())) {
        std::filesystem::path p = entry.get<std::string>();
        std::string source;
        if (!read_file((p.is_absolute() ? p : base / p).string(), source)) {
            std::cerr << "error: cannot read contract " << p << "\n";
            pacta_engine_free(engine);
            return kExitInputError;
        }
        CString name;
        if (pacta_engine_load_rules(engine, source.c_str(), &name.value, &error.value) !=
            PACTA_OK) {
            print_error(error.str());
            pacta_engine_free(engine);
            return kExitInputError;
        }
        std::cout << "loaded contract " << name.str() << "\n";
    }

    pacta_gateway* gateway = nullptr;
    if (pacta_gateway_start(engine, config.dump().c_str(), &gateway, &error.value) != PACTA_OK) {
        print_error(error.str());
        pacta_engine_free(engine);
        return kExitInputError;
    }
    std::cout << "gateway listening on port " << pacta_gateway_port(gateway) << "\n";
    if (!ledger_path.empty()) std::cout << "audit ledger: " << ledger_path << "\n";

    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    while (!g_stop) {
        std::this_thread::sleep_for(std::chrono::milliseconds(100));
    }
    std::cout << "shutting down\n";
    pacta_gateway_stop(gateway);
    pacta_gateway_free(gateway);
    pacta_engine_free(engine);
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"pacta: contract compliance engine and chain execution simulator"};
    app.require_subcommand(1);

    std::string rules_path, trace_path, scenario_path, config_path, out_path;
    std::string format = "table";
    std::uint64_t seed = 0;
    bool wall_clock = false;
    int port = -1;
    std::string ledger_path;

    auto* validate = app.add_subcommand("validate", "parse and lint a contract");
    validate->add_option("rules", rules_path, "rule source file")->required();

    auto* replay = app.add_subcommand("replay", "replay a trace against a contract");
    replay->add_option("rules", rules_path, "rule source file")->required();
    replay->add_option("trace", trace_path, "trace file")->required();
    replay->add_option("--format", format, "table|records")
        ->check(CLI::IsMember({"table", "records"}));
    replay->add_option("--out", out_path, "write output to a file");

    auto* simulate = app.add_subcommand("simulate", "run a scenario under ttp and chain targets");
    simulate->add_option("scenario", scenario_path, "scenario file")->required();
    auto* seed_opt = simulate->add_option("--seed", seed, "override the simulator RNG seed");
    simulate->add_option("--format", format, "table|records")
        ->check(CLI::IsMember({"table", "records"}));
    simulate->add_option("--out", out_path, "write output to a file");

    auto* serve = app.add_subcommand("serve", "run the HTTP gateway");
    serve->add_option("--config", config_path, "gateway config file");
    serve->add_option("--port", port, "listen port override");
    serve->add_option("--ledger", ledger_path, "audit ledger path override");
    serve->add_flag("--wall-clock", wall_clock, "stamp events with wall time");

    CLI11_PARSE(app, argc, argv);

    if (validate->parsed()) return cmd_validate(rules_path);
    if (replay->parsed()) return cmd_replay(rules_path, trace_path, format, out_path);
    if (simulate->parsed()) {
        return cmd_simulate(scenario_path, seed_opt->count() > 0, seed, format, out_path);
    }
    if (serve->parsed()) return cmd_serve(config_path, port, ledger_path, wall_clock);
    return kExitInputError;
}
