#include "core/gateway.hpp"

#include <httplib.h>

#include <chrono>

#include "core/rules.hpp"
#include "core/wire.hpp"

namespace pacta {

namespace {

using wire::Json;

int http_status_for(ErrorCode code) {
    switch (code) {
        case ErrorCode::UnknownContract:
        case ErrorCode::UnknownInstance:
        case ErrorCode::UnknownSubject:
        case ErrorCode::OutOfRange:
        case ErrorCode::UnknownTx:
            return 404;
        case ErrorCode::TerminatedInstance:
        case ErrorCode::AlreadyTerminated:
        case ErrorCode::AlreadyErased:
        case ErrorCode::SubjectKeyDestroyed:
        case ErrorCode::ClockRegression:
        case ErrorCode::DuplicateContract:
        case ErrorCode::DuplicateObligation:
        case ErrorCode::ConflictingDeonticState:
            return 409;
        case ErrorCode::Parse:
        case ErrorCode::Validation:
            return 422;
        case ErrorCode::InvalidArgument:
        case ErrorCode::IncompleteBindings:
        case ErrorCode::NoSuchRight:
            return 400;
        default:
            return 500;
    }
}

void send_json(httplib::Response& res, int status, const Json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, const DomainError& e) {
    Json body{{"error", {{"code", error_code_name(e.code())}, {"message", e.what()}}}};
    if (const auto* pe = dynamic_cast<const ParseError*>(&e)) {
        body["error"]["line"] = pe->line();
        body["error"]["column"] = pe->column();
    }
    send_json(res, http_status_for(e.code()), body);
}

bool is_xml_request(const httplib::Request& req) {
    std::string type = req.get_header_value("Content-Type");
    return type.find("xml") != std::string::npos;
}

Timestamp wall_now_ms() {
    return std::chrono::duration_cast<std::chrono::milliseconds>(
               std::chrono::system_clock::now().time_since_epoch())
        .count();
}

}  // namespace

struct Gateway::Impl {
    httplib::Server server;
};

Gateway::Gateway(InstanceManager& mgr, GatewayConfig config)
    : mgr_(mgr), config_(std::move(config)), impl_(std::make_unique<Impl>()) {
    auto& svr = impl_->server;

    auto guarded = [](auto&& fn) {
        return [fn](const httplib::Request& req, httplib::Response& res) {
            try {
                fn(req, res);
            } catch (const DomainError& e) {
                send_error(res, e);
            } catch (const Json::exception& e) {
                send_json(res, 400,
                          Json{{"error",
                                {{"code", "InvalidArgument"},
                                 {"message", std::string("malformed body: ") + e.what()}}}});
            } catch (const std::exception& e) {
                send_json(res, 500,
                          Json{{"error", {{"code", "Internal"}, {"message", e.what()}}}});
            }
        };
    };

    svr.Post("/contracts", guarded([this](const httplib::Request& req, httplib::Response& res) {
        RuleSet rs = parse_rules(req.body);
        auto diagnostics = validate(rs);
        if (!diagnostics.empty()) {
            send_json(res, 422, Json{{"diagnostics", wire::diagnostics_to_json(diagnostics)}});
            return;
        }
        std::string name = mgr_.load_ruleset(std::move(rs));
        send_json(res, 201, Json{{"contract", name}});
    }));

    svr.Post("/instances", guarded([this](const httplib::Request& req, httplib::Response& res) {
        Json body = Json::parse(req.body);
        std::map<std::string, std::string> bindings;
        for (const auto& [role, party] : body.at("bindings").items()) {
            bindings[role] = party.get<std::string>();
        }
        Timestamp at = body.value("at", config_.wall_clock ? wall_now_ms() : 0);
        std::string id =
            mgr_.create_instance(body.at("contract").get<std::string>(), bindings, at);
        send_json(res, 201, Json{{"instance", id}});
    }));

    svr.Post(R"(/instances/([^/]+)/events)",
             guarded([this](const httplib::Request& req, httplib::Response& res) {
                 const std::string& id = req.matches[1];
                 bool xml = is_xml_request(req);
                 bool has_timestamp = false;
                 Event event = xml ? wire::decode_event_xml(req.body, &has_timestamp)
                                   : wire::event_from_json(Json::parse(req.body), &has_timestamp);
                 event.instance_id = id;
                 if (!has_timestamp) {
                     event.timestamp =
                         config_.wall_clock ? wall_now_ms() : mgr_.query_state(id).clock;
                 }
                 Verdict verdict = mgr_.submit_event(std::move(event));
                 if (xml) {
                     res.status = 200;
                     res.set_content(wire::encode_verdict_xml(verdict), "application/xml");
                 } else {
                     send_json(res, 200, wire::verdict_to_json(verdict));
                 }
             }));

    svr.Get(R"(/instances/([^/]+)/state)",
            guarded([this](const httplib::Request& req, httplib::Response& res) {
                send_json(res, 200, wire::snapshot_to_json(mgr_.query_state(req.matches[1])));
            }));

    svr.Post(R"(/instances/([^/]+)/clock)",
             guarded([this](const httplib::Request& req, httplib::Response& res) {
                 Json body = req.body.empty() ? Json::object() : Json::parse(req.body);
                 Timestamp at = body.value("at", config_.wall_clock ? wall_now_ms() : 0);
                 Json violations = Json::array();
                 for (const auto& v : mgr_.advance_clock(req.matches[1], at)) {
                     violations.push_back(wire::violation_to_json(v));
                 }
                 send_json(res, 200, Json{{"violations", violations}});
             }));

    svr.Get(R"(/instances/([^/]+)/verdicts)",
            guarded([this](const httplib::Request& req, httplib::Response& res) {
                std::uint64_t since = 0;
                if (req.has_param("since")) since = std::stoull(req.get_param_value("since"));
                Json verdicts = Json::array();
                for (const auto& rec : mgr_.history_since(req.matches[1], since)) {
                    if (rec.kind == HistoryRecord::Kind::Event && rec.verdict) {
                        verdicts.push_back(wire::verdict_to_json(*rec.verdict));
                    }
                }
                send_json(res, 200, Json{{"verdicts", verdicts}});
            }));

    svr.Get("/audit/verify", guarded([this](const httplib::Request&, httplib::Response& res) {
        send_json(res, 200, wire::verify_report_to_json(mgr_.ledger().verify()));
    }));

    svr.Post(R"(/subjects/([^/]+)/erase)",
             guarded([this](const httplib::Request& req, httplib::Response& res) {
                 Json body = req.body.empty() ? Json::object() : Json::parse(req.body);
                 Timestamp at = body.value("at", config_.wall_clock ? wall_now_ms() : 0);
                 auto receipt = mgr_.ledger().erase_subject(req.matches[1], at);
                 send_json(res, 200, wire::erasure_receipt_to_json(receipt));
             }));
}

Gateway::~Gateway() { stop(); }

void Gateway::start() {
    auto& svr = impl_->server;
    if (config_.port == 0) {
        port_ = svr.bind_to_any_port(config_.host);
        if (port_ <= 0) fail(ErrorCode::StorageFailure, "cannot bind gateway port");
    } else {
        if (!svr.bind_to_port(config_.host, config_.port)) {
            fail(ErrorCode::StorageFailure,
                 "cannot bind gateway port " + std::to_string(config_.port));
        }
        port_ = config_.port;
    }
    running_ = true;
    server_thread_ = std::thread([this] { impl_->server.listen_after_bind(); });
    impl_->server.wait_until_ready();
    if (config_.wall_clock) {
        clock_thread_ = std::thread([this] { clock_loop(); });
    }
}

void Gateway::clock_loop() {
    while (running_) {
        std::this_thread::sleep_for(std::chrono::milliseconds(config_.clock_tick_ms));
        if (!running_) break;
        Timestamp now = wall_now_ms();
        for (const auto& id : mgr_.instance_ids()) {
            try {
                mgr_.advance_clock(id, now);
            } catch (const DomainError&) {
                // terminated instances and clock races are expected here
            }
        }
    }
}

void Gateway::stop() {
    if (!running_.exchange(false)) return;
    impl_->server.stop();
    if (server_thread_.joinable()) server_thread_.join();
    if (clock_thread_.joinable()) clock_thread_.join();
}

}  // namespace pacta
