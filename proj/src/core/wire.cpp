#include "core/wire.hpp"

#include <cctype>

namespace pacta::wire {

namespace {

std::string escape_xml(const std::string& text) {
    std::string out;
    out.reserve(text.size());
    for (char c : text) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            case '\'': out += "&apos;"; break;
            default: out.push_back(c);
        }
    }
    return out;
}

struct XmlNode {
    std::string name;
    std::string text;
    std::vector<XmlNode> children;
};

// Strict parser for the attribute-free wire subset.
class XmlParser {
public:
    explicit XmlParser(const std::string& src) : src_(src) {}

    XmlNode parse_document() {
        skip_ws();
        XmlNode root = parse_element();
        skip_ws();
        if (pos_ != src_.size()) {
            fail(ErrorCode::InvalidArgument, "trailing content after XML document");
        }
        return root;
    }

private:
    XmlNode parse_element() {
        expect('<');
        XmlNode node;
        node.name = read_name();
        expect('>');
        skip_ws();
        while (true) {
            if (pos_ >= src_.size()) {
                fail(ErrorCode::InvalidArgument, "unterminated element <" + node.name + ">");
            }
            if (src_[pos_] == '<' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '/') {
                break;
            }
            if (src_[pos_] == '<') {
                node.children.push_back(parse_element());
                skip_ws();
            } else {
                node.text += read_text();
            }
        }
        expect('<');
        expect('/');
        std::string closing = read_name();
        if (closing != node.name) {
            fail(ErrorCode::InvalidArgument,
                 "mismatched closing tag </" + closing + "> for <" + node.name + ">");
        }
        expect('>');
        return node;
    }

    std::string read_name() {
        std::size_t start = pos_;
        while (pos_ < src_.size() && src_[pos_] != '>' && src_[pos_] != '<' &&
               !std::isspace(static_cast<unsigned char>(src_[pos_]))) {
            ++pos_;
        }
        if (pos_ == start) fail(ErrorCode::InvalidArgument, "empty XML tag name");
        if (pos_ < src_.size() && src_[pos_] != '>') {
            fail(ErrorCode::InvalidArgument, "attributes are not supported in the wire format");
        }
        return src_.substr(start, pos_ - start);
    }

    std::string read_text() {
        std::string out;
        while (pos_ < src_.size() && src_[pos_] != '<') {
            if (src_[pos_] == '&') {
                out.push_back(read_entity());
            } else {
                out.push_back(src_[pos_]);
                ++pos_;
            }
        }
        return out;
    }

    char read_entity() {
        static const std::pair<const char*, char> entities[] = {
            {"&amp;", '&'}, {"&lt;", '<'}, {"&gt;", '>'}, {"&quot;", '"'}, {"&apos;", '\''}};
        for (const auto& [name, ch] : entities) {
            std::size_t len = std::string(name).size();
            if (src_.compare(pos_, len, name) == 0) {
                pos_ += len;
                return ch;
            }
        }
        fail(ErrorCode::InvalidArgument, "unknown XML entity");
    }

    void expect(char c) {
        if (pos_ >= src_.size() || src_[pos_] != c) {
            fail(ErrorCode::InvalidArgument,
                 std::string("malformed XML: expected '") + c + "'");
        }
        ++pos_;
    }

    void skip_ws() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    }

    const std::string& src_;
    std::size_t pos_ = 0;
};

void append_element(std::string& out, const std::string& name, const std::string& text) {
    out += "<" + name + ">" + escape_xml(text) + "</" + name + ">";
}

EventStatus status_from_string(const std::string& s) {
    if (s == "success") return EventStatus::Success;
    if (s == "failure") return EventStatus::Failure;
    fail(ErrorCode::InvalidArgument, "event status must be success or failure, got '" + s + "'");
}

}  // namespace

std::string encode_event_xml(const Event& event) {
    std::string out = "<event>";
    append_element(out, "originator", event.originator);
    append_element(out, "responder", event.responder);
    append_element(out, "type", event.type);
    append_element(out, "status", event_status_name(event.status));
    if (event.timestamp >= 0) {
        append_element(out, "timestamp", std::to_string(event.timestamp));
    }
    if (!event.payload.empty()) append_element(out, "payload", event.payload);
    if (!event.subject.empty()) append_element(out, "subject", event.subject);
    if (!event.personal.empty()) {
        out += "<personal>";
        for (const auto& [name, value] : event.personal) {
            append_element(out, name, value);
        }
        out += "</personal>";
    }
    out += "</event>";
    return out;
}

Event decode_event_xml(const std::string& xml, bool* has_timestamp) {
    XmlNode root = XmlParser(xml).parse_document();
    if (root.name != "event") {
        fail(ErrorCode::InvalidArgument, "expected <event> document, got <" + root.name + ">");
    }
    Event event;
    bool saw_type = false, saw_originator = false, saw_responder = false, saw_status = false;
    bool saw_timestamp = false;
    for (const auto& child : root.children) {
        if (child.name == "originator") {
            event.originator = child.text;
            saw_originator = true;
        } else if (child.name == "responder") {
            event.responder = child.text;
            saw_responder = true;
        } else if (child.name == "type") {
            event.type = child.text;
            saw_type = true;
        } else if (child.name == "status") {
            event.status = status_from_string(child.text);
            saw_status = true;
        } else if (child.name == "timestamp") {
            event.timestamp = std::stoll(child.text);
            saw_timestamp = true;
        } else if (child.name == "payload") {
            event.payload = child.text;
        } else if (child.name == "subject") {
            event.subject = child.text;
        } else if (child.name == "personal") {
            for (const auto& field : child.children) {
                event.personal[field.name] = field.text;
            }
        } else {
            fail(ErrorCode::InvalidArgument, "unknown event element <" + child.name + ">");
        }
    }
    if (!saw_type || !saw_originator || !saw_responder || !saw_status) {
        fail(ErrorCode::InvalidArgument,
             "event requires originator, responder, type and status elements");
    }
    if (has_timestamp) *has_timestamp = saw_timestamp;
    return event;
}

std::string encode_verdict_xml(const Verdict& verdict) {
    std::string out = "<result><contractcompliance>";
    out += verdict.compliant ? "true" : "false";
    out += "</contractcompliance></result>";
    return out;
}

bool decode_verdict_xml(const std::string& xml) {
    XmlNode root = XmlParser(xml).parse_document();
    if (root.name != "result" || root.children.size() != 1 ||
        root.children[0].name != "contractcompliance") {
        fail(ErrorCode::InvalidArgument, "expected <result><contractcompliance> document");
    }
    const std::string& text = root.children[0].text;
    if (text == "true") return true;
    if (text == "false") return false;
    fail(ErrorCode::InvalidArgument, "contractcompliance must be true or false");
}

Json event_to_json(const Event& event) {
    Json j;
    if (!event.instance_id.empty()) j["instance"] = event.instance_id;
    j["type"] = event.type;
    j["originator"] = event.originator;
    j["responder"] = event.responder;
    j["status"] = event_status_name(event.status);
    j["at"] = event.timestamp;
    if (!event.payload.empty()) j["payload"] = event.payload;
    if (!event.subject.empty()) j["subject"] = event.subject;
    if (!event.personal.empty()) {
        Json personal = Json::object();
        for (const auto& [name, value] : event.personal) personal[name] = value;
        j["personal"] = personal;
    }
    return j;
}

Event event_from_json(const Json& j, bool* has_timestamp) {
    if (!j.is_object()) fail(ErrorCode::InvalidArgument, "event must be a JSON object");
    Event event;
    try {
        event.instance_id = j.value("instance", "");
        event.type = j.at("type").get<std::string>();
        event.originator = j.at("originator").get<std::string>();
        event.responder = j.at("responder").get<std::string>();
        event.status = status_from_string(j.at("status").get<std::string>());
        if (j.contains("at")) {
            event.timestamp = j.at("at").get<Timestamp>();
            if (has_timestamp) *has_timestamp = true;
        } else if (has_timestamp) {
            *has_timestamp = false;
        }
        event.payload = j.value("payload", "");
        event.subject = j.value("subject", "");
        if (j.contains("personal")) {
            for (const auto& [name, value] : j.at("personal").items()) {
                event.personal[name] = value.get<std::string>();
            }
        }
    } catch (const Json::exception& e) {
        fail(ErrorCode::InvalidArgument, std::string("malformed event record: ") + e.what());
    }
    return event;
}

Json action_to_json(const Action& action) {
    Json j;
    if (const auto* a = std::get_if<RemoveRightAction>(&action)) {
        j["action"] = "remove_right";
        j["role"] = a->role;
        j["op"] = a->op;
        j["counterparty"] = a->counterparty;
    } else if (const auto* a = std::get_if<AddRightAction>(&action)) {
        j["action"] = "add_right";
        j["role"] = a->role;
        j["ops"] = a->ops;
        j["counterparty"] = a->counterparty;
    } else if (const auto* a = std::get_if<AddObligationAction>(&action)) {
        j["action"] = "add_obligation";
        j["name"] = a->name;
        j["ops"] = a->ops;
        j["obligor"] = a->obligor;
        j["counterparty"] = a->counterparty;
        j["deadline_ms"] = a->deadline_ms;
    } else if (const auto* a = std::get_if<AddProhibitionAction>(&action)) {
        j["action"] = "add_prohibition";
        j["role"] = a->role;
        j["ops"] = a->ops;
    } else if (const auto* a = std::get_if<SetStateAction>(&action)) {
        j["action"] = "set_state";
        j["state"] = a->state;
    } else if (const auto* a = std::get_if<SetComplianceAction>(&action)) {
        j["action"] = "compliant";
        j["value"] = a->compliant;
    }
    return j;
}

Json verdict_to_json(const Verdict& verdict) {
    Json j;
    j["instance"] = verdict.instance_id;
    j["event_seq"] = verdict.event_seq;
    j["compliant"] = verdict.compliant;
    if (verdict.triggered_rule) {
        j["rule"] = *verdict.triggered_rule;
    } else {
        j["rule"] = nullptr;
    }
    j["actions"] = Json::array();
    for (const auto& action : verdict.applied_actions) {
        j["actions"].push_back(action_to_json(action));
    }
    j["state"] = verdict.resulting_state;
    j["violations"] = verdict.violations;
    if (verdict.engine_error) {
        j["engine_error"] = true;
        j["error"] = verdict.error_message;
    }
    return j;
}

Json violation_to_json(const ViolationRecord& record) {
    return Json{{"instance", record.instance_id}, {"obligation", record.obligation},
                {"obligor", record.obligor},      {"counterparty", record.counterparty},
                {"due_at", record.due_at},        {"detected_at", record.detected_at},
                {"seq", record.seq}};
}

Json snapshot_to_json(const Snapshot& snapshot) {
    Json j;
    j["instance"] = snapshot.instance_id;
    j["contract"] = snapshot.contract;
    j["state"] = snapshot.state;
    j["bindings"] = snapshot.bindings;
    j["clock"] = snapshot.clock;
    j["terminated"] = snapshot.terminated;
    j["history_len"] = snapshot.history_len;
    Json pending = Json::array();
    for (const auto& o : snapshot.pending) {
        pending.push_back(Json{{"name", o.name},
                               {"obligor", o.obligor},
                               {"counterparty", o.counterparty},
                               {"alternatives", o.alternatives},
                               {"due_at", o.due_at},
                               {"remaining_ms", o.remaining_ms}});
    }
    j["pending"] = pending;
    Json rops = Json::object();
    for (const auto& [party, rop] : snapshot.rops) {
        Json rights = Json::array();
        for (const auto& r : rop.rights) {
            Json rj{{"holder", r.holder},
                    {"operations", r.operations},
                    {"counterparty", r.counterparty}};
            if (r.expiry) rj["expiry"] = *r.expiry;
            rights.push_back(rj);
        }
        Json obligations = Json::array();
        for (const auto& o : rop.obligations) {
            obligations.push_back(Json{{"name", o.name},
                                       {"obligor", o.obligor},
                                       {"alternatives", o.alternatives},
                                       {"counterparty", o.counterparty},
                                       {"deadline_ms", o.deadline_ms},
                                       {"created_at", o.created_at},
                                       {"status", obligation_status_name(o.status)}});
        }
        Json prohibitions = Json::array();
        for (const auto& p : rop.prohibitions) {
            prohibitions.push_back(Json{{"party", p.party}, {"operations", p.operations}});
        }
        rops[party] = Json{{"rights", rights},
                           {"obligations", obligations},
                           {"prohibitions", prohibitions}};
    }
    j["rops"] = rops;
    return j;
}

Json verify_report_to_json(const VerifyReport& report) {
    Json j;
    j["ok"] = report.ok;
    j["entries"] = report.entries;
    if (report.first_bad_seq) j["first_bad_seq"] = *report.first_bad_seq;
    return j;
}

Json erasure_receipt_to_json(const ErasureReceipt& receipt) {
    return Json{{"subject", receipt.subject},
                {"destroyed_at", receipt.destroyed_at},
                {"erasure_seq", receipt.erasure_seq}};
}

Json diagnostics_to_json(const std::vector<Diagnostic>& diagnostics) {
    Json arr = Json::array();
    for (const auto& d : diagnostics) {
        Json j{{"kind", diagnostic_kind_name(d.kind)}, {"detail", d.detail}};
        if (!d.rule.empty()) j["rule"] = d.rule;
        arr.push_back(j);
    }
    return arr;
}

}  // namespace pacta::wire
