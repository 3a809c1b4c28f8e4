#pragma once

#include <json.hpp>
#include <string>

#include "core/engine.hpp"
#include "core/rules.hpp"

namespace pacta::wire {

using Json = nlohmann::json;

// XML wire forms. Emitted documents carry no insignificant whitespace; the
// decoder ignores whitespace between elements and accepts children in any
// order. Only the entities &amp; &lt; &gt; &quot; &apos; are recognized.
//
//   <event><originator>alice</originator><responder>bob</responder>
//   <type>POREQ</type><status>success</status></event>
//
// Optional children: <timestamp>, <payload>, <subject>, and <personal> whose
// children are the personal-data fields.
std::string encode_event_xml(const Event& event);
Event decode_event_xml(const std::string& xml, bool* has_timestamp = nullptr);

// Minimal verdict form:
//   <result><contractcompliance>true</contractcompliance></result>
std::string encode_verdict_xml(const Verdict& verdict);
bool decode_verdict_xml(const std::string& xml);

// Structured-record (JSON) forms.
Json event_to_json(const Event& event);
Event event_from_json(const Json& j, bool* has_timestamp = nullptr);

Json action_to_json(const Action& action);
Json verdict_to_json(const Verdict& verdict);
Json violation_to_json(const ViolationRecord& record);
Json snapshot_to_json(const Snapshot& snapshot);
Json verify_report_to_json(const VerifyReport& report);
Json erasure_receipt_to_json(const ErasureReceipt& receipt);
Json diagnostics_to_json(const std::vector<Diagnostic>& diagnostics);

}  // namespace pacta::wire
