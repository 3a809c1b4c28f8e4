#include "core/trace.hpp"

#include <sstream>

#include "core/wire.hpp"

namespace pacta {

Trace parse_trace(const std::string& text) {
    Trace trace;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::size_t first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        wire::Json j;
        try {
            j = wire::Json::parse(line);
        } catch (const wire::Json::exception& e) {
            fail(ErrorCode::Parse,
                 "trace line " + std::to_string(line_no) + ": " + e.what());
        }
        if (j.contains("bindings")) {
            for (const auto& [role, party] : j.at("bindings").items()) {
                trace.bindings[role] = party.get<std::string>();
            }
            continue;
        }
        TraceItem item;
        if (!j.contains("at") || !j.at("at").is_number_integer()) {
            fail(ErrorCode::Parse,
                 "trace line " + std::to_string(line_no) + ": missing integer 'at'");
        }
        item.at = j.at("at").get<Timestamp>();
        if (j.value("clock", false)) {
            item.kind = TraceItem::Kind::ClockAdvance;
        } else {
            item.kind = TraceItem::Kind::Event;
            try {
                item.event = wire::event_from_json(j);
            } catch (const DomainError& e) {
                fail(ErrorCode::Parse,
                     "trace line " + std::to_string(line_no) + ": " + e.what());
            }
        }
        trace.items.push_back(std::move(item));
    }
    return trace;
}

}  // namespace pacta
