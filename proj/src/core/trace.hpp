#pragma once

#include <map>
#include <string>
#include <vector>

#include "core/engine.hpp"

namespace pacta {

// One line of a trace file: either a contractual event or a clock advance.
struct TraceItem {
    enum class Kind { Event, ClockAdvance };

    Kind kind = Kind::Event;
    Timestamp at = 0;
    Event event;  // instance id unset; filled in by the replayer
};

struct Trace {
    std::map<std::string, std::string> bindings;  // role -> party, optional preamble
    std::vector<TraceItem> items;
};

// Parses newline-delimited JSON records:
//   {"bindings": {"buyer": "alice", ...}}            (optional, once)
//   {"at": 0, "type": "POREQ", "originator": "alice", "responder": "bob",
//    "status": "success", "personal": {...}, "subject": "alice"}
//   {"at": 600001, "clock": true}
// Blank lines and lines starting with # are skipped.
Trace parse_trace(const std::string& text);

}  // namespace pacta
