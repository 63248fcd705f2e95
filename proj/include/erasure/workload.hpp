#pragma once

// Workload files: one event per line, tab separated,
//
//   time  kind  relation  rid  attribute  value  eta
//
// '-' marks an absent field, strings are double quoted, '#' starts a comment line.
// Kinds are the names printed by to_string(EventKind).

#include <string>
#include <string_view>
#include <vector>

#include "erasure/store.hpp"

namespace erasure {

std::string format_value(const Value& v);
Value parse_value(std::string_view text);

std::string format_event(const Event& e);
Event parse_event(std::string_view line);

std::vector<Event> parse_workload(std::string_view text);
std::vector<Event> load_workload(const std::string& path);
std::string format_workload(const std::vector<Event>& events);
void save_workload(const std::string& path, const std::vector<Event>& events);

/// Replays a log into a fresh store.
Store replay(SchemaPtr schema, const std::vector<Event>& events);

}  // namespace erasure
