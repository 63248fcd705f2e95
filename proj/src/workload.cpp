#include "erasure/workload.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace erasure {

namespace {

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    auto pos = line.find('\t', start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::int64_t parse_int(std::string_view s, const char* what) {
  std::int64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) throw Error(std::string("bad ") + what + " '" + std::string(s) + "'");
  return v;
}

}  // namespace

std::string format_value(const Value& v) {
  if (v.is_null()) return "-";
  if (v.is_int()) return std::to_string(v.as_int());
  if (v.is_double()) {
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v.as_double());
    std::string s(buf, p);
    if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
    return s;
  }
  std::string out = "\"";
  for (char c : v.as_string()) {
    if (c == '"' || c == '\\') out += '\\';
    if (c == '\t' || c == '\n') throw Error("string values may not contain tabs or newlines");
    out += c;
  }
  return out + "\"";
}

Value parse_value(std::string_view text) {
  if (text == "-") return Value();
  if (text.empty()) throw Error("empty value field");
  if (text.front() == '"') {
    if (text.size() < 2 || text.back() != '"') throw Error("unterminated string '" + std::string(text) + "'");
    std::string s;
    for (std::size_t i = 1; i + 1 < text.size(); ++i) {
      if (text[i] == '\\' && i + 2 < text.size()) ++i;
      s += text[i];
    }
    return Value(std::move(s));
  }
  if (text.find_first_of(".eE") != std::string_view::npos) {
    double d = 0;
    auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), d);
    if (ec != std::errc() || p != text.data() + text.size()) throw Error("bad number '" + std::string(text) + "'");
    return Value(d);
  }
  return Value(parse_int(text, "value"));
}

std::string format_event(const Event& e) {
  std::string s = std::to_string(e.time);
  s += '\t';
  s += to_string(e.kind);
  s += '\t' + e.relation + '\t' + std::to_string(e.rid) + '\t';
  s += e.attribute.empty() ? "-" : e.attribute;
  s += '\t' + format_value(e.value) + '\t';
  s += e.eta ? std::to_string(*e.eta) : "-";
  return s;
}

Event parse_event(std::string_view line) {
  auto f = split_tabs(line);
  if (f.size() != 7) throw Error("expected 7 tab-separated fields, got " + std::to_string(f.size()));
  Event e;
  e.time = parse_int(f[0], "time");
  auto kind = parse_event_kind(f[1]);
  if (!kind) throw Error("unknown event kind '" + std::string(f[1]) + "'");
  e.kind = *kind;
  e.relation = std::string(f[2]);
  e.rid = parse_int(f[3], "rid");
  if (f[4] != "-") e.attribute = std::string(f[4]);
  e.value = parse_value(f[5]);
  if (f[6] != "-") e.eta = parse_int(f[6], "eta");
  if (e.kind != EventKind::InsertRecord && e.attribute.empty())
    throw Error(std::string(to_string(e.kind)) + " needs an attribute");
  return e;
}

std::vector<Event> parse_workload(std::string_view text) {
  std::vector<Event> out;
  std::size_t start = 0;
  int lineno = 0;
  while (start <= text.size()) {
    auto pos = text.find('\n', start);
    std::string_view line = text.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start);
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!line.empty() && line.front() != '#') {
      try {
        out.push_back(parse_event(line));
      } catch (const Error& e) {
        throw Error("line " + std::to_string(lineno) + ": " + e.what());
      }
      if (out.size() > 1 && out.back().time < out[out.size() - 2].time)
        throw Error("line " + std::to_string(lineno) + ": events must be time-ordered");
    }
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::vector<Event> load_workload(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open workload file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_workload(ss.str());
  } catch (const Error& e) {
    throw Error(path + ": " + e.what());
  }
}

std::string format_workload(const std::vector<Event>& events) {
  std::string out = "# time\tkind\trelation\trid\tattribute\tvalue\teta\n";
  for (const auto& e : events) out += format_event(e) + "\n";
  return out;
}

void save_workload(const std::string& path, const std::vector<Event>& events) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  out << format_workload(events);
}

Store replay(SchemaPtr schema, const std::vector<Event>& events) {
  Store s(std::move(schema));
  for (const auto& e : events) s.apply(e);
  return s;
}

}  // namespace erasure
