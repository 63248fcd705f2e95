#include "erasure/rdr.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace erasure {

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

AttrTerm parse_term(std::string_view text) {
  std::string t = trim(text);
  auto open = t.find('(');
  auto close = t.rfind(')');
  if (open == std::string::npos || close != t.size() - 1 || close < open)
    throw Error("malformed attribute term '" + t + "', expected attr(VAR)");
  AttrTerm term{trim(std::string_view(t).substr(0, open)), trim(std::string_view(t).substr(open + 1, close - open - 1))};
  if (term.attribute.empty() || term.variable.empty()) throw Error("malformed attribute term '" + t + "'");
  return term;
}

std::vector<std::string> split_terms(std::string_view text) {
  std::vector<std::string> out;
  int depth = 0;
  std::string cur;
  for (char c : text) {
    if (c == '(') ++depth;
    if (c == ')') --depth;
    if (c == ',' && depth == 0) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!trim(cur).empty()) out.push_back(cur);
  return out;
}

RuleMember resolve_member(const AttrTerm& term, const query::CompiledCondition& cond, const Schema& schema) {
  auto it = std::find(cond.variables.begin(), cond.variables.end(), term.variable);
  if (it == cond.variables.end())
    throw Error("variable '" + term.variable + "' is not produced by the condition");
  RuleMember m;
  m.variable = static_cast<int>(it - cond.variables.begin());
  m.relation = static_cast<std::size_t>(cond.items[cond.variable_items[m.variable]].relation);
  m.attribute = schema.attribute_index(m.relation, term.attribute);
  return m;
}

CellRef member_cell(const Schema& schema, const RuleMember& m, RecordId rid) {
  return CellRef{schema.relation(m.relation).name, rid, schema.attribute(m.relation, m.attribute).name};
}

}  // namespace

std::string RDR::dependence_text() const {
  std::string s = head.attribute + "(" + head.variable + ") <- ";
  for (std::size_t i = 0; i < tail.size(); ++i) {
    if (i) s += ", ";
    s += tail[i].attribute + "(" + tail[i].variable + ")";
  }
  return s;
}

RDR make_rdr(std::string id, std::string_view dependence, std::string_view condition, const Schema& schema) {
  RDR r;
  r.id = std::move(id);
  if (r.id.empty()) throw Error("rule without id");
  try {
    auto arrow = dependence.find("<-");
    if (arrow == std::string_view::npos) throw Error("dependence must have the form head(X) <- tail(Y), ...");
    r.head = parse_term(dependence.substr(0, arrow));
    for (const auto& t : split_terms(dependence.substr(arrow + 2))) r.tail.push_back(parse_term(t));
    if (r.tail.empty()) throw Error("empty tail");
    r.condition_text = trim(condition);
    r.condition = query::compile(query::parse_condition(r.condition_text), schema);
    r.head_member = resolve_member(r.head, r.condition, schema);
    for (const auto& t : r.tail) {
      RuleMember m = resolve_member(t, r.condition, schema);
      if (m.variable == r.head_member.variable && m.attribute == r.head_member.attribute)
        throw Error("head " + r.head.attribute + "(" + r.head.variable + ") also appears in the tail");
      r.tail_members.push_back(m);
    }
  } catch (const Error& e) {
    throw Error("rule " + r.id + ": " + e.what());
  }
  return r;
}

RDR parse_rdr(std::string_view text, const Schema& schema) {
  auto rules = parse_rules(text, schema);
  if (rules.size() != 1) throw Error("expected exactly one rule, found " + std::to_string(rules.size()));
  return std::move(rules.front());
}

std::vector<RDR> parse_rules(std::string_view text, const Schema& schema) {
  struct Pending {
    std::string id, dependence, condition;
    int section = 0;  // 1 dependence, 2 condition
  };
  std::vector<Pending> pending;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    auto starts = [&](std::string_view kw) { return t.rfind(kw, 0) == 0; };
    if (starts("rule ") || t == "rule") {
      pending.push_back(Pending{trim(std::string_view(t).substr(4)), "", "", 0});
    } else if (pending.empty()) {
      throw Error("line " + std::to_string(lineno) + ": expected 'rule <id>'");
    } else if (starts("dependence:")) {
      pending.back().dependence = t.substr(11);
      pending.back().section = 1;
    } else if (starts("condition:")) {
      pending.back().condition = t.substr(10);
      pending.back().section = 2;
    } else if (pending.back().section == 2) {
      pending.back().condition += " " + t;
    } else if (pending.back().section == 1) {
      pending.back().dependence += " " + t;
    } else {
      throw Error("line " + std::to_string(lineno) + ": expected 'dependence:' or 'condition:'");
    }
  }
  std::vector<RDR> rules;
  std::set<std::string> ids;
  for (auto& p : pending) {
    if (!ids.insert(p.id).second) throw Error("duplicate rule id '" + p.id + "'");
    if (p.dependence.empty()) throw Error("rule " + p.id + ": missing dependence");
    if (p.condition.empty()) throw Error("rule " + p.id + ": missing condition");
    rules.push_back(make_rdr(p.id, p.dependence, p.condition, schema));
  }
  return rules;
}

std::vector<RDR> load_rules(const std::string& path, const Schema& schema) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open rule file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  auto rules = parse_rules(ss.str(), schema);
  validate_rule_set(rules);
  return rules;
}

std::string format_rules(const std::vector<RDR>& rules) {
  std::string out;
  for (const auto& r : rules) {
    out += "rule " + r.id + "\n";
    out += "dependence: " + r.dependence_text() + "\n";
    out += "condition: " + r.condition_text + "\n\n";
  }
  return out;
}

void validate_rule_set(const std::vector<RDR>& rules) {
  std::set<std::pair<int, int>> aggregated;
  for (const auto& r : rules)
    if (r.condition.subquery)
      for (const auto& a : r.condition.subquery->attributes) aggregated.insert(a);
  for (const auto& r : rules) {
    std::vector<RuleMember> members = r.tail_members;
    members.push_back(r.head_member);
    for (const auto& m : members)
      if (aggregated.count({static_cast<int>(m.relation), static_cast<int>(m.attribute)}))
        throw Error("rule " + r.id + ": member attribute " + std::to_string(m.relation) + "." +
                    std::to_string(m.attribute) + " is read by an aggregate subquery");
  }
}

std::vector<CellRef> InstantiatedRDR::cells() const {
  std::vector<CellRef> out;
  out.reserve(tail.size() + 1);
  out.push_back(head);
  out.insert(out.end(), tail.begin(), tail.end());
  return out;
}

bool InstantiatedRDR::contains(const CellRef& c) const {
  return head == c || std::binary_search(tail.begin(), tail.end(), c);
}

std::string InstantiatedRDR::to_string() const {
  std::string s = rule_id + ": " + head.to_string() + " <- ";
  for (std::size_t i = 0; i < tail.size(); ++i) {
    if (i) s += ", ";
    s += tail[i].to_string();
  }
  return s;
}

std::vector<query::Binding> eval_condition(const RDR& rule, const StateView& state, std::optional<query::Pin> pin) {
  return query::evaluate(rule.condition, state, pin);
}

std::optional<InstantiatedRDR> instantiate_rule(const RDR& rule, const query::Binding& binding, const StateView& state) {
  const Schema& schema = state.schema();
  InstantiatedRDR d;
  d.member_kappa = std::numeric_limits<Timestamp>::min();
  auto live = [&](const RuleMember& m) -> std::optional<CellRef> {
    RecordId rid = binding.rids.at(m.variable);
    if (!state.has_record(m.relation, rid))
      throw Error("binding of rule " + rule.id + " names missing record " + schema.relation(m.relation).name + "(" +
                  std::to_string(rid) + ")");
    const CellState* cs = state.cell(m.relation, rid, m.attribute);
    if (!cs || cs->value.is_null()) return std::nullopt;
    d.member_kappa = std::max(d.member_kappa, cs->kappa);
    return member_cell(schema, m, rid);
  };
  d.rule_id = rule.id;
  d.binding = binding.rids;
  d.witness = binding.witness;
  auto head = live(rule.head_member);
  if (!head) return std::nullopt;
  d.head = *head;
  for (const auto& m : rule.tail_members) {
    auto c = live(m);
    if (!c) return std::nullopt;
    d.tail.push_back(*c);
  }
  std::sort(d.tail.begin(), d.tail.end());
  d.tail.erase(std::unique(d.tail.begin(), d.tail.end()), d.tail.end());
  // Bindings that collapse the head onto a tail cell carry no dependence.
  if (std::binary_search(d.tail.begin(), d.tail.end(), d.head)) return std::nullopt;
  return d;
}

std::vector<InstantiatedRDR> instantiate_all(const RDR& rule, const StateView& state) {
  std::vector<InstantiatedRDR> out;
  for (const auto& b : eval_condition(rule, state))
    if (auto d = instantiate_rule(rule, b, state)) out.push_back(std::move(*d));
  std::sort(out.begin(), out.end());
  // Distinct bindings can yield the same dependency; keep the earliest witness.
  std::vector<InstantiatedRDR> uniq;
  for (auto& d : out) {
    if (!uniq.empty() && uniq.back() == d) {
      uniq.back().witness = std::min(uniq.back().witness, d.witness);
      continue;
    }
    uniq.push_back(std::move(d));
  }
  return uniq;
}

}  // namespace erasure
