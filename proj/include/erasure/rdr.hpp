#pragma once

// Relational dependency rules: head <- tail terms plus a condition query that binds
// every variable to a record id.
//
// Rule file grammar (one or more rules, '#' starts a comment line):
//
//   rule R1
//   dependence: totLikes(R) <- pLikes(M)
//   condition: SELECT S.rid AS R, P.rid AS M
//              FROM Statistics S, Posts P, PostedBy B
//              WHERE S.perID = B.usr AND B.pst = P.pID
//
// Condition text continues on following lines until the next `rule` line.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "erasure/query.hpp"
#include "erasure/store.hpp"

namespace erasure {

struct AttrTerm {
  std::string attribute;
  std::string variable;
};

struct RuleMember {
  int variable = -1;  // index into condition.variables
  std::size_t relation = 0;
  std::size_t attribute = 0;
};

struct RDR {
  std::string id;
  AttrTerm head;
  std::vector<AttrTerm> tail;
  std::string condition_text;

  query::CompiledCondition condition;
  RuleMember head_member;
  std::vector<RuleMember> tail_members;

  std::string dependence_text() const;
};

/// Parses one rule from its three parts.
RDR make_rdr(std::string id, std::string_view dependence, std::string_view condition, const Schema& schema);

/// Parses a rule source in the grammar above; exactly one rule.
RDR parse_rdr(std::string_view text, const Schema& schema);

/// Parses a whole rule file. Rule ids must be unique; the set is checked by validate_rule_set.
std::vector<RDR> parse_rules(std::string_view text, const Schema& schema);
std::vector<RDR> load_rules(const std::string& path, const Schema& schema);
std::string format_rules(const std::vector<RDR>& rules);

/// Rejects sets where a rule member attribute is read inside any aggregate subquery.
/// Erasing such a cell could create new bindings, which breaks the monotonicity the
/// erasure algorithms rely on.
void validate_rule_set(const std::vector<RDR>& rules);

struct InstantiatedRDR {
  std::string rule_id;
  CellRef head;
  std::vector<CellRef> tail;      // sorted, distinct
  std::vector<RecordId> binding;  // aligned with the rule's condition variables
  Timestamp witness = 0;          // latest change among condition cells supporting the binding
  Timestamp member_kappa = 0;     // latest kappa among head and tail cells

  std::vector<CellRef> cells() const;  // head followed by tail
  bool contains(const CellRef& c) const;

  /// Structural identity: rule id, head cell ref, tail cell ref set.
  friend bool operator==(const InstantiatedRDR& a, const InstantiatedRDR& b) {
    return a.rule_id == b.rule_id && a.head == b.head && a.tail == b.tail;
  }
  friend bool operator<(const InstantiatedRDR& a, const InstantiatedRDR& b) {
    if (a.rule_id != b.rule_id) return a.rule_id < b.rule_id;
    if (a.head != b.head) return a.head < b.head;
    return a.tail < b.tail;
  }
  std::string to_string() const;
};

std::vector<query::Binding> eval_condition(const RDR& rule, const StateView& state,
                                           std::optional<query::Pin> pin = std::nullopt);

/// None when any member cell is NULL in `state`. Throws if the binding names a missing record.
std::optional<InstantiatedRDR> instantiate_rule(const RDR& rule, const query::Binding& binding,
                                                const StateView& state);

/// Every instantiation of `rule` on `state`, sorted and distinct.
std::vector<InstantiatedRDR> instantiate_all(const RDR& rule, const StateView& state);

}  // namespace erasure
