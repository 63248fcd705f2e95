#pragma once

// Condition dialect shared by dependency rules and derived-attribute definitions:
// conjunctive select-join with comparisons, plus at most one grouped aggregate
// subquery that joins like a relation.

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "erasure/schema.hpp"
#include "erasure/value.hpp"

namespace erasure {
class StateView;
}

namespace erasure::query {

enum class CmpOp { Eq, Ne, Lt, Le, Gt, Ge };
enum class AggFn { Sum, Count, Min, Max, Avg };

std::string_view to_string(CmpOp op);
std::string_view to_string(AggFn fn);

struct ColumnRef {
  std::string alias;
  std::string column;  // "rid" names the record id
};

struct Operand {
  std::optional<ColumnRef> column;  // column [+/- offset] ...
  Value constant;                   // ... or a constant
  double offset = 0.0;
};

struct Predicate {
  ColumnRef lhs;
  CmpOp op = CmpOp::Eq;
  Operand rhs;
};

struct FromRelation {
  std::string relation;
  std::string alias;
};

struct SelectItem {
  std::optional<AggFn> aggregate;  // none: plain grouped column
  std::optional<ColumnRef> column; // none only for COUNT(*)
  std::string name;
};

struct AggregateSubquery {
  std::vector<SelectItem> select;
  std::vector<FromRelation> from;
  std::vector<Predicate> where;
  std::vector<ColumnRef> group_by;
  std::string alias;
};

struct OutputColumn {
  std::string alias;  // <alias>.rid
  std::string variable;
};

/// SELECT a.rid AS X, ... FROM ... WHERE ...
struct Condition {
  std::vector<OutputColumn> output;
  std::vector<FromRelation> from;
  std::optional<AggregateSubquery> subquery;
  std::vector<Predicate> where;
};

/// AGG(alias.column) FROM ... WHERE ...  where SELF names the owning record.
struct Aggregation {
  AggFn fn = AggFn::Sum;
  std::optional<ColumnRef> column;  // none for COUNT(*)
  std::vector<FromRelation> from;
  std::vector<Predicate> where;
};

inline constexpr std::string_view kSelfAlias = "SELF";

Condition parse_condition(std::string_view text);
Aggregation parse_aggregation(std::string_view text);

// ---------------------------------------------------------------------------
// Compiled forms, resolved against a schema.

struct Slot {
  int item = -1;     // index into the join items
  int column = -1;   // attribute index, or subquery column; -1 means rid
};

struct CompiledPredicate {
  Slot lhs;
  CmpOp op = CmpOp::Eq;
  std::optional<Slot> rhs_slot;
  Value constant;
  double offset = 0.0;
};

struct JoinItem {
  std::string alias;
  int relation = -1;  // -1: the aggregate subquery
  std::vector<int> read_columns;  // attributes read by predicates (witness cells)
};

struct CompiledSubquery {
  std::vector<JoinItem> items;
  std::vector<CompiledPredicate> where;
  std::vector<Slot> group_by;
  struct Column {
    std::optional<AggFn> aggregate;
    std::optional<Slot> source;
    std::string name;
  };
  std::vector<Column> columns;
  std::vector<std::pair<int, int>> attributes;  // (relation, attribute) read anywhere inside
};

struct CompiledCondition {
  std::vector<JoinItem> items;  // subquery item, if any, is last
  std::optional<CompiledSubquery> subquery;
  std::vector<CompiledPredicate> where;
  std::vector<std::string> variables;  // output variables in declaration order
  std::vector<int> variable_items;     // join item producing each variable's rid
};

struct CompiledAggregation {
  AggFn fn = AggFn::Sum;
  std::optional<Slot> column;
  std::vector<JoinItem> items;  // item 0 is SELF
  std::vector<CompiledPredicate> where;
  std::vector<std::pair<int, int>> attributes;  // (relation, attribute) read
};

CompiledCondition compile(const Condition& cond, const Schema& schema);
CompiledAggregation compile(const Aggregation& agg, const Schema& schema, std::size_t self_relation);

// ---------------------------------------------------------------------------
// Evaluation

struct Binding {
  std::vector<RecordId> rids;  // aligned with CompiledCondition::variables
  Timestamp witness = 0;       // latest change among the condition cells supporting it

  friend bool operator==(const Binding& a, const Binding& b) { return a.rids == b.rids; }
  friend bool operator<(const Binding& a, const Binding& b) { return a.rids < b.rids; }
};

/// Optional restriction of a variable to one record id.
struct Pin {
  int variable = -1;
  RecordId rid = 0;
};

/// Distinct bindings satisfying the condition, sorted by rid tuple. `pin` restricts one
/// variable. The witness of a binding is the minimum over its supporting join rows of the
/// latest kappa among the cells the row reads (including the subquery group's support).
std::vector<Binding> evaluate(const CompiledCondition& cond, const StateView& state,
                              std::optional<Pin> pin = std::nullopt);

/// Naive nested-loop evaluation over the cross product; test oracle for evaluate().
std::vector<Binding> evaluate_naive(const CompiledCondition& cond, const StateView& state);

/// Value of a derived cell of record `self` in `state`. NULL inputs are skipped.
/// SUM and COUNT over zero rows give 0; MIN, MAX, AVG give NULL. SUM over rows whose
/// inputs are all NULL gives NULL.
Value evaluate(const CompiledAggregation& agg, const StateView& state, RecordId self);

}  // namespace erasure::query
