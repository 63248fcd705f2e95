#pragma once

#include <map>
#include <set>
#include <vector>

#include "erasure/rdr.hpp"

namespace erasure {

/// True iff the instantiation could not have been used for inference when the target
/// was inserted at t_b: some member cell, or some condition cell supporting the binding,
/// changed after t_b.
bool violates_p2e2(const InstantiatedRDR& delta, Timestamp t_b);

/// Lazily evaluates rules pinned to one cell, caching per (cell, role). Counts the
/// distinct cells and rules it has materialized.
class RuleExpander {
 public:
  RuleExpander(StateView state, const std::vector<RDR>& rules);

  /// Instantiations whose head is `c`.
  const std::vector<InstantiatedRDR>& as_head(const CellRef& c);
  /// Instantiations that contain `c` in their tail.
  const std::vector<InstantiatedRDR>& as_tail(const CellRef& c);

  const StateView& state() const { return state_; }
  const std::vector<RDR>& rules() const { return *rules_; }

  std::size_t instantiated_cells() const { return cells_.size(); }
  std::size_t instantiated_rules() const { return rules_seen_.size(); }
  std::size_t evaluations() const { return evaluations_; }

 private:
  std::vector<InstantiatedRDR> expand(const CellRef& c, bool head_role);

  StateView state_;
  const std::vector<RDR>* rules_;
  // (relation, attribute) -> (rule index, member index; -1 = head)
  std::map<std::pair<std::size_t, std::size_t>, std::vector<std::pair<std::size_t, int>>> by_attr_;
  std::map<CellRef, std::vector<InstantiatedRDR>> head_cache_, tail_cache_;
  std::set<CellRef> cells_;
  std::set<InstantiatedRDR> rules_seen_;
  std::size_t evaluations_ = 0;
};

struct InstantiationStats {
  std::size_t instantiated_cells = 0;  // distinct cells in every evaluated instantiation
  std::size_t instantiated_rules = 0;  // distinct instantiations evaluated
  std::size_t kept_rules = 0;
};

struct InstantiationResult {
  CellRef target;
  Timestamp t_b = 0;
  std::set<CellRef> visited;
  std::vector<InstantiatedRDR> rules;     // violating, sorted
  std::vector<InstantiatedRDR> expanded;  // everything evaluated, sorted
  InstantiationStats stats;
};

/// Breadth-first instantiation from the target. The target expands rules in which it is
/// head or tail; every other cell expands the rules it heads. Tails of every reached
/// instantiation are enqueued, so `expanded` is the dependency set and `rules` keeps
/// its violating members. t_b defaults to kappa(target).
InstantiationResult dep_inst(RuleExpander& expander, const CellRef& target,
                             std::optional<Timestamp> t_b = std::nullopt);
InstantiationResult dep_inst(const StateView& state, const std::vector<RDR>& rules, const CellRef& target,
                             std::optional<Timestamp> t_b = std::nullopt);

using DependencySet = std::vector<InstantiatedRDR>;

/// Brute force: instantiate every rule on the whole state, seed with the instantiations
/// containing the target, close under tail(d) ∩ head(d') ≠ ∅. Sorted.
DependencySet dep_set_oracle(const CellRef& target, const StateView& state, const std::vector<RDR>& rules);

/// dep(target | post + {target <- value}) ⊆ dep(target | pre), compared structurally.
/// Throws if the target is not NULL in `post`.
bool p2e2_holds(const CellRef& target, const Value& value, const StateView& pre, const StateView& post,
                const std::vector<RDR>& rules);

/// Convenience form over a store: pre = state_at(t_b), post = current state, value = the
/// one held just before the target's latest erase.
bool p2e2_holds(const Store& store, const CellRef& target, Timestamp t_b, const std::vector<RDR>& rules);

}  // namespace erasure
