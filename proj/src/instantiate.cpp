#include "erasure/instantiate.hpp"

#include <algorithm>
#include <deque>

namespace erasure {

bool violates_p2e2(const InstantiatedRDR& delta, Timestamp t_b) {
  return delta.member_kappa > t_b || delta.witness > t_b;
}

RuleExpander::RuleExpander(StateView state, const std::vector<RDR>& rules) : state_(std::move(state)), rules_(&rules) {
  for (std::size_t r = 0; r < rules.size(); ++r) {
    by_attr_[{rules[r].head_member.relation, rules[r].head_member.attribute}].emplace_back(r, -1);
    for (std::size_t k = 0; k < rules[r].tail_members.size(); ++k)
      by_attr_[{rules[r].tail_members[k].relation, rules[r].tail_members[k].attribute}].emplace_back(r, static_cast<int>(k));
  }
}

std::vector<InstantiatedRDR> RuleExpander::expand(const CellRef& c, bool head_role) {
  std::vector<InstantiatedRDR> out;
  const Schema& schema = state_.schema();
  auto rel = schema.find_relation(c.relation);
  if (!rel) return out;
  auto attr = schema.relation(*rel).find_attribute(c.attribute);
  if (!attr) return out;
  auto it = by_attr_.find({*rel, *attr});
  if (it == by_attr_.end()) return out;
  for (auto [r, member] : it->second) {
    if (head_role != (member < 0)) continue;
    const RDR& rule = (*rules_)[r];
    const RuleMember& m = member < 0 ? rule.head_member : rule.tail_members[member];
    ++evaluations_;
    for (const auto& b : eval_condition(rule, state_, query::Pin{m.variable, c.rid})) {
      auto d = instantiate_rule(rule, b, state_);
      if (!d) continue;
      if (head_role ? d->head != c : !std::binary_search(d->tail.begin(), d->tail.end(), c)) continue;
      out.push_back(std::move(*d));
    }
  }
  std::sort(out.begin(), out.end());
  std::vector<InstantiatedRDR> uniq;
  for (auto& d : out) {
    if (!uniq.empty() && uniq.back() == d) {
      uniq.back().witness = std::min(uniq.back().witness, d.witness);
      continue;
    }
    uniq.push_back(std::move(d));
  }
  for (const auto& d : uniq) {
    rules_seen_.insert(d);
    cells_.insert(d.head);
    cells_.insert(d.tail.begin(), d.tail.end());
  }
  return uniq;
}

const std::vector<InstantiatedRDR>& RuleExpander::as_head(const CellRef& c) {
  auto it = head_cache_.find(c);
  if (it != head_cache_.end()) return it->second;
  return head_cache_.emplace(c, expand(c, true)).first->second;
}

const std::vector<InstantiatedRDR>& RuleExpander::as_tail(const CellRef& c) {
  auto it = tail_cache_.find(c);
  if (it != tail_cache_.end()) return it->second;
  return tail_cache_.emplace(c, expand(c, false)).first->second;
}

InstantiationResult dep_inst(RuleExpander& expander, const CellRef& target, std::optional<Timestamp> t_b) {
  InstantiationResult res;
  res.target = target;
  const CellState* cs = expander.state().cell(target);
  if (!cs || cs->value.is_null()) throw Error("dep_inst: target " + target.to_string() + " is NULL");
  res.t_b = t_b ? *t_b : cs->kappa;
  const std::size_t cells_before = expander.instantiated_cells();
  const std::size_t rules_before = expander.instantiated_rules();

  std::set<InstantiatedRDR> seen;
  std::deque<CellRef> queue{target};
  res.visited.insert(target);
  auto visit = [&](const InstantiatedRDR& d) {
    if (!seen.insert(d).second) return;
    for (const auto& t : d.tail)
      if (res.visited.insert(t).second) queue.push_back(t);
  };
  while (!queue.empty()) {
    CellRef c = queue.front();
    queue.pop_front();
    for (const auto& d : expander.as_head(c)) visit(d);
    if (c == target)
      for (const auto& d : expander.as_tail(c)) visit(d);
  }
  for (const auto& d : seen) {
    res.expanded.push_back(d);
    if (violates_p2e2(d, res.t_b)) res.rules.push_back(d);
  }
  res.stats.instantiated_cells = expander.instantiated_cells() - cells_before;
  res.stats.instantiated_rules = expander.instantiated_rules() - rules_before;
  res.stats.kept_rules = res.rules.size();
  return res;
}

InstantiationResult dep_inst(const StateView& state, const std::vector<RDR>& rules, const CellRef& target,
                             std::optional<Timestamp> t_b) {
  RuleExpander ex(state, rules);
  return dep_inst(ex, target, t_b);
}

DependencySet dep_set_oracle(const CellRef& target, const StateView& state, const std::vector<RDR>& rules) {
  std::vector<InstantiatedRDR> all;
  for (const auto& r : rules) {
    auto inst = instantiate_all(r, state);
    all.insert(all.end(), inst.begin(), inst.end());
  }
  std::vector<bool> in(all.size(), false);
  std::set<CellRef> reach;  // tails of members so far
  bool grew = true;
  for (std::size_t i = 0; i < all.size(); ++i)
    if (all[i].contains(target)) in[i] = true;
  while (grew) {
    grew = false;
    reach.clear();
    for (std::size_t i = 0; i < all.size(); ++i)
      if (in[i]) reach.insert(all[i].tail.begin(), all[i].tail.end());
    for (std::size_t i = 0; i < all.size(); ++i)
      if (!in[i] && reach.count(all[i].head)) in[i] = grew = true;
  }
  DependencySet out;
  for (std::size_t i = 0; i < all.size(); ++i)
    if (in[i]) out.push_back(all[i]);
  std::sort(out.begin(), out.end());
  return out;
}

bool p2e2_holds(const CellRef& target, const Value& value, const StateView& pre, const StateView& post,
                const std::vector<RDR>& rules) {
  if (!post.value_of(target).is_null()) throw Error("p2e2_holds: target " + target.to_string() + " is not NULL");
  std::pair<CellRef, Value> restore{target, value};
  StateView restored = post.with_values(std::span(&restore, 1));
  DependencySet after = dep_set_oracle(target, restored, rules);
  DependencySet before = dep_set_oracle(target, pre, rules);
  return std::includes(before.begin(), before.end(), after.begin(), after.end());
}

bool p2e2_holds(const Store& store, const CellRef& target, Timestamp t_b, const std::vector<RDR>& rules) {
  StateView post = store.current();
  auto value = store.value_before_erase(target, post.time());
  if (!value) throw Error("p2e2_holds: target " + target.to_string() + " was never erased");
  return p2e2_holds(target, *value, store.state_at(t_b), post, rules);
}

}  // namespace erasure
