#include "erasure/batch.hpp"

#include <algorithm>
#include <chrono>
#include <map>
#include <set>

namespace erasure {

namespace {

using Clock = std::chrono::steady_clock;
double micros_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::micro>(Clock::now() - t0).count();
}

BaselineKind baseline_kind(Algorithm a) {
  switch (a) {
    case Algorithm::BaselineInst: return BaselineKind::Inst;
    case Algorithm::BaselineOpr: return BaselineKind::OpR;
    default: return BaselineKind::MinSet;
  }
}

DependenceHypergraph model_for(const InstantiationResult& res, const BatchOptions& opts) {
  return is_p2e2_algorithm(opts.algorithm) ? oriented_hypergraph(res, opts.cost) : baseline_hypergraph(res, opts.cost);
}

// Union of per-target models; the first target is the root, the others are fixed.
DependenceHypergraph joint_model(const std::vector<DependenceHypergraph>& parts, const std::vector<CellRef>& targets,
                                 const CostFn& cost) {
  std::set<InstantiatedRDR> edges;
  for (const auto& h : parts)
    for (const auto& e : h.edges) {
      InstantiatedRDR d;
      d.rule_id = e.rule_id;
      d.head = h.cells[e.head];
      for (int t : e.tail) d.tail.push_back(h.cells[t]);
      edges.insert(std::move(d));
    }
  std::vector<InstantiatedRDR> list(edges.begin(), edges.end());
  // Fixed targets with no edge still have to be vertices.
  DependenceHypergraph h = hypergraph_from(list, targets.front(), cost);
  for (std::size_t i = 1; i < targets.size(); ++i) {
    if (h.index_of(targets[i]) < 0) {
      auto pos = std::lower_bound(h.cells.begin(), h.cells.end(), targets[i]);
      int at = static_cast<int>(pos - h.cells.begin());
      h.cells.insert(pos, targets[i]);
      h.cost.insert(h.cost.begin() + at, cost(targets[i]));
      for (auto& e : h.edges) {
        if (e.head >= at) ++e.head;
        for (int& t : e.tail)
          if (t >= at) ++t;
      }
    }
  }
  h.target = h.index_of(targets.front());
  for (std::size_t i = 1; i < targets.size(); ++i) h.fixed.push_back(h.index_of(targets[i]));
  h.acyclic = !h.has_cycle();
  return h;
}

std::size_t ilp_variables(const DependenceHypergraph& h) {
  std::size_t n = h.cells.size() + h.edges.size();
  for (const auto& e : h.edges) n += 1 + e.tail.size();
  return n;
}

DeletionSet solve(const DependenceHypergraph& h, const BatchOptions& opts, PhaseTimes& times, std::size_t& size) {
  auto t0 = Clock::now();
  DeletionSet out;
  switch (opts.algorithm) {
    case Algorithm::Ilp: {
      auto inst = encode_ilp(build_bipartite(h), CostModel::Weighted);
      // Encoded costs are the hypergraph costs, already weighted by opts.cost.
      size = inst.vars.size();
      times.model += micros_since(t0);
      auto t1 = Clock::now();
      out = solve_ilp(inst, opts.solver);
      times.optimization += micros_since(t1);
      return out;
    }
    case Algorithm::Hgr: out = hgr(h); break;
    case Algorithm::Apx: out = greedy(h); break;
    default: out = baseline(baseline_kind(opts.algorithm), h, opts.solver); break;
  }
  size = h.cells.size() + h.edges.size();
  if (opts.algorithm == Algorithm::BaselineMinSet) size = std::max(size, ilp_variables(h));
  times.optimization += micros_since(t0);
  return out;
}

DeletionSet project(const DeletionSet& all, const DependenceHypergraph& part) {
  DeletionSet d;
  d.algorithm = all.algorithm;
  d.stats = all.stats;
  for (std::size_t i = 0; i < part.cells.size(); ++i)
    if (all.contains(part.cells[i])) {
      d.cells.push_back(part.cells[i]);
      d.cost += part.cost[i];
    }
  return d;
}

}  // namespace

std::string_view to_string(Algorithm a) {
  switch (a) {
    case Algorithm::Ilp: return "ilp";
    case Algorithm::Hgr: return "hgr";
    case Algorithm::Apx: return "apx";
    case Algorithm::BaselineInst: return "baseline-inst";
    case Algorithm::BaselineOpr: return "baseline-opr";
    case Algorithm::BaselineMinSet: return "baseline-minset";
  }
  return "?";
}

std::optional<Algorithm> parse_algorithm(std::string_view text) {
  for (Algorithm a : {Algorithm::Ilp, Algorithm::Hgr, Algorithm::Apx, Algorithm::BaselineInst, Algorithm::BaselineOpr,
                      Algorithm::BaselineMinSet})
    if (to_string(a) == text) return a;
  return std::nullopt;
}

bool is_p2e2_algorithm(Algorithm a) { return a == Algorithm::Ilp || a == Algorithm::Hgr || a == Algorithm::Apx; }

PhaseTimes& PhaseTimes::operator+=(const PhaseTimes& o) {
  instantiation += o.instantiation;
  model += o.model;
  optimization += o.optimization;
  update += o.update;
  return *this;
}

ErasureRequest make_request(CellRef target, Timestamp request_time, Timestamp grace) {
  if (grace < 0) throw Error("negative grace period");
  return ErasureRequest{std::move(target), request_time, request_time + grace};
}

BatchResult erase_one(const CellRef& target, const StateView& state, const std::vector<RDR>& rules,
                      const BatchOptions& opts, Timestamp request_time) {
  BatchResult out;
  const CellState* cs = state.cell(target);
  if (!cs || cs->value.is_null()) return out;
  TargetOutcome t;
  t.target = target;
  t.request_time = request_time;
  t.t_b = cs->kappa;
  t.value = cs->value;

  RuleExpander ex(state, rules);
  auto t0 = Clock::now();
  if (opts.algorithm == Algorithm::Apx) {
    // Instantiation is interleaved with the greedy choices.
    out.deletion = greedy_apx(ex, target, opts.cost, t.t_b);
    out.times.optimization = micros_since(t0);
    out.model_size = ex.instantiated_cells() + ex.instantiated_rules();
  } else {
    InstantiationResult res = dep_inst(ex, target);
    out.times.instantiation = micros_since(t0);
    auto t1 = Clock::now();
    DependenceHypergraph h = model_for(res, opts);
    out.times.model = micros_since(t1);
    out.deletion = solve(h, opts, out.times, out.model_size);
  }
  t.stats.instantiated_cells = ex.instantiated_cells();
  t.stats.instantiated_rules = ex.instantiated_rules();
  t.deletion = out.deletion;
  out.instantiated_cells = ex.instantiated_cells();
  out.instantiated_rules = ex.instantiated_rules();
  out.targets.push_back(std::move(t));
  return out;
}

BatchResult batch_erase(std::vector<ErasureRequest> requests, const StateView& state, const std::vector<RDR>& rules,
                        const BatchOptions& opts) {
  std::stable_sort(requests.begin(), requests.end(),
                   [](const ErasureRequest& a, const ErasureRequest& b) { return a.request_time < b.request_time; });
  std::vector<ErasureRequest> live;
  std::set<CellRef> seen;
  for (auto& r : requests) {
    if (!seen.insert(r.target).second) continue;
    if (state.value_of(r.target).is_null()) continue;
    live.push_back(std::move(r));
  }
  if (live.empty()) return {};
  if (live.size() == 1) return erase_one(live.front().target, state, rules, opts, live.front().request_time);

  BatchResult out;
  RuleExpander ex(state, rules);
  if (opts.algorithm == Algorithm::Apx) {
    // Lazy greedy per target on the shared expander. Erasing more cells only shrinks
    // dependency sets, so the union keeps every target's guarantee.
    std::map<CellRef, int> uses;
    std::set<CellRef> chosen;
    auto t0 = Clock::now();
    for (const auto& r : live) {
      TargetOutcome t;
      t.target = r.target;
      t.request_time = r.request_time;
      const CellState* cs = state.cell(r.target);
      t.t_b = cs->kappa;
      t.value = cs->value;
      t.marked = chosen.count(r.target) > 0;
      std::size_t cells_before = ex.instantiated_cells(), rules_before = ex.instantiated_rules();
      t.deletion = greedy_apx(ex, r.target, opts.cost, t.t_b);
      t.stats.instantiated_cells = ex.instantiated_cells() - cells_before;
      t.stats.instantiated_rules = ex.instantiated_rules() - rules_before;
      for (const auto& c : t.deletion.cells) {
        ++uses[c];
        chosen.insert(c);
      }
      out.targets.push_back(std::move(t));
    }
    out.times.optimization = micros_since(t0);
    out.deletion.algorithm = "apx";
    for (const auto& c : chosen) {
      out.deletion.cells.push_back(c);
      out.deletion.cost += opts.cost(c);
    }
    for (const auto& [c, n] : uses)
      if (n > 1) ++out.shared_cells;
    out.instantiated_cells = ex.instantiated_cells();
    out.instantiated_rules = ex.instantiated_rules();
    out.model_size = out.instantiated_cells + out.instantiated_rules;
    return out;
  }
  std::vector<DependenceHypergraph> parts;
  std::vector<CellRef> targets;
  std::set<CellRef> reached;
  std::map<CellRef, int> uses;
  for (const auto& r : live) {
    TargetOutcome t;
    t.target = r.target;
    t.request_time = r.request_time;
    const CellState* cs = state.cell(r.target);
    t.t_b = cs->kappa;
    t.value = cs->value;
    t.marked = reached.count(r.target) > 0;
    auto t0 = Clock::now();
    InstantiationResult res = dep_inst(ex, r.target);
    out.times.instantiation += micros_since(t0);
    t.stats = res.stats;
    auto t1 = Clock::now();
    parts.push_back(model_for(res, opts));
    out.times.model += micros_since(t1);
    for (const auto& c : parts.back().cells) ++uses[c];
    for (const auto& d : res.expanded) {
      reached.insert(d.head);
      reached.insert(d.tail.begin(), d.tail.end());
    }
    targets.push_back(r.target);
    out.targets.push_back(std::move(t));
  }
  auto t1 = Clock::now();
  DependenceHypergraph joint = joint_model(parts, targets, opts.cost);
  out.times.model += micros_since(t1);
  out.deletion = solve(joint, opts, out.times, out.model_size);
  for (std::size_t i = 0; i < parts.size(); ++i) out.targets[i].deletion = project(out.deletion, parts[i]);
  for (const auto& [c, n] : uses)
    if (n > 1) ++out.shared_cells;
  out.instantiated_cells = ex.instantiated_cells();
  out.instantiated_rules = ex.instantiated_rules();
  return out;
}

std::size_t apply_deletions(Store& store, const DeletionSet& set, Timestamp t) {
  std::size_t n = 0;
  for (const auto& c : set.cells)
    if (!store.erase_cell(t, c).noop) ++n;
  return n;
}

std::vector<std::vector<ErasureRequest>> make_windows(const std::vector<ErasureRequest>& requests, BatchMode mode,
                                                      Timestamp size) {
  if (size <= 0) throw Error("batch size must be positive");
  std::vector<std::vector<ErasureRequest>> out;
  Timestamp start = 0;
  for (const auto& r : requests) {
    bool open = !out.empty() && (mode == BatchMode::Count ? static_cast<Timestamp>(out.back().size()) < size
                                                          : r.request_time < start + size);
    if (!open) {
      out.emplace_back();
      start = r.request_time;
    }
    out.back().push_back(r);
  }
  return out;
}

}  // namespace erasure
