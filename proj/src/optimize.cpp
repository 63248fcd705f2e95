#include "erasure/optimize.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <set>

namespace erasure {

CostFn uniform_cost() {
  return [](const CellRef&) { return 1.0; };
}

CostFn schema_cost(const Schema& schema) {
  return [&schema](const CellRef& c) {
    auto rel = schema.find_relation(c.relation);
    if (!rel) return 1.0;
    auto attr = schema.relation(*rel).find_attribute(c.attribute);
    return attr ? schema.attribute(*rel, *attr).cost : 1.0;
  };
}

CostFn cost_function(const Schema& schema, CostModel model) {
  return model == CostModel::Uniform ? uniform_cost() : schema_cost(schema);
}

// ---------------------------------------------------------------------------
// Hypergraph

int DependenceHypergraph::index_of(const CellRef& c) const {
  auto it = std::lower_bound(cells.begin(), cells.end(), c);
  return it != cells.end() && *it == c ? static_cast<int>(it - cells.begin()) : -1;
}

std::vector<std::vector<int>> DependenceHypergraph::head_edges() const {
  std::vector<std::vector<int>> out(cells.size());
  for (std::size_t e = 0; e < edges.size(); ++e) out[edges[e].head].push_back(static_cast<int>(e));
  return out;
}

std::vector<int> DependenceHypergraph::roots() const {
  std::vector<bool> in_tail(cells.size(), false);
  for (const auto& e : edges)
    for (int t : e.tail) in_tail[t] = true;
  std::vector<int> out;
  for (std::size_t v = 0; v < cells.size(); ++v)
    if (!in_tail[v]) out.push_back(static_cast<int>(v));
  return out;
}

std::vector<int> DependenceHypergraph::leaves() const {
  std::vector<bool> heads(cells.size(), false);
  for (const auto& e : edges) heads[e.head] = true;
  std::vector<int> out;
  for (std::size_t v = 0; v < cells.size(); ++v)
    if (!heads[v]) out.push_back(static_cast<int>(v));
  return out;
}

namespace {

// Directed graph head -> tail cells. Returns the edges that close a cycle in a DFS that
// starts from `starts` then every remaining vertex, in index order.
std::vector<int> back_edges(const DependenceHypergraph& h, const std::vector<int>& starts) {
  auto he = h.head_edges();
  std::vector<int> color(h.cells.size(), 0);
  std::set<int> back;
  // Iterative DFS over (vertex, edge cursor, tail cursor).
  struct Frame {
    int v;
    std::size_t e = 0, t = 0;
  };
  auto run = [&](int s) {
    if (color[s]) return;
    std::vector<Frame> stack{{s}};
    color[s] = 1;
    while (!stack.empty()) {
      Frame& f = stack.back();
      if (f.e >= he[f.v].size()) {
        color[f.v] = 2;
        stack.pop_back();
        continue;
      }
      const Hyperedge& edge = h.edges[he[f.v][f.e]];
      if (f.t >= edge.tail.size()) {
        ++f.e;
        f.t = 0;
        continue;
      }
      int u = edge.tail[f.t++];
      if (color[u] == 1) {
        back.insert(he[f.v][f.e]);
      } else if (color[u] == 0) {
        color[u] = 1;
        stack.push_back(Frame{u});
      }
    }
  };
  for (int s : starts) run(s);
  for (std::size_t v = 0; v < h.cells.size(); ++v) run(static_cast<int>(v));
  return {back.begin(), back.end()};
}

std::vector<int> roots_of(const DependenceHypergraph& h) {
  std::vector<int> r;
  if (h.target >= 0) r.push_back(h.target);
  for (int f : h.fixed)
    if (f != h.target) r.push_back(f);
  return r;
}

struct GraphBuilder {
  std::set<CellRef> cells;
  struct Pending {
    std::string rule_id;
    CellRef head;
    std::vector<CellRef> tail;
  };
  std::vector<Pending> edges;

  void add(std::string id, const CellRef& head, std::vector<CellRef> tail) {
    std::sort(tail.begin(), tail.end());
    tail.erase(std::unique(tail.begin(), tail.end()), tail.end());
    tail.erase(std::remove(tail.begin(), tail.end(), head), tail.end());
    if (tail.empty()) return;
    cells.insert(head);
    cells.insert(tail.begin(), tail.end());
    edges.push_back(Pending{std::move(id), head, std::move(tail)});
  }

  DependenceHypergraph build(const CellRef& target, const CostFn& cost) {
    cells.insert(target);
    DependenceHypergraph h;
    h.cells.assign(cells.begin(), cells.end());
    for (const auto& c : h.cells) h.cost.push_back(cost(c));
    for (const auto& p : edges) {
      Hyperedge e;
      e.rule_id = p.rule_id;
      e.head = h.index_of(p.head);
      for (const auto& t : p.tail) e.tail.push_back(h.index_of(t));
      h.edges.push_back(std::move(e));
    }
    h.target = h.index_of(target);
    h.acyclic = !h.has_cycle();
    return h;
  }
};

std::vector<CellRef> others(const InstantiatedRDR& d, const CellRef& target) {
  std::vector<CellRef> out;
  for (const auto& c : d.cells())
    if (c != target) out.push_back(c);
  return out;
}

}  // namespace

bool DependenceHypergraph::has_cycle() const { return !back_edges(*this, roots_of(*this)).empty(); }

nlohmann::json DependenceHypergraph::to_json() const {
  nlohmann::json jc = nlohmann::json::array();
  for (std::size_t i = 0; i < cells.size(); ++i) jc.push_back({{"cell", cells[i].to_string()}, {"cost", cost[i]}});
  nlohmann::json je = nlohmann::json::array();
  for (const auto& e : edges) je.push_back({{"rule", e.rule_id}, {"head", e.head}, {"tail", e.tail}});
  return {{"cells", jc}, {"edges", je}, {"target", target}, {"fixed", fixed}, {"acyclic", acyclic},
          {"discarded", discarded}};
}

DependenceHypergraph hypergraph_from(const std::vector<InstantiatedRDR>& rules, const CellRef& target,
                                     const CostFn& cost) {
  GraphBuilder b;
  for (const auto& d : rules) b.add(d.rule_id, d.head, d.tail);
  return b.build(target, cost);
}

DependenceHypergraph oriented_hypergraph(const InstantiationResult& res, const CostFn& cost) {
  // Tails of non-violating rules reachable from the target through non-violating rules.
  std::vector<const InstantiatedRDR*> safe;
  for (const auto& d : res.expanded)
    if (!violates_p2e2(d, res.t_b)) safe.push_back(&d);
  std::set<CellRef> anchor;
  std::vector<bool> in(safe.size(), false);
  for (bool grew = true; grew;) {
    grew = false;
    for (std::size_t i = 0; i < safe.size(); ++i) {
      if (in[i] || !(safe[i]->contains(res.target) || anchor.count(safe[i]->head))) continue;
      in[i] = grew = true;
      anchor.insert(safe[i]->tail.begin(), safe[i]->tail.end());
    }
  }
  GraphBuilder b;
  for (const auto& d : res.rules) {
    if (d.contains(res.target) || anchor.count(d.head))
      b.add(d.rule_id, res.target, others(d, res.target));
    else
      b.add(d.rule_id, d.head, d.tail);
  }
  return b.build(res.target, cost);
}

DependenceHypergraph baseline_hypergraph(const InstantiationResult& res, const CostFn& cost) {
  GraphBuilder b;
  for (const auto& d : res.expanded) {
    if (d.contains(res.target))
      b.add(d.rule_id, res.target, others(d, res.target));
    else
      b.add(d.rule_id, d.head, d.tail);
  }
  return b.build(res.target, cost);
}

bool is_feasible(const DependenceHypergraph& h, const std::vector<int>& chosen) {
  std::vector<bool> in(h.cells.size(), false);
  for (int c : chosen) in[c] = true;
  for (int r : roots_of(h))
    if (!in[r]) return false;
  for (const auto& e : h.edges) {
    if (!in[e.head]) continue;
    if (std::none_of(e.tail.begin(), e.tail.end(), [&](int t) { return in[t]; })) return false;
  }
  return true;
}

bool DeletionSet::contains(const CellRef& c) const { return std::binary_search(cells.begin(), cells.end(), c); }

DeletionSet make_deletion_set(const DependenceHypergraph& h, std::vector<int> chosen, std::string algorithm) {
  std::sort(chosen.begin(), chosen.end());
  chosen.erase(std::unique(chosen.begin(), chosen.end()), chosen.end());
  DeletionSet d;
  d.algorithm = std::move(algorithm);
  for (int c : chosen) {
    d.cells.push_back(h.cells[c]);
    d.cost += h.cost[c];
  }
  return d;
}

namespace {

using Clock = std::chrono::steady_clock;
double micros_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::micro>(Clock::now() - t0).count();
}

// Lowest (cost, index) member of `cands`.
int cheapest(const DependenceHypergraph& h, const std::vector<int>& cands) {
  int best = -1;
  for (int c : cands)
    if (best < 0 || h.cost[c] < h.cost[best] || (h.cost[c] == h.cost[best] && c < best)) best = c;
  return best;
}

}  // namespace

// ---------------------------------------------------------------------------
// Bipartite graph and ILP

InducedBipartiteGraph build_bipartite(const DependenceHypergraph& h) {
  InducedBipartiteGraph g;
  g.right = h.cells;
  g.right_cost = h.cost;
  g.target = h.target;
  g.fixed = h.fixed;
  for (std::size_t i = 0; i < h.edges.size(); ++i) {
    g.left.push_back(h.edges[i].rule_id);
    g.head_edges.emplace_back(static_cast<int>(i), h.edges[i].head);
    for (int t : h.edges[i].tail) g.tail_edges.emplace_back(static_cast<int>(i), t);
  }
  return g;
}

InducedBipartiteGraph build_bipartite(const std::vector<InstantiatedRDR>& rules, const CellRef& target) {
  return build_bipartite(hypergraph_from(rules, target));
}

IlpInstance encode_ilp(const InducedBipartiteGraph& g, CostModel model) {
  using K = IlpInstance::VarKind;
  IlpInstance inst;
  inst.cells = g.right;
  for (std::size_t j = 0; j < g.right.size(); ++j) {
    inst.cell_var.push_back(static_cast<int>(inst.vars.size()));
    inst.vars.push_back({K::Cell, -1, static_cast<int>(j), model == CostModel::Weighted ? g.right_cost[j] : 1.0});
  }
  std::vector<int> rule_var;
  for (std::size_t i = 0; i < g.left.size(); ++i) {
    rule_var.push_back(static_cast<int>(inst.vars.size()));
    inst.vars.push_back({K::Rule, static_cast<int>(i), -1, 0});
  }
  // (1) the target is erased
  inst.fixed_one.push_back(inst.cell_var.at(g.target));
  for (int f : g.fixed) inst.fixed_one.push_back(inst.cell_var.at(f));
  for (auto [i, j] : g.head_edges) {
    int hv = static_cast<int>(inst.vars.size());
    inst.vars.push_back({K::HeadEdge, i, j, 0});
    inst.equalities.push_back({inst.cell_var[j], hv});  // (2) a_j = h_i^j
    inst.equalities.push_back({rule_var[i], hv});       // (3) b_i = h_i^j
  }
  std::vector<std::vector<int>> tails(g.left.size());
  for (auto [i, j] : g.tail_edges) {
    int tv = static_cast<int>(inst.vars.size());
    inst.vars.push_back({K::TailEdge, i, j, 0});
    inst.equalities.push_back({inst.cell_var[j], tv});  // (5) a_j = t_i^j
    tails[i].push_back(tv);
  }
  for (std::size_t i = 0; i < g.left.size(); ++i) inst.covers.push_back({tails[i], rule_var[i]});  // (4)
  return inst;
}

namespace {

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

/// min sum(cost * x) s.t. sum_{k in S_r} x_k >= x_{y_r}, x_f = 1 for fixed f.
class CoverSearch {
 public:
  struct Row {
    std::vector<int> set;
    int y;
  };

  CoverSearch(std::vector<double> cost, std::vector<Row> rows, std::uint64_t node_limit)
      : cost_(std::move(cost)), rows_(std::move(rows)), limit_(node_limit), touch_(cost_.size()) {
    for (std::size_t r = 0; r < rows_.size(); ++r) {
      touch_[rows_[r].y].push_back(static_cast<int>(r));
      for (int k : rows_[r].set) touch_[k].push_back(static_cast<int>(r));
    }
  }

  bool solve(const std::vector<int>& fixed) {
    std::vector<std::int8_t> x(cost_.size(), -1);
    for (int f : fixed) x[f] = 1;
    dfs(std::move(x));
    return !aborted_ && found_;
  }

  const std::vector<std::int8_t>& best() const { return best_x_; }
  std::uint64_t nodes() const { return nodes_; }
  bool aborted() const { return aborted_; }

 private:
  bool propagate(std::vector<std::int8_t>& x) {
    std::vector<int> work(rows_.size());
    std::iota(work.begin(), work.end(), 0);
    std::vector<bool> queued(rows_.size(), true);
    auto set = [&](int k, std::int8_t v) {
      x[k] = v;
      for (int r : touch_[k])
        if (!queued[r]) {
          queued[r] = true;
          work.push_back(r);
        }
    };
    while (!work.empty()) {
      int r = work.back();
      work.pop_back();
      queued[r] = false;
      const Row& row = rows_[r];
      int unknown = -1, unknowns = 0;
      bool hit = false;
      for (int k : row.set) {
        if (x[k] == 1) {
          hit = true;
          break;
        }
        if (x[k] < 0) {
          unknown = k;
          ++unknowns;
        }
      }
      if (hit) continue;
      if (unknowns == 0) {
        if (x[row.y] == 1) return false;
        if (x[row.y] < 0) set(row.y, 0);
      } else if (unknowns == 1 && x[row.y] == 1) {
        set(unknown, 1);
      }
    }
    return true;
  }

  void dfs(std::vector<std::int8_t> x) {
    if (aborted_) return;
    if (++nodes_ > limit_) {
      aborted_ = true;
      return;
    }
    if (!propagate(x)) return;
    double cur = 0;
    for (std::size_t k = 0; k < x.size(); ++k)
      if (x[k] == 1) cur += cost_[k];
    // Open rows: head erased, nothing in the set erased yet.
    std::vector<int> open;
    for (std::size_t r = 0; r < rows_.size(); ++r) {
      if (x[rows_[r].y] != 1) continue;
      if (std::any_of(rows_[r].set.begin(), rows_[r].set.end(), [&](int k) { return x[k] == 1; })) continue;
      open.push_back(static_cast<int>(r));
    }
    double lb = cur;
    std::vector<bool> used(x.size(), false);
    for (int r : open) {
      double m = std::numeric_limits<double>::infinity();
      bool disjoint = true;
      for (int k : rows_[r].set)
        if (x[k] < 0) {
          if (used[k]) disjoint = false;
          m = std::min(m, cost_[k]);
        }
      if (!disjoint) continue;
      for (int k : rows_[r].set)
        if (x[k] < 0) used[k] = true;
      lb += m;
    }
    if (found_ && lb >= best_cost_ - 1e-9) return;
    if (open.empty()) {
      found_ = true;
      best_cost_ = cur;
      best_x_ = x;
      for (auto& v : best_x_)
        if (v < 0) v = 0;
      return;
    }
    int pick = open.front();
    std::size_t fewest = std::numeric_limits<std::size_t>::max();
    for (int r : open) {
      std::size_t n = std::count_if(rows_[r].set.begin(), rows_[r].set.end(), [&](int k) { return x[k] < 0; });
      if (n < fewest) {
        fewest = n;
        pick = r;
      }
    }
    std::vector<int> cands;
    for (int k : rows_[pick].set)
      if (x[k] < 0) cands.push_back(k);
    std::sort(cands.begin(), cands.end(), [&](int a, int b) {
      return cost_[a] != cost_[b] ? cost_[a] < cost_[b] : a < b;
    });
    for (std::size_t i = 0; i < cands.size(); ++i) {
      std::vector<std::int8_t> y = x;
      for (std::size_t j = 0; j < i; ++j) y[cands[j]] = 0;
      y[cands[i]] = 1;
      dfs(std::move(y));
      if (aborted_) return;
    }
  }

  std::vector<double> cost_;
  std::vector<Row> rows_;
  std::uint64_t limit_;
  std::vector<std::vector<int>> touch_;
  std::uint64_t nodes_ = 0;
  bool aborted_ = false;
  bool found_ = false;
  double best_cost_ = 0;
  std::vector<std::int8_t> best_x_;
};

}  // namespace

DeletionSet solve_ilp(const IlpInstance& inst, const SolverOptions& opts) {
  auto t0 = Clock::now();
  DeletionSet out;
  out.algorithm = "ilp";
  if (inst.vars.size() > opts.max_variables) {
    out.stats.refused = true;
    out.stats.note = "size guard: " + std::to_string(inst.vars.size()) + " variables";
    return out;
  }
  // Presolve: merge variables tied by equalities.
  UnionFind uf(inst.vars.size());
  for (const auto& e : inst.equalities) uf.unite(e.x, e.y);
  std::map<int, int> cls;
  std::vector<int> cls_of(inst.vars.size());
  for (std::size_t v = 0; v < inst.vars.size(); ++v) {
    int root = uf.find(static_cast<int>(v));
    auto it = cls.emplace(root, static_cast<int>(cls.size())).first;
    cls_of[v] = it->second;
  }
  std::vector<double> cost(cls.size(), 0.0);
  for (std::size_t v = 0; v < inst.vars.size(); ++v) cost[cls_of[v]] += inst.vars[v].objective;
  std::vector<CoverSearch::Row> rows;
  for (const auto& c : inst.covers) {
    CoverSearch::Row r;
    r.y = cls_of[c.rhs];
    for (int t : c.terms) r.set.push_back(cls_of[t]);
    std::sort(r.set.begin(), r.set.end());
    r.set.erase(std::unique(r.set.begin(), r.set.end()), r.set.end());
    if (std::binary_search(r.set.begin(), r.set.end(), r.y)) continue;
    rows.push_back(std::move(r));
  }
  std::vector<int> fixed;
  for (int f : inst.fixed_one) fixed.push_back(cls_of[f]);

  CoverSearch search(cost, std::move(rows), opts.node_limit);
  bool ok = search.solve(fixed);
  out.stats.nodes = search.nodes();
  if (!ok) {
    out.stats.refused = true;
    out.stats.note = search.aborted() ? "node limit reached" : "infeasible";
    out.stats.micros = micros_since(t0);
    return out;
  }
  for (std::size_t j = 0; j < inst.cell_var.size(); ++j) {
    int v = inst.cell_var[j];
    if (search.best()[cls_of[v]] == 1) {
      out.cells.push_back(inst.cells[j]);
      out.cost += inst.vars[v].objective;
    }
  }
  out.stats.micros = micros_since(t0);
  return out;
}

DeletionSet ilp(const DependenceHypergraph& h, CostModel model, const SolverOptions& opts) {
  DeletionSet raw = solve_ilp(encode_ilp(build_bipartite(h), model), opts);
  if (raw.stats.refused) return raw;
  std::vector<int> chosen;
  for (const auto& c : raw.cells) chosen.push_back(h.index_of(c));
  DeletionSet out = make_deletion_set(h, std::move(chosen), "ilp");
  out.stats = raw.stats;
  return out;
}

// ---------------------------------------------------------------------------
// Hypergraph traversal

DependenceHypergraph break_tail_cycles(DependenceHypergraph h) {
  std::vector<bool> drop(h.edges.size(), false);
  for (std::size_t i = 0; i < h.edges.size(); ++i) {
    for (std::size_t j = i + 1; j < h.edges.size() && !drop[i]; ++j) {
      if (drop[j]) continue;
      const auto& a = h.edges[i].tail;
      const auto& b = h.edges[j].tail;
      std::vector<int> common;
      std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(common));
      if (common.empty()) continue;
      std::size_t loser;
      if (a.size() != b.size()) loser = a.size() > b.size() ? i : j;
      else loser = h.edges[j].rule_id < h.edges[i].rule_id ? i : j;
      drop[loser] = true;
    }
  }
  std::vector<Hyperedge> kept;
  for (std::size_t i = 0; i < h.edges.size(); ++i) {
    if (drop[i]) h.discarded.push_back(h.edges[i].rule_id + ":" + h.cells[h.edges[i].head].to_string());
    else kept.push_back(std::move(h.edges[i]));
  }
  h.edges = std::move(kept);
  h.acyclic = !h.has_cycle();
  return h;
}

DeletionSet opt_path(const DependenceHypergraph& h) {
  auto t0 = Clock::now();
  auto he = h.head_edges();
  const std::size_t n = h.cells.size();
  // Bottom-up: post-order over the part reachable from the roots.
  std::vector<int> color(n, 0);
  std::vector<double> cost(n, 0);
  std::vector<int> order;
  for (int s : roots_of(h)) {
    if (color[s]) continue;
    std::vector<std::pair<int, std::size_t>> stack{{s, 0}};
    color[s] = 1;
    while (!stack.empty()) {
      auto& [v, k] = stack.back();
      // flatten successors as (edge, tail) pairs
      std::size_t idx = k;
      int next = -1;
      for (std::size_t e = 0, seen = 0; e < he[v].size() && next < 0; ++e) {
        const auto& tail = h.edges[he[v][e]].tail;
        if (idx < seen + tail.size()) {
          next = tail[idx - seen];
        } else {
          seen += tail.size();
        }
      }
      if (next < 0) {
        color[v] = 2;
        order.push_back(v);
        stack.pop_back();
        continue;
      }
      ++k;
      if (color[next] == 1)
        throw Error("opt_path: cycle through " + h.cells[next].to_string() + "; break cycles first");
      if (color[next] == 0) {
        color[next] = 1;
        stack.emplace_back(next, 0);
      }
    }
  }
  for (int v : order) {
    cost[v] = h.cost[v];
    for (int e : he[v]) {
      double m = std::numeric_limits<double>::infinity();
      for (int t : h.edges[e].tail) m = std::min(m, cost[t]);
      cost[v] += m;
    }
  }
  // Top-down extraction.
  std::vector<int> chosen = roots_of(h);
  std::vector<bool> seen(n, false);
  std::vector<int> queue = chosen;
  for (std::size_t qi = 0; qi < queue.size(); ++qi) {
    int v = queue[qi];
    if (seen[v]) continue;
    seen[v] = true;
    for (int e : he[v]) {
      int child = -1;
      for (int t : h.edges[e].tail)
        if (child < 0 || cost[t] < cost[child] || (cost[t] == cost[child] && t < child)) child = t;
      chosen.push_back(child);
      queue.push_back(child);
    }
  }
  DeletionSet out = make_deletion_set(h, std::move(chosen), "hgr");
  out.stats.micros = micros_since(t0);
  return out;
}

std::vector<int> repair(const DependenceHypergraph& h, std::vector<int> chosen) {
  std::vector<bool> in(h.cells.size(), false);
  for (int c : roots_of(h)) chosen.push_back(c);
  for (int c : chosen) in[c] = true;
  for (bool changed = true; changed;) {
    changed = false;
    for (const auto& e : h.edges) {
      if (!in[e.head]) continue;
      if (std::any_of(e.tail.begin(), e.tail.end(), [&](int t) { return in[t]; })) continue;
      int c = cheapest(h, e.tail);
      in[c] = true;
      chosen.push_back(c);
      changed = true;
    }
  }
  std::sort(chosen.begin(), chosen.end());
  chosen.erase(std::unique(chosen.begin(), chosen.end()), chosen.end());
  return chosen;
}

DeletionSet hgr(const DependenceHypergraph& h) {
  auto t0 = Clock::now();
  DependenceHypergraph b = break_tail_cycles(h);
  std::string note;
  if (!b.acyclic) {
    auto back = back_edges(b, roots_of(b));
    std::vector<Hyperedge> kept;
    for (std::size_t i = 0; i < b.edges.size(); ++i)
      if (!std::binary_search(back.begin(), back.end(), static_cast<int>(i))) kept.push_back(b.edges[i]);
    b.edges = std::move(kept);
    note = "residual cycles: " + std::to_string(back.size()) + " edges dropped before traversal";
  }
  DeletionSet path = opt_path(b);
  std::vector<int> chosen;
  for (const auto& c : path.cells) chosen.push_back(h.index_of(c));
  DeletionSet out = make_deletion_set(h, repair(h, std::move(chosen)), "hgr");
  out.stats.note = note;
  if (!b.discarded.empty()) {
    if (!out.stats.note.empty()) out.stats.note += "; ";
    out.stats.note += std::to_string(b.discarded.size()) + " rules discarded for overlapping tails";
  }
  out.stats.micros = micros_since(t0);
  return out;
}

// ---------------------------------------------------------------------------
// Greedy

namespace {

// One-level follow-up: cheapest tail of every edge headed by `u` that is still open
// once u is erased.
double follow_up(const DependenceHypergraph& h, const std::vector<std::vector<int>>& he,
                 const std::vector<bool>& in, int u) {
  double s = 0;
  for (int e : he[u]) {
    const auto& tail = h.edges[e].tail;
    if (std::any_of(tail.begin(), tail.end(), [&](int t) { return in[t] || t == u; })) continue;
    s += h.cost[cheapest(h, tail)];
  }
  return s;
}

}  // namespace

DeletionSet greedy(const DependenceHypergraph& h) {
  auto t0 = Clock::now();
  auto he = h.head_edges();
  std::vector<bool> in(h.cells.size(), false);
  std::vector<int> queue = roots_of(h);
  for (int c : queue) in[c] = true;
  for (std::size_t qi = 0; qi < queue.size(); ++qi) {
    int v = queue[qi];
    for (int e : he[v]) {
      const auto& tail = h.edges[e].tail;
      if (std::any_of(tail.begin(), tail.end(), [&](int t) { return in[t]; })) continue;
      int best = -1;
      double best_follow = 0;
      for (int u : tail) {
        if (best >= 0 && h.cost[u] > h.cost[best]) continue;
        double f = follow_up(h, he, in, u);
        if (best < 0 || h.cost[u] < h.cost[best] || f < best_follow || (f == best_follow && u < best)) {
          best = u;
          best_follow = f;
        }
      }
      in[best] = true;
      queue.push_back(best);
    }
  }
  std::vector<int> chosen;
  for (std::size_t v = 0; v < in.size(); ++v)
    if (in[v]) chosen.push_back(static_cast<int>(v));
  DeletionSet out = make_deletion_set(h, std::move(chosen), "apx");
  out.stats.micros = micros_since(t0);
  return out;
}

DeletionSet greedy_apx(RuleExpander& expander, const CellRef& target, const CostFn& cost, std::optional<Timestamp> t_b) {
  auto t0 = Clock::now();
  const CellState* cs = expander.state().cell(target);
  if (!cs || cs->value.is_null()) throw Error("greedy_apx: target " + target.to_string() + " is NULL");
  const Timestamp tb = t_b ? *t_b : cs->kappa;

  // Non-violating region around the target; violating rules met there resolve at the target.
  std::set<InstantiatedRDR> seen;
  std::vector<InstantiatedRDR> star;
  std::set<CellRef> safe{target};
  std::vector<CellRef> queue{target};
  for (std::size_t qi = 0; qi < queue.size(); ++qi) {
    CellRef c = queue[qi];
    auto visit = [&](const InstantiatedRDR& d) {
      if (!seen.insert(d).second) return;
      if (violates_p2e2(d, tb)) {
        star.push_back(d);
        return;
      }
      for (const auto& t : d.tail)
        if (safe.insert(t).second) queue.push_back(t);
    };
    for (const auto& d : expander.as_head(c)) visit(d);
    if (c == target)
      for (const auto& d : expander.as_tail(c)) visit(d);
  }

  std::set<CellRef> chosen{target};
  auto hit = [&](const std::vector<CellRef>& cells) {
    return std::any_of(cells.begin(), cells.end(), [&](const CellRef& c) { return chosen.count(c) > 0; });
  };
  auto open_rules = [&](const CellRef& u) {
    std::vector<InstantiatedRDR> out;
    for (const auto& d : expander.as_head(u))
      if (violates_p2e2(d, tb) && !d.contains(target) && !seen.count(d)) out.push_back(d);
    return out;
  };
  auto pick = [&](const std::vector<CellRef>& cands) {
    double low = std::numeric_limits<double>::infinity();
    for (const auto& c : cands) low = std::min(low, cost(c));
    std::vector<CellRef> tied;
    for (const auto& c : cands)
      if (cost(c) == low) tied.push_back(c);
    if (tied.size() == 1) return tied.front();
    CellRef best = tied.front();
    double best_follow = std::numeric_limits<double>::infinity();
    for (const auto& u : tied) {
      double f = 0;
      for (const auto& d : open_rules(u)) {
        if (hit(d.tail) || std::binary_search(d.tail.begin(), d.tail.end(), u)) continue;
        double m = std::numeric_limits<double>::infinity();
        for (const auto& t : d.tail) m = std::min(m, cost(t));
        f += m;
      }
      if (f < best_follow) {
        best_follow = f;
        best = u;
      }
    }
    return best;
  };

  std::vector<CellRef> work;
  std::sort(star.begin(), star.end());
  for (const auto& d : star) {
    auto cands = others(d, target);
    if (hit(cands)) continue;
    CellRef u = pick(cands);
    chosen.insert(u);
    work.push_back(u);
  }
  std::set<InstantiatedRDR> done;
  for (std::size_t wi = 0; wi < work.size(); ++wi) {
    for (const auto& d : open_rules(work[wi])) {
      if (!done.insert(d).second || hit(d.tail)) continue;
      CellRef u = pick(d.tail);
      chosen.insert(u);
      work.push_back(u);
    }
  }
  DeletionSet out;
  out.algorithm = "apx";
  out.cells.assign(chosen.begin(), chosen.end());
  for (const auto& c : out.cells) out.cost += cost(c);
  out.stats.micros = micros_since(t0);
  return out;
}

BoundParameters bound_parameters(const DependenceHypergraph& h) {
  BoundParameters p;
  std::vector<std::size_t> degree(h.cells.size(), 0);
  std::set<int> touched;
  for (const auto& e : h.edges) {
    p.a = std::max(p.a, e.tail.size() + 1);
    ++degree[e.head];
    touched.insert(e.head);
    for (int t : e.tail) {
      ++degree[t];
      touched.insert(t);
    }
  }
  if (h.target >= 0) touched.insert(h.target);
  p.n = touched.size();
  p.r = h.edges.size();
  for (auto d : degree) p.d = std::max(p.d, d);
  return p;
}

double approx_bound(std::size_t n, std::size_t r, std::size_t a, std::size_t d) {
  if (a < 2 || n < 2 || r < 1 || d < 1) throw Error("approx_bound: need a >= 2, n >= 2, r >= 1, d >= 1");
  const double N = static_cast<double>(n), R = static_cast<double>(r), A = static_cast<double>(a),
               D = static_cast<double>(d);
  double first = D / R * (1 + std::log2(A * R / D));
  double second = A * D / (N - 1) * (1 + std::log2(A * N));
  return std::min(first, second);
}

// ---------------------------------------------------------------------------
// Baselines

std::string_view to_string(BaselineKind k) {
  switch (k) {
    case BaselineKind::Inst: return "inst";
    case BaselineKind::OpR: return "opr";
    case BaselineKind::MinSet: return "minset";
  }
  return "?";
}

DeletionSet baseline(BaselineKind kind, const DependenceHypergraph& h, const SolverOptions& opts) {
  auto t0 = Clock::now();
  std::vector<int> chosen = roots_of(h);
  std::string tag = "baseline-" + std::string(to_string(kind));
  switch (kind) {
    case BaselineKind::Inst:
      for (const auto& e : h.edges) {
        chosen.push_back(e.head);
        chosen.insert(chosen.end(), e.tail.begin(), e.tail.end());
      }
      break;
    case BaselineKind::OpR:
      for (const auto& e : h.edges) chosen.push_back(cheapest(h, e.tail));
      break;
    case BaselineKind::MinSet: {
      // Every tail must be hit regardless of its head: hang every edge off the target.
      DependenceHypergraph flat = h;
      for (auto& e : flat.edges) e.head = flat.target;
      DeletionSet s = ilp(flat, CostModel::Weighted, opts);
      if (s.stats.refused) {
        s.algorithm = tag;
        return s;
      }
      for (const auto& c : s.cells) chosen.push_back(h.index_of(c));
      DeletionSet out = make_deletion_set(h, std::move(chosen), tag);
      out.stats = s.stats;
      out.stats.micros = micros_since(t0);
      return out;
    }
  }
  DeletionSet out = make_deletion_set(h, std::move(chosen), tag);
  out.stats.micros = micros_since(t0);
  return out;
}

// ---------------------------------------------------------------------------
// Exhaustive search over every choice of one tail cell per edge that must be resolved.

DeletionSet exhaustive(const DependenceHypergraph& h) {
  auto t0 = Clock::now();
  auto he = h.head_edges();
  std::vector<int> best;
  double best_cost = std::numeric_limits<double>::infinity();
  std::uint64_t leaves = 0;
  std::vector<bool> in(h.cells.size(), false);
  std::vector<int> members;
  for (int r : roots_of(h)) {
    if (!in[r]) members.push_back(r);
    in[r] = true;
  }
  auto rec = [&](auto&& self) -> void {
    // First edge with an erased head and no erased tail cell.
    int open = -1;
    for (std::size_t e = 0; e < h.edges.size() && open < 0; ++e) {
      if (!in[h.edges[e].head]) continue;
      const auto& tail = h.edges[e].tail;
      if (std::none_of(tail.begin(), tail.end(), [&](int t) { return in[t]; })) open = static_cast<int>(e);
    }
    if (open < 0) {
      ++leaves;
      std::vector<int> s = members;
      std::sort(s.begin(), s.end());
      double c = 0;
      for (int v : s) c += h.cost[v];
      if (c < best_cost - 1e-9 || (std::abs(c - best_cost) <= 1e-9 && s < best)) {
        best_cost = c;
        best = s;
      }
      return;
    }
    for (int t : h.edges[open].tail) {
      in[t] = true;
      members.push_back(t);
      self(self);
      members.pop_back();
      in[t] = false;
    }
  };
  rec(rec);
  DeletionSet out = make_deletion_set(h, best, "exhaustive");
  out.stats.nodes = leaves;
  out.stats.micros = micros_since(t0);
  return out;
}

DeletionSet exhaustive_subsets(const DependenceHypergraph& h, std::size_t max_free) {
  auto t0 = Clock::now();
  std::vector<int> roots = roots_of(h);
  std::vector<int> free;
  for (std::size_t v = 0; v < h.cells.size(); ++v)
    if (std::find(roots.begin(), roots.end(), static_cast<int>(v)) == roots.end()) free.push_back(static_cast<int>(v));
  if (free.size() > max_free) throw Error("exhaustive_subsets: " + std::to_string(free.size()) + " free cells");
  std::vector<int> best;
  double best_cost = std::numeric_limits<double>::infinity();
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << free.size()); ++mask) {
    std::vector<int> s = roots;
    for (std::size_t i = 0; i < free.size(); ++i)
      if (mask >> i & 1) s.push_back(free[i]);
    std::sort(s.begin(), s.end());
    double c = 0;
    for (int v : s) c += h.cost[v];
    if (c > best_cost + 1e-9) continue;
    if (!is_feasible(h, s)) continue;
    if (c < best_cost - 1e-9 || s < best) {
      best_cost = c;
      best = s;
    }
  }
  DeletionSet out = make_deletion_set(h, best, "exhaustive");
  out.stats.nodes = std::uint64_t{1} << free.size();
  out.stats.micros = micros_since(t0);
  return out;
}

}  // namespace erasure
