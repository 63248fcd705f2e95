#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "erasure/instantiate.hpp"

namespace erasure {

enum class CostModel { Uniform, Weighted };

using CostFn = std::function<double(const CellRef&)>;

CostFn uniform_cost();
/// Per-attribute costs from the schema.
CostFn schema_cost(const Schema& schema);
CostFn cost_function(const Schema& schema, CostModel model);

struct Hyperedge {
  std::string rule_id;
  int head = -1;
  std::vector<int> tail;  // sorted, distinct
};

/// Cells as vertices, one hyperedge per instantiated rule. A set T of cells is feasible
/// when it holds the target and every fixed cell, and every edge whose head is in T has
/// a tail cell in T.
struct DependenceHypergraph {
  std::vector<CellRef> cells;  // sorted
  std::vector<double> cost;
  std::vector<Hyperedge> edges;
  int target = -1;
  std::vector<int> fixed;  // other cells that must be deleted (batched targets)
  bool acyclic = false;
  std::vector<std::string> discarded;  // rules dropped by break_tail_cycles

  int index_of(const CellRef& c) const;  // -1 if absent
  std::vector<int> roots() const;        // in no tail
  std::vector<int> leaves() const;       // head of no edge
  bool has_cycle() const;
  std::vector<std::vector<int>> head_edges() const;  // per vertex, edges it heads
  nlohmann::json to_json() const;
};

/// Edges exactly as the rules state them.
DependenceHypergraph hypergraph_from(const std::vector<InstantiatedRDR>& rules, const CellRef& target,
                                     const CostFn& cost = uniform_cost());

/// Violating rules of a dep_inst result, oriented for deletion: a rule containing the
/// target, or whose head is reachable from the target through non-violating rules, becomes
/// target <- (other cells); the rest keep their own head and tail.
DependenceHypergraph oriented_hypergraph(const InstantiationResult& res, const CostFn& cost = uniform_cost());

/// Orientation for the insertion-time-unaware baselines: every expanded rule, with rules
/// that contain the target turned into target <- (other cells).
DependenceHypergraph baseline_hypergraph(const InstantiationResult& res, const CostFn& cost = uniform_cost());

bool is_feasible(const DependenceHypergraph& h, const std::vector<int>& chosen);

struct SolverStats {
  std::uint64_t nodes = 0;
  double micros = 0;
  bool refused = false;
  std::string note;
};

struct DeletionSet {
  std::vector<CellRef> cells;  // sorted, includes the target
  double cost = 0;
  std::string algorithm;
  SolverStats stats;

  bool contains(const CellRef& c) const;
};

DeletionSet make_deletion_set(const DependenceHypergraph& h, std::vector<int> chosen, std::string algorithm);

// ---------------------------------------------------------------------------
// Induced bipartite graph and ILP

struct InducedBipartiteGraph {
  std::vector<std::string> left;  // rule ids, one per edge
  std::vector<CellRef> right;     // cells
  std::vector<double> right_cost;
  std::vector<std::pair<int, int>> head_edges;  // (left, right)
  std::vector<std::pair<int, int>> tail_edges;  // (left, right)
  int target = -1;                              // right index
  std::vector<int> fixed;
};

InducedBipartiteGraph build_bipartite(const DependenceHypergraph& h);
InducedBipartiteGraph build_bipartite(const std::vector<InstantiatedRDR>& rules, const CellRef& target);

struct IlpInstance {
  enum class VarKind { Cell, Rule, HeadEdge, TailEdge };
  struct Var {
    VarKind kind;
    int left = -1;   // rule, if any
    int right = -1;  // cell, if any
    double objective = 0;
  };
  struct Equal {
    int x, y;
  };
  struct Cover {
    std::vector<int> terms;  // sum(terms) >= rhs
    int rhs;
  };
  std::vector<Var> vars;
  std::vector<int> fixed_one;
  std::vector<Equal> equalities;
  std::vector<Cover> covers;
  std::vector<int> cell_var;  // right index -> a_j
  std::vector<CellRef> cells;
};

IlpInstance encode_ilp(const InducedBipartiteGraph& g, CostModel model = CostModel::Uniform);

struct SolverOptions {
  std::size_t max_variables = 200000;
  std::uint64_t node_limit = 5'000'000;
};

/// Exact 0/1 branch and bound. Refuses (stats.refused) past the size guard or node limit.
DeletionSet solve_ilp(const IlpInstance& inst, const SolverOptions& opts = {});
DeletionSet ilp(const DependenceHypergraph& h, CostModel model = CostModel::Weighted, const SolverOptions& opts = {});

// ---------------------------------------------------------------------------
// Hypergraph traversal

/// Drops, for every pair of edges with overlapping tails, the one with the larger tail
/// (equal sizes: the later rule id). Sets `acyclic`.
DependenceHypergraph break_tail_cycles(DependenceHypergraph h);

/// Bottom-up cost, top-down extraction. Throws on a cycle reachable from the target.
DeletionSet opt_path(const DependenceHypergraph& h);

/// Adds the cheapest tail cell of every edge whose head is chosen and which has no chosen
/// tail cell, until feasible.
std::vector<int> repair(const DependenceHypergraph& h, std::vector<int> chosen);

/// break_tail_cycles, then opt_path (dropping residual back edges), then repair on the
/// full graph.
DeletionSet hgr(const DependenceHypergraph& h);

// ---------------------------------------------------------------------------
// Greedy

/// Top-down: for every unresolved edge of a chosen cell pick the tail cell with the lowest
/// own cost (ties: lower one-level follow-up cost, then cell order).
DeletionSet greedy(const DependenceHypergraph& h);

/// Same selection, interleaved with instantiation so only chosen cells are expanded beyond
/// the non-violating region around the target.
DeletionSet greedy_apx(RuleExpander& expander, const CellRef& target, const CostFn& cost = uniform_cost(),
                       std::optional<Timestamp> t_b = std::nullopt);

struct BoundParameters {
  std::size_t n = 0, r = 0, a = 0, d = 0;
};
BoundParameters bound_parameters(const DependenceHypergraph& h);
double approx_bound(std::size_t n, std::size_t r, std::size_t a, std::size_t d);

// ---------------------------------------------------------------------------
// Baselines and exhaustive search

enum class BaselineKind { Inst, OpR, MinSet };
std::string_view to_string(BaselineKind k);

/// `h` should come from baseline_hypergraph.
DeletionSet baseline(BaselineKind kind, const DependenceHypergraph& h, const SolverOptions& opts = {});

/// Minimum-cost feasible set by enumerating every way of resolving each forced edge with
/// one of its tail cells. Ties: lexicographically smallest cell list.
DeletionSet exhaustive(const DependenceHypergraph& h);

/// Minimum-cost feasible set over all subsets of the non-root cells; throws above
/// `max_free` such cells.
DeletionSet exhaustive_subsets(const DependenceHypergraph& h, std::size_t max_free = 22);

}  // namespace erasure
