#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "erasure/optimize.hpp"

namespace erasure {

enum class Algorithm { Ilp, Hgr, Apx, BaselineInst, BaselineOpr, BaselineMinSet };

std::string_view to_string(Algorithm a);
std::optional<Algorithm> parse_algorithm(std::string_view text);
/// Ilp, Hgr and Apx.
bool is_p2e2_algorithm(Algorithm a);

/// Wall time per phase in microseconds.
struct PhaseTimes {
  double instantiation = 0;
  double model = 0;
  double optimization = 0;
  double update = 0;

  double total() const { return instantiation + model + optimization + update; }
  PhaseTimes& operator+=(const PhaseTimes& o);
};

struct ErasureRequest {
  CellRef target;
  Timestamp request_time = 0;
  Timestamp deadline = 0;  // request_time + grace period
};

ErasureRequest make_request(CellRef target, Timestamp request_time, Timestamp grace = 0);

struct TargetOutcome {
  CellRef target;
  Timestamp request_time = 0;
  Timestamp t_b = 0;
  Value value;                // value before the erasure
  DeletionSet deletion;       // cells of the union set inside this target's model
  InstantiationStats stats;   // as seen by this target's traversal
  bool marked = false;        // also reached from an earlier target of the batch
};

struct BatchResult {
  std::vector<TargetOutcome> targets;  // request-time order, duplicates collapsed
  DeletionSet deletion;                // union, applied at batch close
  std::size_t shared_cells = 0;        // cells in the models of more than one target
  std::size_t instantiated_cells = 0;
  std::size_t instantiated_rules = 0;
  std::size_t model_size = 0;          // vertices + edges, or ILP variables
  PhaseTimes times;
};

struct BatchOptions {
  Algorithm algorithm = Algorithm::Hgr;
  CostFn cost = uniform_cost();
  SolverOptions solver;
};

/// Solves every request of one window jointly on `state`. One rule expander is shared by
/// all targets; the joint model is the union of their models with every target fixed.
/// A batch of one takes exactly the single-erasure path. Requests whose target is NULL
/// are dropped.
BatchResult batch_erase(std::vector<ErasureRequest> requests, const StateView& state, const std::vector<RDR>& rules,
                        const BatchOptions& opts = {});

/// Single-erasure path.
BatchResult erase_one(const CellRef& target, const StateView& state, const std::vector<RDR>& rules,
                      const BatchOptions& opts = {}, Timestamp request_time = 0);

/// Erases every non-NULL cell of the set at time t; returns the number of erase events.
std::size_t apply_deletions(Store& store, const DeletionSet& set, Timestamp t);

enum class BatchMode { Time, Count };

/// Groups requests into tumbling windows: of length `size` ticks from the first request
/// of each window (Time), or of `size` requests (Count). Input must be time-ordered.
std::vector<std::vector<ErasureRequest>> make_windows(const std::vector<ErasureRequest>& requests, BatchMode mode,
                                                      Timestamp size);

}  // namespace erasure
