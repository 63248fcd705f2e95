#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "erasure/batch.hpp"
#include "erasure/schedule.hpp"

namespace erasure {

struct RunConfig {
  Algorithm algorithm = Algorithm::Hgr;
  CostModel cost_model = CostModel::Uniform;
  BatchMode batch_mode = BatchMode::Count;
  std::size_t batch_size = 1;   // count mode
  Timestamp grace = 0;          // time-mode window and width of retention intervals
  bool scheduler = true;        // planned reconstructions; off: reconstruct on every dependency erasure
  double retention_fraction = 0;  // share of erase requests handled as retention-driven
  bool verify = false;
  std::size_t oracle_limit = 20000;  // live cells above which verification is skipped
  std::uint64_t seed = 1;
  std::optional<Timestamp> horizon;  // default: last event time
  std::map<std::string, Timestamp> freq;  // per derived attribute, overrides the schema
  SolverOptions solver;
};

enum class Verdict { None, Pass, Fail, Skipped };
std::string_view to_string(Verdict v);

struct ErasureRecord {
  std::string kind;  // demand | retention
  CellRef target;
  Timestamp request_time = 0;
  Timestamp executed_at = 0;
  Timestamp t_b = 0;
  Value value;
  std::string algorithm;
  std::size_t batch = 0;
  std::size_t batch_targets = 1;
  std::size_t instantiated_cells = 0;  // of this target's traversal
  std::size_t instantiated_rules = 0;
  std::vector<CellRef> deleted;        // this target's share of the deletion set
  double cost = 0;
  PhaseTimes times;                    // batch phases split evenly over its targets
  std::size_t model_size = 0;
  bool refused = false;
  std::string note;
  std::uint64_t version = 0;           // store log length right after the deletions
  Verdict verdict = Verdict::None;

  nlohmann::json to_json(bool timings = true) const;
  static ErasureRecord from_json(const nlohmann::json& j);
};

struct ReconstructionRecord {
  CellRef cell;
  std::size_t performed = 0;
  std::size_t baseline = 0;
  std::size_t dependencies = 0;
  std::size_t rebuilds = 0;
};

struct Report {
  std::vector<ErasureRecord> erasures;
  std::vector<ReconstructionRecord> reconstructions;
  std::size_t batches = 0;
  std::size_t dropped = 0;             // requests whose target was already NULL
  std::size_t deadline_misses = 0;
  std::size_t instantiated_cells = 0;  // summed over batches
  std::size_t deleted_cells = 0;       // summed over batches
  std::size_t peak_model_size = 0;
  PhaseTimes times;
  double wall_micros = 0;

  std::size_t reconstructions_performed() const;
  std::size_t reconstructions_baseline() const;
  std::size_t reconstructions_saved() const;
  std::size_t count(Verdict v) const;

  /// One JSON object per line: every erasure, every reconstructed cell, then a summary.
  std::string to_jsonl(bool timings = true) const;
  nlohmann::json summary_json(bool timings = true) const;
  std::string summary_table() const;
};

struct RunResult {
  Report report;
  Store store;
};

/// Replays the workload. Erase requests go through the batcher, or are handled as
/// retention-driven erasures with the configured probability; cells reaching their eta
/// are erased; derived cells are recomputed by their schedulers.
RunResult run_workload(SchemaPtr schema, const std::vector<RDR>& rules, const std::vector<Event>& events,
                       const RunConfig& cfg);

/// Oracle check of every erasure record against a store log.
std::vector<Verdict> verify(const Store& store, const std::vector<RDR>& rules, const std::vector<ErasureRecord>& records,
                            std::size_t oracle_limit = 20000);

/// Parses the erasure lines of a report written by Report::to_jsonl.
std::vector<ErasureRecord> parse_report(std::string_view jsonl);

}  // namespace erasure
