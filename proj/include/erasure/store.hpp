#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "erasure/schema.hpp"
#include "erasure/value.hpp"

namespace erasure {

/// One attribute of one record, A(R(rid)).
struct CellRef {
  std::string relation;
  RecordId rid = 0;
  std::string attribute;

  friend auto operator<=>(const CellRef&, const CellRef&) = default;
  friend bool operator==(const CellRef&, const CellRef&) = default;

  std::string to_string() const;
};

std::ostream& operator<<(std::ostream& os, const CellRef& c);

struct CellRefHash {
  std::size_t operator()(const CellRef& c) const;
};

/// Per-cell state at some point in time.
struct CellState {
  Value value;
  Timestamp kappa = 0;                 // latest insert / recompute
  std::optional<Timestamp> eta;        // expiration; base cells only
  std::optional<Timestamp> erased_at;  // latest erase
};

struct RecordState {
  RecordId rid = 0;
  Timestamp created = 0;
  std::vector<CellState> cells;  // indexed like RelationDef::attributes
};

struct RelationState {
  std::map<RecordId, RecordState> records;
};

struct Snapshot {
  std::vector<RelationState> relations;
};

enum class EventKind {
  InsertRecord,
  InsertCell,
  EraseCell,
  UpdateCell,  // expanded into EraseCell + InsertCell when applied
  RecomputeDerived,
  EraseRequest,
  SetEta,
};

std::string_view to_string(EventKind kind);
std::optional<EventKind> parse_event_kind(std::string_view text);

struct Event {
  Timestamp time = 0;
  EventKind kind = EventKind::InsertRecord;
  std::string relation;
  RecordId rid = 0;
  std::string attribute;  // empty for InsertRecord
  Value value;
  std::optional<Timestamp> eta;
  std::uint64_t seq = 0;  // assigned by the store

  CellRef cell() const { return CellRef{relation, rid, attribute}; }
};

/// Immutable view of D_t. Cheap to copy; shares the materialized snapshot.
class StateView {
 public:
  StateView(SchemaPtr schema, std::shared_ptr<const Snapshot> snapshot, Timestamp time)
      : schema_(std::move(schema)), snapshot_(std::move(snapshot)), time_(time) {}

  const Schema& schema() const { return *schema_; }
  const SchemaPtr& schema_ptr() const { return schema_; }
  Timestamp time() const { return time_; }
  const std::shared_ptr<const Snapshot>& snapshot() const { return snapshot_; }

  /// NULL for erased, never-inserted or unknown cells.
  Value value_of(const CellRef& c) const;
  const CellState* cell(const CellRef& c) const;
  const CellState* cell(std::size_t rel, RecordId rid, std::size_t attr) const;
  const RelationState& relation(std::size_t rel) const { return snapshot_->relations.at(rel); }
  bool has_record(std::size_t rel, RecordId rid) const;

  /// A copy of this state where the listed cells hold the given values (NULL erases).
  /// Metadata of overridden cells is kept except for the value.
  StateView with_values(std::span<const std::pair<CellRef, Value>> overrides) const;

  /// Number of non-NULL cells.
  std::size_t live_cell_count() const;

 private:
  SchemaPtr schema_;
  std::shared_ptr<const Snapshot> snapshot_;
  Timestamp time_;
};

enum class Boundary {
  Inclusive,  // D_t: every event with time <= t
  Before,     // D_{t-}: every event with time < t
};

struct ApplyResult {
  std::uint64_t version = 0;
  bool noop = false;  // e.g. erase of an already-NULL cell
};

/// Event-sourced in-memory store. Single writer; views are immutable and shareable.
class Store {
 public:
  explicit Store(SchemaPtr schema);

  const Schema& schema() const { return *schema_; }
  const SchemaPtr& schema_ptr() const { return schema_; }

  /// Validates and appends the event. UpdateCell becomes an EraseCell + InsertCell pair
  /// that keeps the cell's original eta. Throws erasure::Error on invalid events.
  ApplyResult apply(Event event);

  /// Recomputes a derived cell from its definition on the state at `t` and appends a
  /// RecomputeDerived event. Returns the new value.
  Value recompute_derived(const CellRef& cell, Timestamp t);

  StateView current() const;
  StateView state_at(Timestamp t, Boundary boundary = Boundary::Inclusive) const;

  const std::vector<Event>& log() const { return log_; }
  Timestamp last_time() const { return last_time_; }
  std::uint64_t version() const { return log_.size(); }

  /// Value the cell held just before its most recent erase at or before `t`.
  std::optional<Value> value_before_erase(const CellRef& cell, Timestamp t) const;

  // Convenience wrappers around apply().
  ApplyResult insert_record(Timestamp t, const std::string& rel, RecordId rid,
                            const std::vector<std::pair<std::string, Value>>& values = {},
                            std::optional<Timestamp> eta = std::nullopt);
  ApplyResult insert_cell(Timestamp t, const CellRef& c, Value v, std::optional<Timestamp> eta = std::nullopt);
  ApplyResult erase_cell(Timestamp t, const CellRef& c);
  ApplyResult update_cell(Timestamp t, const CellRef& c, Value v);
  ApplyResult set_eta(Timestamp t, const CellRef& c, Timestamp eta);
  ApplyResult erase_request(Timestamp t, const CellRef& c);

 private:
  void append(Event event);

  SchemaPtr schema_;
  Snapshot live_;
  std::vector<Event> log_;
  Timestamp last_time_ = 0;
  mutable std::shared_ptr<const Snapshot> current_cache_;
};

/// Applies an already-validated log event to a snapshot. Shared by replay and the live store.
void apply_to_snapshot(const Schema& schema, Snapshot& snap, const Event& e);

}  // namespace erasure
