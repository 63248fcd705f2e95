#include "erasure/store.hpp"

#include <algorithm>

#include "erasure/query.hpp"

namespace erasure {

std::string CellRef::to_string() const { return attribute + "(" + relation + "(" + std::to_string(rid) + "))"; }

std::ostream& operator<<(std::ostream& os, const CellRef& c) { return os << c.to_string(); }

std::size_t CellRefHash::operator()(const CellRef& c) const {
  std::size_t h = std::hash<std::string>{}(c.relation);
  h ^= std::hash<RecordId>{}(c.rid) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  h ^= std::hash<std::string>{}(c.attribute) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  return h;
}

namespace {
constexpr std::pair<EventKind, std::string_view> kKindNames[] = {
    {EventKind::InsertRecord, "insert-record"}, {EventKind::InsertCell, "insert-cell"},
    {EventKind::EraseCell, "erase-cell"},       {EventKind::UpdateCell, "update-cell"},
    {EventKind::RecomputeDerived, "recompute-derived"}, {EventKind::EraseRequest, "erase-request"},
    {EventKind::SetEta, "set-eta"},
};

struct Resolved {
  std::size_t rel;
  std::size_t attr;
};

Resolved resolve(const Schema& schema, const CellRef& c) {
  std::size_t rel = schema.relation_index(c.relation);
  return {rel, schema.attribute_index(rel, c.attribute)};
}

CellState* find_cell(const Schema& schema, Snapshot& snap, const CellRef& c) {
  auto [rel, attr] = resolve(schema, c);
  auto& recs = snap.relations[rel].records;
  auto it = recs.find(c.rid);
  if (it == recs.end()) return nullptr;
  return &it->second.cells[attr];
}
}  // namespace

std::string_view to_string(EventKind kind) {
  for (auto [k, name] : kKindNames)
    if (k == kind) return name;
  return "?";
}

std::optional<EventKind> parse_event_kind(std::string_view text) {
  for (auto [k, name] : kKindNames)
    if (name == text) return k;
  return std::nullopt;
}

// ---------------------------------------------------------------------------

const CellState* StateView::cell(std::size_t rel, RecordId rid, std::size_t attr) const {
  const auto& recs = snapshot_->relations.at(rel).records;
  auto it = recs.find(rid);
  if (it == recs.end() || attr >= it->second.cells.size()) return nullptr;
  return &it->second.cells[attr];
}

const CellState* StateView::cell(const CellRef& c) const {
  auto rel = schema_->find_relation(c.relation);
  if (!rel) return nullptr;
  auto attr = schema_->relation(*rel).find_attribute(c.attribute);
  if (!attr) return nullptr;
  return cell(*rel, c.rid, *attr);
}

Value StateView::value_of(const CellRef& c) const {
  const CellState* cs = cell(c);
  return cs ? cs->value : Value();
}

bool StateView::has_record(std::size_t rel, RecordId rid) const {
  return snapshot_->relations.at(rel).records.count(rid) > 0;
}

StateView StateView::with_values(std::span<const std::pair<CellRef, Value>> overrides) const {
  auto copy = std::make_shared<Snapshot>(*snapshot_);
  for (const auto& [ref, v] : overrides) {
    CellState* cs = find_cell(*schema_, *copy, ref);
    if (!cs) throw Error("override of a cell in a missing record: " + ref.to_string());
    cs->value = v;
  }
  return StateView(schema_, std::move(copy), time_);
}

std::size_t StateView::live_cell_count() const {
  std::size_t n = 0;
  for (const auto& rel : snapshot_->relations)
    for (const auto& [rid, rec] : rel.records)
      for (const auto& c : rec.cells) n += c.value.is_null() ? 0 : 1;
  return n;
}

// ---------------------------------------------------------------------------

void apply_to_snapshot(const Schema& schema, Snapshot& snap, const Event& e) {
  std::size_t rel = schema.relation_index(e.relation);
  auto& recs = snap.relations[rel].records;
  if (e.kind == EventKind::InsertRecord) {
    RecordState rec;
    rec.rid = e.rid;
    rec.created = e.time;
    rec.cells.resize(schema.relation(rel).attributes.size());
    for (auto& c : rec.cells) c.kappa = e.time;
    recs[e.rid] = std::move(rec);
    return;
  }
  CellState& cs = recs.at(e.rid).cells[schema.attribute_index(rel, e.attribute)];
  switch (e.kind) {
    case EventKind::InsertCell:
      cs.value = e.value;
      cs.kappa = e.time;
      if (e.eta) cs.eta = e.eta;
      break;
    case EventKind::EraseCell:
      cs.value = Value();
      cs.erased_at = e.time;
      break;
    case EventKind::RecomputeDerived:
      cs.value = e.value;
      cs.kappa = e.time;
      break;
    case EventKind::SetEta:
      cs.eta = e.eta;
      break;
    case EventKind::EraseRequest:
    case EventKind::UpdateCell:
    case EventKind::InsertRecord:
      break;
  }
}

Store::Store(SchemaPtr schema) : schema_(std::move(schema)) {
  live_.relations.resize(schema_->relations().size());
}

void Store::append(Event event) {
  event.seq = log_.size();
  apply_to_snapshot(*schema_, live_, event);
  last_time_ = event.time;
  log_.push_back(std::move(event));
  current_cache_.reset();
}

ApplyResult Store::apply(Event e) {
  if (e.time < last_time_) throw Error("event at t=" + std::to_string(e.time) + " precedes last event time");
  if (e.time < 0) throw Error("negative event time");
  std::size_t rel = schema_->relation_index(e.relation);
  auto& recs = live_.relations[rel].records;

  if (e.kind == EventKind::InsertRecord) {
    if (recs.count(e.rid)) throw Error("record " + e.relation + "(" + std::to_string(e.rid) + ") already exists");
    e.attribute.clear();
    e.value = Value();
    append(std::move(e));
    return {version(), false};
  }

  std::size_t attr = schema_->attribute_index(rel, e.attribute);
  auto it = recs.find(e.rid);
  if (it == recs.end()) throw Error("no such record for " + e.cell().to_string());
  const CellState& cs = it->second.cells[attr];
  const bool derived = schema_->attribute(rel, attr).kind == AttributeKind::Derived;

  switch (e.kind) {
    case EventKind::InsertCell:
      if (derived) throw Error("derived cell " + e.cell().to_string() + " is only set by recomputation");
      if (!cs.value.is_null()) throw Error("insert into non-NULL cell " + e.cell().to_string() + "; use update");
      if (e.value.is_null()) throw Error("insert of NULL into " + e.cell().to_string());
      break;
    case EventKind::EraseCell:
      if (cs.value.is_null()) return {version(), true};
      e.value = Value();
      break;
    case EventKind::UpdateCell: {
      if (derived) throw Error("derived cell " + e.cell().to_string() + " is only set by recomputation");
      if (cs.value.is_null()) throw Error("update of NULL cell " + e.cell().to_string());
      if (e.value.is_null()) throw Error("update to NULL; use erase");
      Event erase = e;
      erase.kind = EventKind::EraseCell;
      erase.value = Value();
      erase.eta.reset();
      Event insert = e;
      insert.kind = EventKind::InsertCell;
      insert.eta = cs.eta;
      append(std::move(erase));
      append(std::move(insert));
      return {version(), false};
    }
    case EventKind::RecomputeDerived:
      if (!derived) throw Error("recompute of base cell " + e.cell().to_string());
      break;
    case EventKind::EraseRequest:
      if (derived) throw Error("derived cell " + e.cell().to_string() + " cannot be erased on request");
      break;
    case EventKind::SetEta:
      if (derived) throw Error("derived cell " + e.cell().to_string() + " has no expiration");
      if (!e.eta) throw Error("set-eta without a time");
      break;
    case EventKind::InsertRecord:
      break;
  }
  append(std::move(e));
  return {version(), false};
}

Value Store::recompute_derived(const CellRef& c, Timestamp t) {
  auto [rel, attr] = resolve(*schema_, c);
  const auto* def = schema_->derivation(rel, attr);
  if (!def) throw Error("recompute of base cell " + c.to_string());
  if (t < last_time_) throw Error("recompute at t=" + std::to_string(t) + " precedes last event time");
  if (!live_.relations[rel].records.count(c.rid)) throw Error("no such record for " + c.to_string());
  Value v = query::evaluate(*def, current(), c.rid);
  Event e;
  e.time = t;
  e.kind = EventKind::RecomputeDerived;
  e.relation = c.relation;
  e.rid = c.rid;
  e.attribute = c.attribute;
  e.value = v;
  append(std::move(e));
  return v;
}

StateView Store::current() const {
  if (!current_cache_) current_cache_ = std::make_shared<const Snapshot>(live_);
  return StateView(schema_, current_cache_, last_time_);
}

StateView Store::state_at(Timestamp t, Boundary boundary) const {
  if (boundary == Boundary::Inclusive && t >= last_time_) return StateView(schema_, current().snapshot(), t);
  auto snap = std::make_shared<Snapshot>();
  snap->relations.resize(schema_->relations().size());
  for (const auto& e : log_) {
    if (boundary == Boundary::Inclusive ? e.time > t : e.time >= t) break;
    apply_to_snapshot(*schema_, *snap, e);
  }
  return StateView(schema_, std::move(snap), t);
}

std::optional<Value> Store::value_before_erase(const CellRef& c, Timestamp t) const {
  std::size_t k = log_.size();
  while (k-- > 0) {
    const Event& e = log_[k];
    if (e.time > t) continue;
    if (e.kind == EventKind::EraseCell && e.relation == c.relation && e.rid == c.rid && e.attribute == c.attribute) {
      while (k-- > 0) {
        const Event& p = log_[k];
        if ((p.kind == EventKind::InsertCell || p.kind == EventKind::RecomputeDerived) && p.relation == c.relation &&
            p.rid == c.rid && p.attribute == c.attribute)
          return p.value;
      }
      return std::nullopt;
    }
  }
  return std::nullopt;
}

ApplyResult Store::insert_record(Timestamp t, const std::string& rel, RecordId rid,
                                 const std::vector<std::pair<std::string, Value>>& values,
                                 std::optional<Timestamp> eta) {
  Event e;
  e.time = t;
  e.kind = EventKind::InsertRecord;
  e.relation = rel;
  e.rid = rid;
  ApplyResult r = apply(e);
  for (const auto& [attr, v] : values) {
    if (v.is_null()) continue;
    r = insert_cell(t, CellRef{rel, rid, attr}, v, eta);
  }
  return r;
}

ApplyResult Store::insert_cell(Timestamp t, const CellRef& c, Value v, std::optional<Timestamp> eta) {
  return apply(Event{t, EventKind::InsertCell, c.relation, c.rid, c.attribute, std::move(v), eta, 0});
}

ApplyResult Store::erase_cell(Timestamp t, const CellRef& c) {
  return apply(Event{t, EventKind::EraseCell, c.relation, c.rid, c.attribute, Value(), std::nullopt, 0});
}

ApplyResult Store::update_cell(Timestamp t, const CellRef& c, Value v) {
  return apply(Event{t, EventKind::UpdateCell, c.relation, c.rid, c.attribute, std::move(v), std::nullopt, 0});
}

ApplyResult Store::set_eta(Timestamp t, const CellRef& c, Timestamp eta) {
  return apply(Event{t, EventKind::SetEta, c.relation, c.rid, c.attribute, Value(), eta, 0});
}

ApplyResult Store::erase_request(Timestamp t, const CellRef& c) {
  return apply(Event{t, EventKind::EraseRequest, c.relation, c.rid, c.attribute, Value(), std::nullopt, 0});
}

}  // namespace erasure
