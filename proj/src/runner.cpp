#include "erasure/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <limits>
#include <queue>
#include <set>
#include <sstream>

#include "erasure/workload.hpp"

namespace erasure {

namespace {

using Clock = std::chrono::steady_clock;
double micros_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::micro>(Clock::now() - t0).count();
}

// Deterministic draw in [0, 1) per (seed, index); nested across fractions.
double unit_draw(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t z = seed * 0x9E3779B97F4A7C15ULL + index + 0x632BE59BD9B4E019ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  z ^= z >> 31;
  return static_cast<double>(z >> 11) / static_cast<double>(std::uint64_t{1} << 53);
}

nlohmann::json cell_json(const CellRef& c) { return c.to_string(); }

CellRef parse_cell(const std::string& s) {
  // attr(Rel(rid))
  auto a = s.find('(');
  auto b = s.find('(', a + 1);
  auto e = s.find(')');
  if (a == std::string::npos || b == std::string::npos || e == std::string::npos) throw Error("bad cell '" + s + "'");
  return CellRef{s.substr(a + 1, b - a - 1), std::stoll(s.substr(b + 1, e - b - 1)), s.substr(0, a)};
}

nlohmann::json value_json(const Value& v) {
  if (v.is_null()) return nullptr;
  if (v.is_int()) return v.as_int();
  if (v.is_double()) return v.as_double();
  return v.as_string();
}

Value json_value(const nlohmann::json& j) {
  if (j.is_null()) return Value();
  if (j.is_number_integer()) return Value(j.get<std::int64_t>());
  if (j.is_number()) return Value(j.get<double>());
  return Value(j.get<std::string>());
}

nlohmann::json times_json(const PhaseTimes& t) {
  return {{"instantiation", t.instantiation},
          {"model", t.model},
          {"optimization", t.optimization},
          {"update", t.update},
          {"total", t.total()}};
}

bool is_derived(const Schema& s, const CellRef& c) {
  auto rel = s.find_relation(c.relation);
  if (!rel) return false;
  auto attr = s.relation(*rel).find_attribute(c.attribute);
  return attr && s.attribute(*rel, *attr).kind == AttributeKind::Derived;
}

class Runner {
 public:
  Runner(SchemaPtr schema, const std::vector<RDR>& rules, const RunConfig& cfg)
      : schema_(schema), rules_(rules), cfg_(cfg), store_(schema) {
    opts_.algorithm = cfg.algorithm;
    opts_.cost = cost_function(*schema, cfg.cost_model);
    opts_.solver = cfg.solver;
    if (cfg.batch_mode == BatchMode::Count && cfg.batch_size == 0) throw Error("batch size must be positive");
    if (cfg.retention_fraction < 0 || cfg.retention_fraction > 1) throw Error("retention fraction outside [0, 1]");
  }

  RunResult run(const std::vector<Event>& events) {
    auto t0 = Clock::now();
    horizon_ = cfg_.horizon ? *cfg_.horizon : (events.empty() ? 0 : events.back().time);
    std::uint64_t request_index = 0;
    for (const auto& e : events) {
      advance(e.time);
      apply(e, request_index);
    }
    if (!open_.empty()) close_batch(open_close_time());
    advance(std::numeric_limits<Timestamp>::max());
    for (auto& [c, s] : scheds_) {
      ReconstructionRecord r;
      r.cell = c;
      r.performed = s.performed().size();
      r.baseline = baseline_reconstructions(s.schedule().freq, kappa0_[c], dep_times_[c], horizon_);
      r.dependencies = dep_times_[c].size();
      r.rebuilds = s.rebuilds();
      report_.reconstructions.push_back(r);
    }
    report_.wall_micros = micros_since(t0);
    return RunResult{std::move(report_), std::move(store_)};
  }

 private:
  Timestamp freq_of(const CellRef& c) const {
    auto it = cfg_.freq.find(c.attribute);
    if (it != cfg_.freq.end()) return it->second;
    auto rel = schema_->relation_index(c.relation);
    return *schema_->attribute(rel, schema_->attribute_index(rel, c.attribute)).freq;
  }

  Timestamp open_close_time() const {
    if (cfg_.batch_mode == BatchMode::Time && cfg_.grace > 0) return window_start_ + cfg_.grace;
    return store_.last_time();
  }

  void watch_eta(const CellRef& c) {
    const CellState* cs = store_.current().cell(c);
    if (cs && cs->eta && !cs->value.is_null()) expiries_.push({*cs->eta, c});
  }

  void apply(const Event& e, std::uint64_t& request_index) {
    switch (e.kind) {
      case EventKind::RecomputeDerived: {
        CellRef c = e.cell();
        store_.recompute_derived(c, e.time);
        auto it = scheds_.find(c);
        if (it == scheds_.end()) {
          scheds_.emplace(c, CellScheduler(c, freq_of(c), e.time, cfg_.scheduler));
          kappa0_[c] = e.time;
          dep_times_[c];
        } else {
          it->second.reconstructed(e.time);
        }
        return;
      }
      case EventKind::UpdateCell:
        if (store_.current().value_of(e.cell()).is_null()) {
          Event ins = e;
          ins.kind = EventKind::InsertCell;
          store_.apply(ins);
        } else {
          store_.apply(e);
        }
        return;
      case EventKind::EraseRequest: {
        std::uint64_t index = request_index++;
        store_.apply(e);
        if (unit_draw(cfg_.seed, index) < cfg_.retention_fraction) {
          retention_erase(e.cell(), e.time, e.time);
          return;
        }
        if (open_.empty()) window_start_ = e.time;
        open_.push_back(make_request(e.cell(), e.time, cfg_.grace));
        bool full = cfg_.batch_mode == BatchMode::Count ? open_.size() >= cfg_.batch_size : cfg_.grace == 0;
        if (full) close_batch(e.time);
        return;
      }
      default:
        store_.apply(e);
        if (e.kind == EventKind::InsertCell || e.kind == EventKind::SetEta) watch_eta(e.cell());
        return;
    }
  }

  // Runs every action due strictly before `limit`: batch closes and expiries first, then
  // reconstructions, each in time order.
  void advance(Timestamp limit) {
    for (;;) {
      Timestamp best = std::numeric_limits<Timestamp>::max();
      int kind = -1;
      if (!open_.empty() && cfg_.batch_mode == BatchMode::Time && cfg_.grace > 0 && open_close_time() < limit) {
        best = open_close_time();
        kind = 0;
      }
      if (!expiries_.empty() && expiries_.top().first < limit && expiries_.top().first < best) {
        best = expiries_.top().first;
        kind = 1;
      }
      CellScheduler* due = nullptr;
      for (auto& [c, s] : scheds_) {
        auto n = s.next(horizon_);
        if (n && *n < limit && *n < best) {
          best = *n;
          kind = 2;
          due = &s;
        }
      }
      if (kind < 0) return;
      if (kind == 0) {
        close_batch(best);
      } else if (kind == 1) {
        auto [t, c] = expiries_.top();
        expiries_.pop();
        const CellState* cs = store_.current().cell(c);
        if (cs && cs->eta && *cs->eta == t && !cs->value.is_null())
          retention_erase(c, std::max(t, store_.last_time()), t);
      } else {
        Timestamp t = std::max(best, store_.last_time());
        store_.recompute_derived(due->cell(), t);
        due->reconstructed(t);
      }
    }
  }

  // Derived cells heading a rule with a deleted cell in its tail.
  std::set<CellRef> dependents(const StateView& pre, const DeletionSet& set) {
    std::set<CellRef> out;
    RuleExpander ex(pre, rules_);
    for (const auto& b : set.cells) {
      if (is_derived(*schema_, b)) continue;
      for (const auto& d : ex.as_tail(b))
        if (is_derived(*schema_, d.head)) out.insert(d.head);
    }
    return out;
  }

  void execute(const std::vector<ErasureRequest>& requests, Timestamp t, const std::string& kind, Timestamp width) {
    StateView pre = store_.current();
    BatchResult br = batch_erase(requests, pre, rules_, opts_);
    std::set<CellRef> distinct;
    for (const auto& r : requests) distinct.insert(r.target);
    report_.dropped += distinct.size() - br.targets.size();
    if (br.targets.empty()) return;
    const std::size_t batch = ++report_.batches;

    auto t0 = Clock::now();
    bool refused = br.deletion.stats.refused;
    if (!refused) report_.deleted_cells += apply_deletions(store_, br.deletion, t);
    br.times.update = micros_since(t0);
    report_.times += br.times;
    report_.instantiated_cells += br.instantiated_cells;
    report_.peak_model_size = std::max(report_.peak_model_size, br.model_size);

    if (!refused)
      for (const auto& c : dependents(pre, br.deletion)) {
        auto it = scheds_.find(c);
        if (it == scheds_.end()) continue;
        it->second.add(ErasureInterval{c, t, t + width}, t);
        dep_times_[c].push_back(t);
      }

    StateView post = store_.current();
    const bool check = cfg_.verify && !refused && post.live_cell_count() <= cfg_.oracle_limit;
    const double n = static_cast<double>(br.targets.size());
    for (const auto& o : br.targets) {
      ErasureRecord r;
      r.kind = kind;
      r.target = o.target;
      r.request_time = o.request_time;
      r.executed_at = t;
      r.t_b = o.t_b;
      r.value = o.value;
      r.algorithm = std::string(to_string(cfg_.algorithm));
      r.batch = batch;
      r.batch_targets = br.targets.size();
      r.instantiated_cells = o.stats.instantiated_cells;
      r.instantiated_rules = o.stats.instantiated_rules;
      r.deleted = refused ? std::vector<CellRef>{} : o.deletion.cells;
      r.cost = o.deletion.cost;
      r.times.instantiation = br.times.instantiation / n;
      r.times.model = br.times.model / n;
      r.times.optimization = br.times.optimization / n;
      r.times.update = br.times.update / n;
      r.model_size = br.model_size;
      r.refused = refused;
      r.note = br.deletion.stats.note;
      r.version = store_.version();
      if (kind == "demand" && t > o.request_time + cfg_.grace) ++report_.deadline_misses;
      if (cfg_.verify) {
        if (!check) {
          r.verdict = Verdict::Skipped;
        } else {
          bool ok = p2e2_holds(o.target, o.value, store_.state_at(o.t_b), post, rules_);
          r.verdict = ok ? Verdict::Pass : Verdict::Fail;
        }
      }
      report_.erasures.push_back(std::move(r));
    }
  }

  void close_batch(Timestamp t) {
    std::vector<ErasureRequest> reqs = std::move(open_);
    open_.clear();
    execute(reqs, std::max(t, store_.last_time()), "demand", 0);
  }

  void retention_erase(const CellRef& c, Timestamp t, Timestamp requested) {
    execute({make_request(c, requested)}, t, "retention", cfg_.grace);
  }

  SchemaPtr schema_;
  const std::vector<RDR>& rules_;
  const RunConfig& cfg_;
  Store store_;
  BatchOptions opts_;
  Report report_;
  Timestamp horizon_ = 0;
  std::vector<ErasureRequest> open_;
  Timestamp window_start_ = 0;
  std::priority_queue<std::pair<Timestamp, CellRef>, std::vector<std::pair<Timestamp, CellRef>>, std::greater<>>
      expiries_;
  std::map<CellRef, CellScheduler> scheds_;
  std::map<CellRef, Timestamp> kappa0_;
  std::map<CellRef, std::vector<Timestamp>> dep_times_;
};

}  // namespace

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::None: return "none";
    case Verdict::Pass: return "pass";
    case Verdict::Fail: return "fail";
    case Verdict::Skipped: return "skipped";
  }
  return "?";
}

nlohmann::json ErasureRecord::to_json(bool timings) const {
  nlohmann::json deleted_json = nlohmann::json::array();
  for (const auto& c : deleted) deleted_json.push_back(cell_json(c));
  nlohmann::json j{{"type", "erasure"},
                   {"kind", kind},
                   {"target", cell_json(target)},
                   {"request_time", request_time},
                   {"executed_at", executed_at},
                   {"t_b", t_b},
                   {"value", value_json(value)},
                   {"algorithm", algorithm},
                   {"batch", batch},
                   {"batch_targets", batch_targets},
                   {"instantiated_cells", instantiated_cells},
                   {"instantiated_rules", instantiated_rules},
                   {"deleted_cells", deleted.size()},
                   {"deleted", deleted_json},
                   {"cost", cost},
                   {"model_size", model_size},
                   {"refused", refused},
                   {"version", version},
                   {"verdict", to_string(verdict)}};
  if (!note.empty()) j["note"] = note;
  if (timings) j["times_us"] = times_json(times);
  return j;
}

ErasureRecord ErasureRecord::from_json(const nlohmann::json& j) {
  ErasureRecord r;
  r.kind = j.at("kind").get<std::string>();
  r.target = parse_cell(j.at("target").get<std::string>());
  r.request_time = j.at("request_time").get<Timestamp>();
  r.executed_at = j.at("executed_at").get<Timestamp>();
  r.t_b = j.at("t_b").get<Timestamp>();
  r.value = json_value(j.at("value"));
  r.algorithm = j.at("algorithm").get<std::string>();
  r.batch = j.value("batch", std::size_t{0});
  r.refused = j.value("refused", false);
  r.version = j.at("version").get<std::uint64_t>();
  for (const auto& c : j.at("deleted")) r.deleted.push_back(parse_cell(c.get<std::string>()));
  return r;
}

std::size_t Report::reconstructions_performed() const {
  std::size_t n = 0;
  for (const auto& r : reconstructions) n += r.performed;
  return n;
}

std::size_t Report::reconstructions_baseline() const {
  std::size_t n = 0;
  for (const auto& r : reconstructions) n += r.baseline;
  return n;
}

std::size_t Report::reconstructions_saved() const {
  std::size_t n = 0;
  for (const auto& r : reconstructions) n += r.baseline > r.performed ? r.baseline - r.performed : 0;
  return n;
}

std::size_t Report::count(Verdict v) const {
  return static_cast<std::size_t>(
      std::count_if(erasures.begin(), erasures.end(), [&](const ErasureRecord& r) { return r.verdict == v; }));
}

nlohmann::json Report::summary_json(bool timings) const {
  nlohmann::json j{{"type", "summary"},
                   {"erasures", erasures.size()},
                   {"batches", batches},
                   {"dropped", dropped},
                   {"deadline_misses", deadline_misses},
                   {"instantiated_cells", instantiated_cells},
                   {"deleted_cells", deleted_cells},
                   {"peak_model_size", peak_model_size},
                   {"reconstructions_performed", reconstructions_performed()},
                   {"reconstructions_baseline", reconstructions_baseline()},
                   {"reconstructions_saved", reconstructions_saved()},
                   {"verified_pass", count(Verdict::Pass)},
                   {"verified_fail", count(Verdict::Fail)},
                   {"verified_skipped", count(Verdict::Skipped)}};
  if (timings) {
    j["times_us"] = times_json(times);
    j["wall_us"] = wall_micros;
  }
  return j;
}

std::string Report::to_jsonl(bool timings) const {
  std::string out;
  for (const auto& e : erasures) out += e.to_json(timings).dump() + "\n";
  for (const auto& r : reconstructions)
    out += nlohmann::json{{"type", "reconstruction"},
                          {"cell", cell_json(r.cell)},
                          {"performed", r.performed},
                          {"baseline", r.baseline},
                          {"dependencies", r.dependencies},
                          {"rebuilds", r.rebuilds}}
               .dump() +
           "\n";
  out += summary_json(timings).dump() + "\n";
  return out;
}

std::string Report::summary_table() const {
  char buf[128];
  std::string out;
  auto row = [&](const char* k, double v) {
    std::snprintf(buf, sizeof buf, "%-28s %14.0f\n", k, v);
    out += buf;
  };
  row("erasures", static_cast<double>(erasures.size()));
  row("batches", static_cast<double>(batches));
  row("dropped requests", static_cast<double>(dropped));
  row("deadline misses", static_cast<double>(deadline_misses));
  row("instantiated cells", static_cast<double>(instantiated_cells));
  row("deleted cells", static_cast<double>(deleted_cells));
  row("peak model size", static_cast<double>(peak_model_size));
  row("reconstructions performed", static_cast<double>(reconstructions_performed()));
  row("reconstructions baseline", static_cast<double>(reconstructions_baseline()));
  row("reconstructions saved", static_cast<double>(reconstructions_saved()));
  row("verified pass", static_cast<double>(count(Verdict::Pass)));
  row("verified fail", static_cast<double>(count(Verdict::Fail)));
  row("verified skipped", static_cast<double>(count(Verdict::Skipped)));
  row("instantiation us", times.instantiation);
  row("model us", times.model);
  row("optimization us", times.optimization);
  row("update us", times.update);
  row("wall us", wall_micros);
  return out;
}

RunResult run_workload(SchemaPtr schema, const std::vector<RDR>& rules, const std::vector<Event>& events,
                       const RunConfig& cfg) {
  Runner r(std::move(schema), rules, cfg);
  return r.run(events);
}

std::vector<Verdict> verify(const Store& store, const std::vector<RDR>& rules, const std::vector<ErasureRecord>& records,
                            std::size_t oracle_limit) {
  std::vector<std::size_t> order(records.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return records[a].version < records[b].version; });
  std::vector<Verdict> out(records.size(), Verdict::Skipped);
  Store partial(store.schema_ptr());
  std::size_t applied = 0;
  const auto& log = store.log();
  for (std::size_t i : order) {
    const auto& r = records[i];
    if (r.version > log.size()) throw Error("report does not match the log: version " + std::to_string(r.version));
    for (; applied < r.version; ++applied) partial.apply(log[applied]);
    if (r.refused) continue;
    StateView post = partial.current();
    if (post.live_cell_count() > oracle_limit) continue;
    if (!post.value_of(r.target).is_null()) {
      out[i] = Verdict::Fail;
      continue;
    }
    out[i] = p2e2_holds(r.target, r.value, partial.state_at(r.t_b), post, rules) ? Verdict::Pass : Verdict::Fail;
  }
  return out;
}

std::vector<ErasureRecord> parse_report(std::string_view jsonl) {
  std::vector<ErasureRecord> out;
  std::istringstream in{std::string(jsonl)};
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto j = nlohmann::json::parse(line);
    if (j.value("type", "") == "erasure") out.push_back(ErasureRecord::from_json(j));
  }
  return out;
}

}  // namespace erasure
