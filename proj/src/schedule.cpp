#include "erasure/schedule.hpp"

#include <algorithm>
#include <deque>
#include <limits>
#include <set>

#include "erasure/schema.hpp"

namespace erasure {

Timestamp max_overlap(const std::vector<ErasureInterval>& intervals, Timestamp deadline, TieBreak tie) {
  // The count is piecewise constant; its maximizers start at a begin or end at an end
  // (or the deadline).
  std::vector<Timestamp> cand{deadline};
  for (const auto& iv : intervals) {
    if (iv.begin <= deadline) cand.push_back(iv.begin);
    if (iv.end <= deadline) cand.push_back(iv.end);
  }
  std::sort(cand.begin(), cand.end());
  cand.erase(std::unique(cand.begin(), cand.end()), cand.end());
  std::size_t best_count = 0;
  Timestamp best = deadline;
  bool any = false;
  for (Timestamp t : cand) {
    std::size_t n = 0;
    for (const auto& iv : intervals) n += iv.contains(t);
    if (n == 0) continue;
    if (!any || n > best_count || (n == best_count && tie == TieBreak::Latest)) {
      best = t;
      best_count = n;
      any = true;
    }
  }
  return best;
}

ReconstructionSchedule create_schedule(const CellRef& c, Timestamp freq, Timestamp kappa,
                                       std::vector<ErasureInterval> deps) {
  if (freq <= 0) throw Error("freq of " + c.to_string() + " must be positive");
  ReconstructionSchedule s;
  s.cell = c;
  s.freq = freq;
  s.anchor = kappa;
  for (const auto& d : deps)
    if (d.begin > d.end) throw Error("interval of " + d.cell.to_string() + " ends before it begins");
  std::erase_if(deps, [&](const ErasureInterval& d) {
    if (d.end < kappa) throw Error("interval of " + d.cell.to_string() + " closed before " + std::to_string(kappa));
    return d.contains(kappa);
  });
  Timestamp prev = kappa;
  while (!deps.empty()) {
    Timestamp deadline = prev + freq;
    for (const auto& d : deps) deadline = std::min(deadline, d.end);
    Timestamp t = max_overlap(deps, deadline, TieBreak::Latest);
    auto& hit = s.covered[t];
    std::erase_if(deps, [&](const ErasureInterval& d) {
      if (!d.contains(t)) return false;
      hit.push_back(d.cell);
      return true;
    });
    if (hit.empty()) s.covered.erase(t);
    s.times.push_back(t);
    prev = t;
  }
  return s;
}

ReconstructionSchedule create_schedule(const Schema& schema, const CellRef& c, Timestamp kappa,
                                       std::vector<ErasureInterval> deps) {
  auto rel = schema.find_relation(c.relation);
  if (!rel) throw Error("unknown relation in " + c.to_string());
  const auto& attr = schema.attribute(*rel, schema.attribute_index(*rel, c.attribute));
  if (attr.kind != AttributeKind::Derived) throw Error(c.to_string() + " is not derived");
  return create_schedule(c, *attr.freq, kappa, std::move(deps));
}

ReconstructionSchedule update_schedule(const ReconstructionSchedule& sch, const std::vector<ErasureInterval>& deps,
                                       bool* rebuilt) {
  bool rebuild = false;
  if (!deps.empty() && sch.times.empty()) rebuild = true;
  for (const auto& d : deps)
    if (!sch.times.empty() && d.begin > sch.anchor && d.end < sch.times.front()) rebuild = true;
  if (rebuilt) *rebuilt = rebuild;
  if (!rebuild) return sch;
  return create_schedule(sch.cell, sch.freq, sch.anchor, deps);
}

void extend_periodic(ReconstructionSchedule& sch, Timestamp horizon) {
  Timestamp t = (sch.times.empty() ? sch.anchor : sch.times.back()) + sch.freq;
  for (; t <= horizon; t += sch.freq) sch.times.push_back(t);
}

bool schedule_valid(const ReconstructionSchedule& sch, const std::vector<ErasureInterval>& deps) {
  Timestamp prev = sch.anchor;
  for (Timestamp t : sch.times) {
    if (t <= prev || t - prev > sch.freq) return false;
    prev = t;
  }
  for (const auto& d : deps) {
    if (d.contains(sch.anchor)) continue;
    if (std::none_of(sch.times.begin(), sch.times.end(), [&](Timestamp t) { return d.contains(t); })) return false;
  }
  return true;
}

CellScheduler::CellScheduler(CellRef cell, Timestamp freq, Timestamp kappa, bool planned) : planned_(planned) {
  sch_ = create_schedule(cell, freq, kappa, {});
}

void CellScheduler::add(ErasureInterval iv, Timestamp now) {
  if (!planned_) iv.end = iv.begin;
  if (iv.end < now) throw Error("dependency " + iv.cell.to_string() + " announced after its interval");
  if (iv.contains(sch_.anchor)) return;
  deps_.push_back(std::move(iv));
  refresh();
}

std::optional<Timestamp> CellScheduler::next(Timestamp horizon) const {
  if (!sch_.times.empty()) return sch_.times.front();
  Timestamp t = sch_.anchor + sch_.freq;
  if (t <= horizon) return t;
  return std::nullopt;
}

void CellScheduler::reconstructed(Timestamp t) {
  if (t <= sch_.anchor) throw Error("reconstruction of " + sch_.cell.to_string() + " out of order");
  performed_.push_back(t);
  std::erase_if(deps_, [&](const ErasureInterval& d) { return d.contains(t); });
  sch_.anchor = t;
  std::erase_if(sch_.times, [&](Timestamp x) { return x <= t; });
  refresh();
}

void CellScheduler::refresh() {
  bool rebuilt = false;
  sch_ = update_schedule(sch_, deps_, &rebuilt);
  if (rebuilt) ++rebuilds_;
}

SimulationResult simulate(const CellRef& c, Timestamp freq, Timestamp kappa, std::vector<Dependency> deps,
                          Timestamp horizon, bool planned) {
  std::stable_sort(deps.begin(), deps.end(),
                   [](const Dependency& a, const Dependency& b) { return a.known_at < b.known_at; });
  CellScheduler s(c, freq, kappa, planned);
  std::size_t i = 0;
  for (;;) {
    auto next = s.next(horizon);
    if (i < deps.size() && (!next || deps[i].known_at <= *next)) {
      s.add(deps[i].interval, deps[i].known_at);
      ++i;
      continue;
    }
    if (!next) break;
    s.reconstructed(*next);
  }
  return SimulationResult{s.performed(), s.rebuilds()};
}

std::size_t baseline_reconstructions(Timestamp freq, Timestamp kappa, std::vector<Timestamp> dep_times,
                                     Timestamp horizon) {
  std::sort(dep_times.begin(), dep_times.end());
  dep_times.erase(std::unique(dep_times.begin(), dep_times.end()), dep_times.end());
  std::size_t n = 0;
  Timestamp last = kappa;
  for (Timestamp d : dep_times) {
    if (d <= last) continue;
    while (last + freq < d) {
      last += freq;
      ++n;
    }
    last = d;
    ++n;
  }
  while (last + freq <= horizon) {
    last += freq;
    ++n;
  }
  return n;
}

std::optional<std::size_t> schedule_optimum(Timestamp freq, Timestamp kappa, const std::vector<ErasureInterval>& deps,
                                            Timestamp step) {
  if (deps.size() > 20) throw Error("schedule_optimum: too many intervals");
  if (step <= 0 || freq < step) throw Error("schedule_optimum: bad step");
  const std::uint32_t full = (std::uint32_t{1} << deps.size()) - 1;
  auto hits = [&](Timestamp t) {
    std::uint32_t m = 0;
    for (std::size_t i = 0; i < deps.size(); ++i)
      if (deps[i].contains(t)) m |= std::uint32_t{1} << i;
    return m;
  };
  Timestamp last_end = kappa;
  for (const auto& d : deps) last_end = std::max(last_end, d.end);
  std::set<std::pair<Timestamp, std::uint32_t>> seen;
  std::deque<std::pair<std::pair<Timestamp, std::uint32_t>, std::size_t>> q;
  q.push_back({{kappa, hits(kappa)}, 0});
  seen.insert(q.front().first);
  while (!q.empty()) {
    auto [state, depth] = q.front();
    q.pop_front();
    auto [t, mask] = state;
    if (mask == full) return depth;
    for (Timestamp u = t + step; u <= t + freq && u <= last_end; u += step) {
      std::pair<Timestamp, std::uint32_t> nxt{u, mask | hits(u)};
      if (seen.insert(nxt).second) q.push_back({nxt, depth + 1});
    }
  }
  return std::nullopt;
}

}  // namespace erasure
