#pragma once

#include <map>
#include <optional>
#include <vector>

#include "erasure/store.hpp"

namespace erasure {

/// Closed interval [begin, end] in which a dependency of a derived cell is erased.
struct ErasureInterval {
  CellRef cell;
  Timestamp begin = 0;
  Timestamp end = 0;

  bool contains(Timestamp t) const { return begin <= t && t <= end; }
};

enum class TieBreak { Earliest, Latest };

/// A time t <= deadline contained in the most intervals, earliest (or latest) among the
/// maximizers. Returns the deadline when no interval reaches back to it.
Timestamp max_overlap(const std::vector<ErasureInterval>& intervals, Timestamp deadline,
                      TieBreak tie = TieBreak::Earliest);

struct ReconstructionSchedule {
  CellRef cell;
  Timestamp freq = 0;
  Timestamp anchor = 0;          // last reconstruction (kappa of the cell)
  std::vector<Timestamp> times;  // planned, strictly increasing, after anchor
  std::map<Timestamp, std::vector<CellRef>> covered;
};

/// Each step reconstructs at the latest time that neither breaks the freq bound nor lets
/// a pending interval close unserved, and drops the intervals it hits. Intervals holding
/// the anchor count as served by it; intervals ending before it are an error.
ReconstructionSchedule create_schedule(const CellRef& c, Timestamp freq, Timestamp kappa,
                                       std::vector<ErasureInterval> deps);
/// Same, with freq taken from the schema; throws unless c is derived.
ReconstructionSchedule create_schedule(const Schema& schema, const CellRef& c, Timestamp kappa,
                                       std::vector<ErasureInterval> deps);

/// Rebuilds from the anchor when some pending interval lies strictly between the anchor
/// and the next planned time, or nothing is planned while intervals remain.
ReconstructionSchedule update_schedule(const ReconstructionSchedule& sch, const std::vector<ErasureInterval>& deps,
                                       bool* rebuilt = nullptr);

/// Appends periodic reconstructions after the last planned one up to `horizon`.
void extend_periodic(ReconstructionSchedule& sch, Timestamp horizon);

/// Gaps <= freq, strictly increasing, every interval hit by some time.
bool schedule_valid(const ReconstructionSchedule& sch, const std::vector<ErasureInterval>& deps);

/// Online reconstruction policy for one derived cell. Planned mode follows the schedule;
/// unplanned mode reconstructs as soon as each dependency is erased and otherwise every
/// freq ticks, which is the reference count.
class CellScheduler {
 public:
  CellScheduler(CellRef cell, Timestamp freq, Timestamp kappa, bool planned = true);

  /// A dependency becomes known at `now`.
  void add(ErasureInterval iv, Timestamp now);
  /// Next reconstruction, if one is due while dependencies remain or before `horizon`.
  std::optional<Timestamp> next(Timestamp horizon) const;
  void reconstructed(Timestamp t);

  const CellRef& cell() const { return sch_.cell; }
  const std::vector<Timestamp>& performed() const { return performed_; }
  std::size_t rebuilds() const { return rebuilds_; }
  std::size_t pending() const { return deps_.size(); }
  const ReconstructionSchedule& schedule() const { return sch_; }

 private:
  void refresh();

  ReconstructionSchedule sch_;
  bool planned_;
  std::vector<ErasureInterval> deps_;
  std::vector<Timestamp> performed_;
  std::size_t rebuilds_ = 0;
};

struct Dependency {
  ErasureInterval interval;
  Timestamp known_at = 0;
};

struct SimulationResult {
  std::vector<Timestamp> reconstructions;  // after kappa
  std::size_t rebuilds = 0;
};

/// Replays dependency arrivals against one cell's policy until every dependency is served
/// and no periodic reconstruction is due before `horizon`.
SimulationResult simulate(const CellRef& c, Timestamp freq, Timestamp kappa, std::vector<Dependency> deps,
                          Timestamp horizon, bool planned = true);

/// Reconstructions after kappa with one at each dependency's begin time and the periodic
/// clock restarting at each of them.
std::size_t baseline_reconstructions(Timestamp freq, Timestamp kappa, std::vector<Timestamp> dep_times,
                                     Timestamp horizon);

/// Fewest reconstructions at multiples of `step` after kappa that keep gaps <= freq and
/// hit every interval. Breadth-first over time points; test oracle.
std::optional<std::size_t> schedule_optimum(Timestamp freq, Timestamp kappa, const std::vector<ErasureInterval>& deps,
                                            Timestamp step);

}  // namespace erasure
