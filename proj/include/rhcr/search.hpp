#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "rhcr/grid.hpp"

namespace rhcr {

/// Bounded time horizon w. Collisions are resolved for timesteps 0..w inclusive;
/// nothing after w is ever stored or checked.
class Horizon {
 public:
  static constexpr int kInfiniteSteps = std::numeric_limits<int>::max() / 4;

  constexpr Horizon() = default;
  static constexpr Horizon steps(int w) { return Horizon(w); }
  static constexpr Horizon infinite() { return Horizon(kInfiniteSteps); }

  constexpr bool is_infinite() const { return w_ >= kInfiniteSteps; }
  constexpr int value() const { return w_; }
  constexpr bool covers(int t) const { return t <= w_; }

  friend constexpr bool operator==(Horizon, Horizon) = default;

 private:
  constexpr explicit Horizon(int w) : w_(w < kInfiniteSteps ? w : kInfiniteSteps) {}
  int w_ = kInfiniteSteps;
};

using GoalSequence = std::vector<CellId>;

/// Timestep-indexed route. The agent stays on locations.back() after the path ends.
struct Path {
  std::vector<CellId> locations;
  /// Timestep at which goals[j] was visited, strictly increasing.
  std::vector<int> goal_visit_times;

  int cost() const { return static_cast<int>(locations.size()) - 1; }
  CellId at(int t) const {
    return t < static_cast<int>(locations.size()) ? locations[t] : locations.back();
  }
  friend bool operator==(const Path&, const Path&) = default;
};

/// Sum over goals[label..] of the leg distances starting from x. With label == goals.size()
/// the remaining cost is 0.
int compute_h_value(const DistanceCache& dist, std::span<const CellId> goals, CellId x, int label);

/// Spatio-temporal prohibitions (or soft occupancy counts) truncated at a horizon.
/// Vertex entries are half-open time intervals; edge entries ban a traversal arriving at t.
class ReservationTable {
 public:
  /// `hold`: a reserved path's final cell stays occupied through max(path end, hold).
  ReservationTable(int cell_count, Horizon w, Horizon hold = Horizon::infinite());

  Horizon horizon() const { return w_; }
  Horizon hold() const { return hold_; }

  void add_vertex(CellId c, int t);
  /// Occupies c from t through the horizon (forever when the horizon is infinite).
  void add_vertex_from(CellId c, int t);
  void add_edge(CellId from, CellId to, int t);
  /// Reserves another agent's path: its vertices, the reverse of its moves (swap bans) and
  /// its final cell from the end of the path through the hold limit.
  void add_path(const Path& p);

  bool vertex_blocked(CellId c, int t) const;
  bool edge_blocked(CellId from, CellId to, int t) const;
  int vertex_count(CellId c, int t) const;
  int edge_count(CellId from, CellId to, int t) const;
  /// True when nothing occupies c at any timestep in [t, max(t, hold)].
  bool can_hold(CellId c, int t) const;

  /// From this timestep on, the table no longer changes with t.
  int static_after() const { return static_after_; }
  /// Some cell stays occupied forever (only with an infinite horizon).
  bool has_permanent() const { return has_permanent_; }
  bool empty() const { return entries_ == 0; }
  std::size_t size() const { return entries_; }

 private:
  struct Interval {
    int begin;
    int end;  // exclusive
  };
  struct EdgeBan {
    CellId to;
    int t;
  };

  Horizon w_;
  Horizon hold_;
  std::vector<std::vector<Interval>> vertex_;
  std::vector<std::vector<EdgeBan>> edge_;
  int static_after_ = 0;
  bool has_permanent_ = false;
  std::size_t entries_ = 0;
};

struct SearchMode {
  /// 1.0 is best-first. Larger values run focal search, preferring fewer soft collisions
  /// among nodes with f <= weight * f_min.
  double focal_weight = 1.0;

  static SearchMode best_first() { return {}; }
  static SearchMode focal(double w) { return {w}; }
};

struct SearchResult {
  std::optional<Path> path;
  /// Minimum f in the open list when the search stopped; a lower bound on the optimal cost.
  int lower_bound = 0;
  int soft_collisions = 0;
  std::size_t expanded = 0;
};

/// Multi-Label A* over (location, time, label) states. The label counts goals visited so
/// far and increments on arrival at goals[label]. A path is complete once every goal has
/// been visited and the agent rests on the final goal with no later prohibition there.
/// `soft` (optional) supplies other agents' occupancy for collision-count tie-breaking.
SearchResult multi_label_astar(const DistanceCache& dist, CellId start,
                               std::span<const CellId> goals, const ReservationTable& hard,
                               SearchMode mode = SearchMode::best_first(),
                               const ReservationTable* soft = nullptr);

struct Conflict {
  enum class Kind { kVertex, kEdge };
  Kind kind = Kind::kVertex;
  int agent1 = -1;  // agent1 < agent2
  int agent2 = -1;
  /// Vertex: the shared cell in `from`. Edge: agent1 moves from -> to, agent2 to -> from.
  CellId from = -1;
  CellId to = -1;
  int time = 0;
  friend bool operator==(const Conflict&, const Conflict&) = default;
};

/// All vertex and swap conflicts at timesteps covered by w, sorted by (time, agent1, agent2).
/// An agent whose path has ended counts on its final cell through timestep `hold` only.
std::vector<Conflict> detect_conflicts(std::span<const Path> paths, Horizon w, Horizon hold = Horizon::infinite());
/// Same as detect_conflicts(...).front() without building the full list.
std::optional<Conflict> first_conflict(std::span<const Path> paths, Horizon w, Horizon hold = Horizon::infinite());
/// Conflicts between two specific paths.
bool paths_conflict(const Path& a, const Path& b, Horizon w, Horizon hold = Horizon::infinite());

}  // namespace rhcr
