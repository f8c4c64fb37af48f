#pragma once

#include <optional>
#include <span>
#include <vector>

#include "rhcr/grid.hpp"
#include "rhcr/search.hpp"
#include "rhcr/solvers.hpp"

namespace rhcr {

struct HorizonConfig {
  Horizon w = Horizon::steps(5);
  int h = 5;
  /// Minimum number of agents that must make progress within w steps.
  int p = 0;
  int w_step = 1;
  /// Escalation stops at cap_factor * w.
  int cap_factor = 4;
};

/// Throws std::invalid_argument unless h >= 1, w >= h, p >= 0, w_step >= 1, cap_factor >= 1.
void validate(const HorizonConfig& cfg);

struct AgentState {
  int id = 0;
  CellId location = 0;
  GoalSequence goals;
  int completed = 0;
  /// goals.back() is a placeholder at the agent's own cell, not a real task.
  bool dummy_goal = false;
};

/// Source of new goal locations, outside of the planner.
class TaskAssigner {
 public:
  virtual ~TaskAssigner() = default;
  /// Next goal for `agent`, to be appended after `reference` (the agent's last queued goal,
  /// or its location when it has none). nullopt when no task is available.
  virtual std::optional<CellId> next_goal(const AgentState& agent, CellId reference) = 0;
};

/// Lower bound on the timesteps the agent needs to visit all its goals (Eq. 1).
/// 0 for an empty goal list; kUnreachable when some leg is impossible.
int compute_d(const DistanceCache& dist, const AgentState& a);

/// Appends goals until compute_d >= h. Goals that became unreachable are dropped. When the
/// agent ends up with no goal at all it gets a dummy goal at its current cell.
void top_up_goals(const DistanceCache& dist, AgentState& a, TaskAssigner& assigner, int h);

/// Number of agents whose remaining cost at timestep w (or at the makespan when w is
/// infinite) is strictly below their cost at timestep 0.
int potential(const DistanceCache& dist, std::span<const AgentState> agents, std::span<const Path> paths,
              Horizon w);

struct EpisodeResult {
  Solution solution;
  Horizon w_used;
  int potential = 0;
  /// Escalation stopped at the cap with potential still below p.
  bool capped = false;
  int solver_calls = 0;
  double runtime_s = 0.0;
};

/// Solves one Windowed MAPF instance, growing w by w_step while potential < p.
EpisodeResult plan_episode(const DistanceCache& dist, std::span<const AgentState> agents,
                           const HorizonConfig& cfg, SolverKind solver, const SolverOptions& opt);

/// Moves every agent `steps` timesteps along its path and drops the goals visited by then.
/// Returns the number of real (non-dummy) goals completed.
int advance(std::span<AgentState> agents, std::span<const Path> paths, int steps);

/// With an infinite w, finished agents are held only through the replanning period h:
/// holding forever would make agents that share a final goal unsolvable.
WindowedMapfProblem make_problem(const DistanceCache& dist, std::span<const AgentState> agents, Horizon w,
                                 int h);

}  // namespace rhcr
