#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rhcr/grid.hpp"
#include "rhcr/search.hpp"

namespace rhcr {

struct AgentTask {
  int id = 0;
  CellId start = 0;
  GoalSequence goals;
};

/// One Windowed MAPF call: every agent must visit its goals in order, and the plan must
/// be collision-free for timesteps 0..w.
struct WindowedMapfProblem {
  const DistanceCache* dist = nullptr;
  std::vector<AgentTask> agents;
  Horizon window = Horizon::infinite();
  /// A finished agent occupies its final cell through max(path end, hold), then no longer
  /// counts. Infinite (the default) is the usual stay-at-goal rule.
  Horizon hold = Horizon::infinite();

  const Grid& grid() const { return dist->grid(); }
};

/// Throws std::invalid_argument when ids repeat, a start is blocked or shared, goal lists
/// are empty, or a goal sequence is unreachable.
void validate(const WindowedMapfProblem& p);

enum class SolveStatus { kSolved, kNoSolution, kTimeLimit };

struct SolverStats {
  std::size_t low_level_calls = 0;
  std::size_t low_level_expanded = 0;
  std::size_t high_level_generated = 0;
  std::size_t high_level_expanded = 0;
  int restarts = 0;
  double runtime_s = 0.0;
};

struct Solution {
  SolveStatus status = SolveStatus::kNoSolution;
  std::vector<Path> paths;
  /// Sum of path costs (arrival at the final goal cell).
  int flowtime = 0;
  /// Lower bound on the optimal flowtime known when the search stopped.
  int lower_bound = 0;
  SolverStats stats;

  bool solved() const { return status == SolveStatus::kSolved; }
};

struct SolverOptions {
  double time_limit_s = 60.0;
  /// ECBS focal factor, >= 1.
  double suboptimality = 1.0;
  /// CA* attempts (first attempt included).
  int restarts = 100;
  std::uint64_t seed = 0;
};

enum class SolverKind { kCbs, kEcbs, kCaStar, kPbs };

std::string_view to_string(SolverKind k);
std::optional<SolverKind> parse_solver(std::string_view name);

Solution solve_cbs(const WindowedMapfProblem& p, const SolverOptions& opt = {});
Solution solve_ecbs(const WindowedMapfProblem& p, const SolverOptions& opt);
Solution solve_ca_star(const WindowedMapfProblem& p, const SolverOptions& opt);
Solution solve_pbs(const WindowedMapfProblem& p, const SolverOptions& opt = {});

Solution solve(SolverKind kind, const WindowedMapfProblem& p, const SolverOptions& opt);

int flowtime(const std::vector<Path>& paths);

}  // namespace rhcr
