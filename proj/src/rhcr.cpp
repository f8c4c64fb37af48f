#include "rhcr/rhcr.hpp"

#include <algorithm>
#include <chrono>
#include <stdexcept>

namespace rhcr {

void validate(const HorizonConfig& cfg) {
  if (cfg.h < 1) throw std::invalid_argument("replanning period h must be >= 1");
  if (!cfg.w.is_infinite() && cfg.w.value() < cfg.h) throw std::invalid_argument("time horizon w must be >= h");
  if (cfg.p < 0) throw std::invalid_argument("potential threshold p must be >= 0");
  if (cfg.w_step < 1) throw std::invalid_argument("w_step must be >= 1");
  if (cfg.cap_factor < 1) throw std::invalid_argument("cap_factor must be >= 1");
}

int compute_d(const DistanceCache& dist, const AgentState& a) {
  if (a.goals.empty()) return 0;
  return compute_h_value(dist, a.goals, a.location, 0);
}

void top_up_goals(const DistanceCache& dist, AgentState& a, TaskAssigner& assigner, int h) {
  if (a.dummy_goal) {
    a.goals.pop_back();
    a.dummy_goal = false;
  }
  int d = compute_d(dist, a);
  if (d == kUnreachable) {
    a.goals.clear();
    d = 0;
  }
  // A stream of zero-length legs would never raise d; bound the number of requests.
  for (int asked = 0; d < h && asked < 16 * h + 64; ++asked) {
    const CellId reference = a.goals.empty() ? a.location : a.goals.back();
    const std::optional<CellId> next = assigner.next_goal(a, reference);
    if (!next) break;
    const int leg = dist.dist(reference, *next);
    if (leg == kUnreachable) break;
    a.goals.push_back(*next);
    d += leg;
  }
  if (a.goals.empty()) {
    a.goals.push_back(a.location);
    a.dummy_goal = true;
  }
}

int potential(const DistanceCache& dist, std::span<const AgentState> agents, std::span<const Path> paths,
              Horizon w) {
  int at = w.value();
  if (w.is_infinite()) {
    at = 0;
    for (const Path& p : paths) at = std::max(at, p.cost());
  }
  int count = 0;
  for (std::size_t i = 0; i < agents.size(); ++i) {
    const AgentState& a = agents[i];
    const Path& p = paths[i];
    const int visited = static_cast<int>(
        std::upper_bound(p.goal_visit_times.begin(), p.goal_visit_times.end(), at) - p.goal_visit_times.begin());
    const int before = compute_h_value(dist, a.goals, a.location, 0);
    const int after = compute_h_value(dist, a.goals, p.at(at), visited);
    if (after < before) ++count;
  }
  return count;
}

WindowedMapfProblem make_problem(const DistanceCache& dist, std::span<const AgentState> agents, Horizon w,
                                 int h) {
  WindowedMapfProblem problem;
  problem.dist = &dist;
  problem.window = w;
  if (w.is_infinite()) problem.hold = Horizon::steps(h);
  problem.agents.reserve(agents.size());
  for (const AgentState& a : agents) problem.agents.push_back({a.id, a.location, a.goals});
  return problem;
}

EpisodeResult plan_episode(const DistanceCache& dist, std::span<const AgentState> agents,
                           const HorizonConfig& cfg, SolverKind solver, const SolverOptions& opt) {
  validate(cfg);
  const auto start = std::chrono::steady_clock::now();
  EpisodeResult result;
  const long long cap = static_cast<long long>(cfg.cap_factor) * cfg.w.value();
  Horizon w = cfg.w;
  while (true) {
    result.solution = solve(solver, make_problem(dist, agents, w, cfg.h), opt);
    ++result.solver_calls;
    result.w_used = w;
    if (!result.solution.solved()) break;
    result.potential = potential(dist, agents, result.solution.paths, w);
    if (result.potential >= cfg.p || w.is_infinite()) break;
    if (w.value() >= cap) {
      result.capped = true;
      break;
    }
    w = Horizon::steps(static_cast<int>(std::min<long long>(w.value() + cfg.w_step, cap)));
  }
  result.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

int advance(std::span<AgentState> agents, std::span<const Path> paths, int steps) {
  int completed = 0;
  for (std::size_t i = 0; i < agents.size(); ++i) {
    AgentState& a = agents[i];
    const Path& p = paths[i];
    a.location = p.at(steps);
    const int visited = static_cast<int>(
        std::upper_bound(p.goal_visit_times.begin(), p.goal_visit_times.end(), steps) - p.goal_visit_times.begin());
    int real = visited;
    if (a.dummy_goal && visited == static_cast<int>(a.goals.size())) {
      --real;
      a.dummy_goal = false;
    }
    a.goals.erase(a.goals.begin(), a.goals.begin() + visited);
    a.completed += real;
    completed += real;
  }
  return completed;
}

}  // namespace rhcr
