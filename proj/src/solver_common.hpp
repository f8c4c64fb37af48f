#pragma once

#include <chrono>

#include "rhcr/solvers.hpp"

namespace rhcr::detail {

class Deadline {
 public:
  explicit Deadline(double seconds)
      : start_(std::chrono::steady_clock::now()), budget_(seconds) {}

  double elapsed() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }
  bool expired() const { return elapsed() > budget_; }

 private:
  std::chrono::steady_clock::time_point start_;
  double budget_;
};

inline SearchResult plan_agent(const WindowedMapfProblem& p, int agent, const ReservationTable& hard,
                               SearchMode mode, const ReservationTable* soft, SolverStats& stats) {
  const AgentTask& a = p.agents[agent];
  SearchResult r = multi_label_astar(*p.dist, a.start, a.goals, hard, mode, soft);
  ++stats.low_level_calls;
  stats.low_level_expanded += r.expanded;
  return r;
}

}  // namespace rhcr::detail
