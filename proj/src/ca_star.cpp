// Bounded-horizon cooperative A* with random restarts over total priority orders.

#include <algorithm>
#include <numeric>
#include <random>
#include <stdexcept>

#include "rhcr/solvers.hpp"
#include "solver_common.hpp"

namespace rhcr {

Solution solve_ca_star(const WindowedMapfProblem& p, const SolverOptions& opt) {
  validate(p);
  if (opt.restarts < 1) throw std::invalid_argument("restarts must be >= 1");
  detail::Deadline deadline(opt.time_limit_s);
  Solution sol;
  const int m = static_cast<int>(p.agents.size());
  std::mt19937_64 rng(opt.seed);
  std::vector<int> order(m);
  std::iota(order.begin(), order.end(), 0);

  sol.status = SolveStatus::kNoSolution;
  for (int attempt = 0; attempt < opt.restarts; ++attempt) {
    if (deadline.expired()) {
      sol.status = SolveStatus::kTimeLimit;
      break;
    }
    std::shuffle(order.begin(), order.end(), rng);
    sol.stats.restarts = attempt;
    ++sol.stats.high_level_expanded;
    ReservationTable reserved(p.grid().size(), p.window, p.hold);
    std::vector<Path> paths(m);
    bool ok = true;
    for (int a : order) {
      SearchResult r = detail::plan_agent(p, a, reserved, SearchMode::best_first(), nullptr, sol.stats);
      if (!r.path) {
        ok = false;
        break;
      }
      reserved.add_path(*r.path);
      paths[a] = std::move(*r.path);
    }
    if (ok) {
      sol.status = SolveStatus::kSolved;
      sol.flowtime = flowtime(paths);
      sol.paths = std::move(paths);
      break;
    }
  }
  sol.stats.runtime_s = deadline.elapsed();
  return sol;
}

}  // namespace rhcr
