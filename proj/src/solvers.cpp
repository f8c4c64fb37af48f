#include "rhcr/solvers.hpp"

#include <set>
#include <stdexcept>

namespace rhcr {

void validate(const WindowedMapfProblem& p) {
  if (p.dist == nullptr) throw std::invalid_argument("problem has no distance cache");
  const Grid& g = p.grid();
  if (p.hold.value() < 0) throw std::invalid_argument("hold limit must be >= 0");
  std::set<int> ids;
  std::set<CellId> starts;
  for (const AgentTask& a : p.agents) {
    if (!ids.insert(a.id).second) throw std::invalid_argument("duplicate agent id " + std::to_string(a.id));
    if (a.start < 0 || a.start >= g.size() || !g.passable(a.start)) {
      throw std::invalid_argument("agent " + std::to_string(a.id) + " starts on a blocked cell");
    }
    if (!starts.insert(a.start).second) {
      throw std::invalid_argument("agent " + std::to_string(a.id) + " shares its start cell");
    }
    if (a.goals.empty()) throw std::invalid_argument("agent " + std::to_string(a.id) + " has no goals");
    for (CellId goal : a.goals) {
      if (goal < 0 || goal >= g.size() || !g.passable(goal)) {
        throw std::invalid_argument("agent " + std::to_string(a.id) + " has a blocked goal");
      }
    }
    if (compute_h_value(*p.dist, a.goals, a.start, 0) == kUnreachable) {
      throw std::invalid_argument("agent " + std::to_string(a.id) + " cannot reach its goals");
    }
  }
}

int flowtime(const std::vector<Path>& paths) {
  int sum = 0;
  for (const Path& p : paths) sum += p.cost();
  return sum;
}

std::string_view to_string(SolverKind k) {
  switch (k) {
    case SolverKind::kCbs: return "cbs";
    case SolverKind::kEcbs: return "ecbs";
    case SolverKind::kCaStar: return "castar";
    case SolverKind::kPbs: return "pbs";
  }
  return "?";
}

std::optional<SolverKind> parse_solver(std::string_view name) {
  if (name == "cbs") return SolverKind::kCbs;
  if (name == "ecbs") return SolverKind::kEcbs;
  if (name == "castar") return SolverKind::kCaStar;
  if (name == "pbs") return SolverKind::kPbs;
  return std::nullopt;
}

Solution solve(SolverKind kind, const WindowedMapfProblem& p, const SolverOptions& opt) {
  switch (kind) {
    case SolverKind::kCbs: return solve_cbs(p, opt);
    case SolverKind::kEcbs: return solve_ecbs(p, opt);
    case SolverKind::kCaStar: return solve_ca_star(p, opt);
    case SolverKind::kPbs: return solve_pbs(p, opt);
  }
  throw std::invalid_argument("unknown solver");
}

}  // namespace rhcr
