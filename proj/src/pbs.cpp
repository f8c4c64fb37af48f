// Bounded-horizon Priority-Based Search: depth-first search over partial priority orders.

#include <algorithm>
#include <memory>
#include <stdexcept>

#include "rhcr/solvers.hpp"
#include "solver_common.hpp"

namespace rhcr {

namespace {

struct PtNode {
  std::vector<Path> paths;
  /// higher[a]: agents directly given priority over a.
  std::vector<std::vector<int>> higher;
  int cost = 0;
  std::optional<Conflict> first;
};

class PriorityBasedSearch {
 public:
  PriorityBasedSearch(const WindowedMapfProblem& p, const SolverOptions& opt)
      : p_(p), m_(static_cast<int>(p.agents.size())), deadline_(opt.time_limit_s) {}

  Solution run() {
    Solution sol;
    auto root = std::make_unique<PtNode>();
    root->paths.resize(m_);
    root->higher.resize(m_);
    const ReservationTable none(p_.grid().size(), p_.window, p_.hold);
    for (int a = 0; a < m_; ++a) {
      SearchResult r = detail::plan_agent(p_, a, none, SearchMode::best_first(), nullptr, stats_);
      if (!r.path) return finish(sol, SolveStatus::kNoSolution);
      root->paths[a] = std::move(*r.path);
      sol.lower_bound += r.lower_bound;
    }
    evaluate(*root);
    ++stats_.high_level_generated;

    std::vector<std::unique_ptr<PtNode>> stack;
    stack.push_back(std::move(root));
    while (!stack.empty()) {
      if (deadline_.expired()) return finish(sol, SolveStatus::kTimeLimit);
      std::unique_ptr<PtNode> node = std::move(stack.back());
      stack.pop_back();
      ++stats_.high_level_expanded;
      if (!node->first) {
        sol.flowtime = node->cost;
        sol.paths = std::move(node->paths);
        return finish(sol, SolveStatus::kSolved);
      }

      const Conflict c = *node->first;
      std::vector<std::unique_ptr<PtNode>> children;
      for (const auto& [hi, lo] : {std::pair{c.agent1, c.agent2}, std::pair{c.agent2, c.agent1}}) {
        if (reaches_lower(*node, lo, hi)) continue;  // lo already outranks hi
        auto child = std::make_unique<PtNode>(*node);
        child->higher[lo].push_back(hi);
        if (!update_plan(*child, lo)) continue;
        evaluate(*child);
        ++stats_.high_level_generated;
        children.push_back(std::move(child));
      }
      // The cheaper child goes on top of the stack.
      if (children.size() == 2 && children[0]->cost < children[1]->cost) std::swap(children[0], children[1]);
      for (auto& ch : children) stack.push_back(std::move(ch));
    }
    return finish(sol, SolveStatus::kNoSolution);
  }

 private:
  Solution& finish(Solution& sol, SolveStatus status) {
    sol.status = status;
    if (status != SolveStatus::kSolved) sol.paths.clear();
    stats_.runtime_s = deadline_.elapsed();
    sol.stats = stats_;
    return sol;
  }

  void evaluate(PtNode& n) const {
    n.cost = flowtime(n.paths);
    n.first = first_conflict(n.paths, p_.window, p_.hold);
  }

  // True if `to` is reachable from `from` following lower-priority edges.
  bool reaches_lower(const PtNode& n, int from, int to) const {
    const std::vector<int> below = lower_closure(n, from);
    return std::find(below.begin(), below.end(), to) != below.end();
  }

  std::vector<std::vector<int>> lower_lists(const PtNode& n) const {
    std::vector<std::vector<int>> lower(m_);
    for (int a = 0; a < m_; ++a) {
      for (int h : n.higher[a]) lower[h].push_back(a);
    }
    return lower;
  }

  std::vector<int> lower_closure(const PtNode& n, int from) const {
    const auto lower = lower_lists(n);
    std::vector<char> seen(m_, 0);
    std::vector<int> out{from};
    seen[from] = 1;
    for (std::size_t i = 0; i < out.size(); ++i) {
      for (int b : lower[out[i]]) {
        if (!seen[b]) {
          seen[b] = 1;
          out.push_back(b);
        }
      }
    }
    return out;
  }

  std::vector<int> higher_closure(const PtNode& n, int a) const {
    std::vector<char> seen(m_, 0);
    std::vector<int> out;
    std::vector<int> todo = n.higher[a];
    while (!todo.empty()) {
      const int b = todo.back();
      todo.pop_back();
      if (seen[b]) continue;
      seen[b] = 1;
      out.push_back(b);
      for (int c : n.higher[b]) todo.push_back(c);
    }
    std::sort(out.begin(), out.end());
    return out;
  }

  // Replans `root` and, in topological order, every lower agent whose path now conflicts
  // with a higher-priority path.
  bool update_plan(PtNode& n, int root) {
    const std::vector<int> affected = lower_closure(n, root);
    const std::vector<int> order = topological(n, affected);
    for (int a : order) {
      const std::vector<int> above = higher_closure(n, a);
      bool needs = a == root;
      for (std::size_t i = 0; !needs && i < above.size(); ++i) {
        needs = paths_conflict(n.paths[a], n.paths[above[i]], p_.window, p_.hold);
      }
      if (!needs) continue;
      ReservationTable hard(p_.grid().size(), p_.window, p_.hold);
      for (int b : above) hard.add_path(n.paths[b]);
      SearchResult r = detail::plan_agent(p_, a, hard, SearchMode::best_first(), nullptr, stats_);
      if (!r.path) return false;
      n.paths[a] = std::move(*r.path);
    }
    return true;
  }

  // Kahn's algorithm restricted to `subset`; ties broken by agent index.
  std::vector<int> topological(const PtNode& n, const std::vector<int>& subset) const {
    std::vector<char> in(m_, 0);
    for (int a : subset) in[a] = 1;
    std::vector<int> indeg(m_, 0);
    for (int a : subset) {
      for (int h : n.higher[a]) indeg[a] += in[h];
    }
    const auto lower = lower_lists(n);
    std::vector<int> ready;
    for (int a : subset) {
      if (indeg[a] == 0) ready.push_back(a);
    }
    std::vector<int> out;
    while (!ready.empty()) {
      auto it = std::min_element(ready.begin(), ready.end());
      const int a = *it;
      ready.erase(it);
      out.push_back(a);
      for (int b : lower[a]) {
        if (in[b] && --indeg[b] == 0) ready.push_back(b);
      }
    }
    return out;
  }

  const WindowedMapfProblem& p_;
  int m_;
  detail::Deadline deadline_;
  SolverStats stats_;
};

}  // namespace

Solution solve_pbs(const WindowedMapfProblem& p, const SolverOptions& opt) {
  validate(p);
  return PriorityBasedSearch(p, opt).run();
}

}  // namespace rhcr
