// Bounded-horizon CBS and ECBS. Both share one high level: nodes are ordered by their
// lower bound, and a focal list of nodes with cost <= factor * min lower bound is ordered
// by number of conflicts. With factor 1 this is plain CBS (cost first, then conflicts).

#include <algorithm>
#include <array>
#include <cmath>
#include <memory>
#include <queue>
#include <set>
#include <stdexcept>

#include "rhcr/solvers.hpp"
#include "solver_common.hpp"

namespace rhcr {

namespace {

struct CbsConstraint {
  int agent;
  CellId from;
  CellId to;  // -1 for a vertex constraint on `from`
  int t;
};

struct CtNode {
  std::shared_ptr<const CtNode> parent;
  std::optional<CbsConstraint> added;
  std::vector<Path> paths;
  std::vector<int> agent_lb;
  int cost = 0;
  int lb = 0;
  int conflicts = 0;
  int full_conflicts = 0;
  int makespan = 0;
  std::optional<Conflict> first;
  std::size_t id = 0;
};

class ConflictBasedSearch {
 public:
  ConflictBasedSearch(const WindowedMapfProblem& p, const SolverOptions& opt, double factor)
      : p_(p), opt_(opt), factor_(std::max(1.0, factor)), deadline_(opt.time_limit_s) {}

  Solution run() {
    Solution sol;
    const int m = static_cast<int>(p_.agents.size());
    const int cells = p_.grid().size();

    auto root = std::make_shared<CtNode>();
    root->paths.resize(m);
    root->agent_lb.resize(m);
    ReservationTable soft(cells, p_.window, p_.hold);
    const ReservationTable none(cells, p_.window, p_.hold);
    for (int a = 0; a < m; ++a) {
      SearchResult r = detail::plan_agent(p_, a, none, SearchMode::focal(factor_), &soft, stats_);
      if (!r.path) return finish(sol, SolveStatus::kNoSolution);
      soft.add_path(*r.path);
      root->paths[a] = std::move(*r.path);
      root->agent_lb[a] = r.lower_bound;
    }
    evaluate(*root);
    push(root);

    while (!focal_.empty()) {
      if (deadline_.expired()) return finish(sol, SolveStatus::kTimeLimit);
      const std::size_t id = focal_.top().id;
      focal_.pop();
      if (!nodes_[id]) continue;  // already expanded through the fallback entry
      std::shared_ptr<const CtNode> node = nodes_[id];
      lb_at_pop_ = open_.begin()->first;
      open_.erase({node->lb, id});
      ++stats_.high_level_expanded;

      if (node->conflicts == 0) {
        sol.paths = node->paths;
        sol.flowtime = node->cost;
        sol.lower_bound = lb_at_pop_;
        nodes_.clear();
        return finish(sol, SolveStatus::kSolved);
      }
      nodes_[id].reset();

      const Conflict& c = *node->first;
      std::array<CbsConstraint, 2> splits;
      if (c.kind == Conflict::Kind::kVertex) {
        splits = {CbsConstraint{c.agent1, c.from, -1, c.time}, CbsConstraint{c.agent2, c.from, -1, c.time}};
      } else {
        splits = {CbsConstraint{c.agent1, c.from, c.to, c.time}, CbsConstraint{c.agent2, c.to, c.from, c.time}};
      }
      for (const CbsConstraint& con : splits) {
        auto child = std::make_shared<CtNode>();
        child->parent = node;
        child->added = con;
        child->paths = node->paths;
        child->agent_lb = node->agent_lb;
        if (!replan(*child, con.agent)) continue;
        evaluate(*child);
        push(child);
      }
      // Raise the bound only once the children are in open: they may sit below every other node.
      refresh_focal();
      if (focal_.empty() && !open_.empty()) {
        const std::size_t best = open_.begin()->second;
        focal_.push(entry(*nodes_[best], best));
      }
    }
    return finish(sol, SolveStatus::kNoSolution);
  }

 private:
  struct FocalEntry {
    int conflicts;
    int cost;
    std::size_t id;
    int full;
    int makespan;
    bool operator<(const FocalEntry& o) const {
      if (conflicts != o.conflicts) return conflicts > o.conflicts;
      // Ties: fewer conflicts past the window, then shorter makespan.
      if (full != o.full) return full > o.full;
      if (makespan != o.makespan) return makespan > o.makespan;
      if (cost != o.cost) return cost > o.cost;
      return id > o.id;
    }
  };

  Solution& finish(Solution& sol, SolveStatus status) {
    sol.status = status;
    if (status != SolveStatus::kSolved) {
      sol.paths.clear();
      sol.lower_bound = open_.empty() ? lb_at_pop_ : open_.begin()->first;
    }
    stats_.runtime_s = deadline_.elapsed();
    sol.stats = stats_;
    return sol;
  }

  static FocalEntry entry(const CtNode& n, std::size_t id) { return {n.conflicts, n.cost, id, n.full_conflicts, n.makespan}; }

  int bound(int lb) const { return static_cast<int>(std::floor(factor_ * lb + 1e-9)); }

  void evaluate(CtNode& n) const {
    n.cost = flowtime(n.paths);
    n.lb = 0;
    for (int v : n.agent_lb) n.lb += v;
    const std::vector<Conflict> all = detect_conflicts(n.paths, p_.window, p_.hold);
    n.conflicts = static_cast<int>(all.size());
    if (!all.empty()) n.first = all.front();
    n.full_conflicts = static_cast<int>(detect_conflicts(n.paths, Horizon::infinite(), p_.hold).size());
    n.makespan = 0;
    for (const Path& p : n.paths) n.makespan = std::max(n.makespan, p.cost());
  }

  void push(std::shared_ptr<CtNode> n) {
    n->id = nodes_.size();
    ++stats_.high_level_generated;
    open_.insert({n->lb, n->id});
    if (n->id == 0) lb_min_ = n->lb;
    if (n->cost <= bound(lb_min_)) focal_.push(entry(*n, n->id));
    nodes_.push_back(std::move(n));
  }

  // Keeps focal_ = { open nodes with cost <= factor * min lb } as the minimum lb rises.
  void refresh_focal() {
    if (open_.empty()) return;
    const int new_min = open_.begin()->first;
    if (new_min <= lb_min_) return;
    const int old_bound = bound(lb_min_);
    lb_min_ = new_min;
    const int new_bound = bound(lb_min_);
    for (const auto& [lb, id] : open_) {
      const CtNode& n = *nodes_[id];
      if (n.cost > old_bound && n.cost <= new_bound) focal_.push(entry(n, id));
    }
  }

  bool replan(CtNode& child, int agent) {
    const int cells = p_.grid().size();
    ReservationTable hard(cells, p_.window, p_.hold);
    for (const CtNode* n = &child; n != nullptr; n = n->parent.get()) {
      if (!n->added || n->added->agent != agent) continue;
      const CbsConstraint& con = *n->added;
      if (con.to < 0) {
        hard.add_vertex(con.from, con.t);
      } else {
        hard.add_edge(con.from, con.to, con.t);
      }
    }
    ReservationTable soft(cells, p_.window, p_.hold);
    for (int a = 0; a < static_cast<int>(child.paths.size()); ++a) {
      if (a != agent) soft.add_path(child.paths[a]);
    }
    SearchResult r = detail::plan_agent(p_, agent, hard, SearchMode::focal(factor_), &soft, stats_);
    if (!r.path) return false;
    child.paths[agent] = std::move(*r.path);
    // Constraints only accumulate, so the parent's bound still holds.
    child.agent_lb[agent] = std::max(child.agent_lb[agent], r.lower_bound);
    return true;
  }

  const WindowedMapfProblem& p_;
  const SolverOptions& opt_;
  double factor_;
  detail::Deadline deadline_;
  SolverStats stats_;
  std::vector<std::shared_ptr<const CtNode>> nodes_;
  std::set<std::pair<int, std::size_t>> open_;
  std::priority_queue<FocalEntry> focal_;
  int lb_min_ = 0;
  int lb_at_pop_ = 0;
};

}  // namespace

Solution solve_cbs(const WindowedMapfProblem& p, const SolverOptions& opt) {
  validate(p);
  return ConflictBasedSearch(p, opt, 1.0).run();
}

Solution solve_ecbs(const WindowedMapfProblem& p, const SolverOptions& opt) {
  validate(p);
  if (opt.suboptimality < 1.0) throw std::invalid_argument("suboptimality factor must be >= 1");
  return ConflictBasedSearch(p, opt, opt.suboptimality).run();
}

}  // namespace rhcr
