#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "rhcr/solvers.hpp"

namespace rhcr {
namespace {

using oracle::grid_from;

// Heap-allocated grid so the cache's reference survives moves of the instance.
struct Instance {
  std::unique_ptr<Grid> owned;
  const Grid& grid;
  std::unique_ptr<DistanceCache> cache;
  WindowedMapfProblem problem;

  Instance(Grid g, std::vector<AgentTask> agents, Horizon w)
      : owned(std::make_unique<Grid>(std::move(g))), grid(*owned) {
    cache = std::make_unique<DistanceCache>(grid);
    problem.dist = cache.get();
    problem.agents = std::move(agents);
    problem.window = w;
  }
};

// Random instance with distinct starts and single goals; goals may coincide only when
// `allow_shared_goals` is set.
Instance random_instance(std::mt19937& rng, int rows, int cols, int agents, int goals_per_agent, Horizon w,
                         double obstacles = 0.2) {
  while (true) {
    std::vector<std::string> lines(rows, std::string(cols, '.'));
    for (auto& l : lines) {
      for (char& ch : l) ch = std::bernoulli_distribution(obstacles)(rng) ? '@' : '.';
    }
    Grid g = grid_from(lines);
    auto cells = g.passable_cells();
    if (static_cast<int>(cells.size()) < agents + 1) continue;
    std::shuffle(cells.begin(), cells.end(), rng);
    std::vector<AgentTask> tasks;
    std::vector<CellId> ends(cells.begin(), cells.end());
    std::shuffle(ends.begin(), ends.end(), rng);
    for (int a = 0; a < agents; ++a) {
      AgentTask t{a, cells[a], {}};
      for (int j = 0; j + 1 < goals_per_agent; ++j) t.goals.push_back(cells[rng() % cells.size()]);
      t.goals.push_back(ends[a]);  // distinct final goals keep the instance solvable more often
      tasks.push_back(t);
    }
    Instance inst(std::move(g), std::move(tasks), w);
    bool ok = true;
    for (const AgentTask& t : inst.problem.agents) {
      ok = ok && compute_h_value(*inst.cache, t.goals, t.start, 0) != kUnreachable;
    }
    if (ok) return inst;
  }
}

std::string describe(const Instance& inst) {
  std::string out;
  for (const auto& a : inst.problem.agents) {
    out += "agent " + std::to_string(a.id) + " start " + std::to_string(a.start) + " goals";
    for (CellId g : a.goals) out += " " + std::to_string(g);
    out += "\n";
  }
  return out;
}

void expect_solution_valid(const Instance& inst, const Solution& s) {
  ASSERT_TRUE(s.solved());
  ASSERT_EQ(s.paths.size(), inst.problem.agents.size());
  EXPECT_TRUE(detect_conflicts(s.paths, inst.problem.window).empty());
  EXPECT_EQ(s.flowtime, flowtime(s.paths));
  const Grid& g = inst.grid;
  for (std::size_t a = 0; a < s.paths.size(); ++a) {
    const Path& p = s.paths[a];
    const AgentTask& task = inst.problem.agents[a];
    EXPECT_EQ(p.locations.front(), task.start);
    ASSERT_EQ(p.goal_visit_times.size(), task.goals.size());
    for (std::size_t j = 0; j < task.goals.size(); ++j) EXPECT_EQ(p.at(p.goal_visit_times[j]), task.goals[j]);
    EXPECT_EQ(p.locations.back(), task.goals.back());
    for (std::size_t t = 1; t < p.locations.size(); ++t) {
      if (p.locations[t] == p.locations[t - 1]) continue;
      const auto& succ = g.successors(p.locations[t - 1]);
      EXPECT_NE(std::find(succ.begin(), succ.end(), p.locations[t]), succ.end());
    }
  }
}

TEST(Cbs, SingleAgentNoSplits) {
  Instance inst(grid_from({"....", "...."}), {{0, 0, {7}}}, Horizon::infinite());
  const Solution s = solve_cbs(inst.problem);
  expect_solution_valid(inst, s);
  EXPECT_EQ(s.flowtime, 4);
  EXPECT_EQ(s.stats.high_level_expanded, 1u);
}

TEST(Cbs, ForcedSwapMatchesJointOracle) {
  // Agents swap ends of the top row using the bottom-left cells as a siding.
  const Grid g = grid_from({"...", "..@"});
  Instance inst(g, {{0, 0, {2}}, {1, 2, {0}}}, Horizon::infinite());
  const Solution s = solve_cbs(inst.problem);
  expect_solution_valid(inst, s);
  EXPECT_EQ(s.flowtime, oracle::joint_optimal_flowtime(g, {0, 2}, {{2}, {0}}));
}

TEST(Cbs, MatchesJointOracleOnSmallInstances) {
  std::mt19937 rng(21);
  for (int trial = 0; trial < 80; ++trial) {
    // Three agents get single goals: with goal sequences some 3x3 puzzles need millions of
    // high-level nodes (plain CBS has no symmetry reasoning).
    const int agents = 2 + trial % 2;
    Instance inst = random_instance(rng, 3, 3, agents, agents == 2 ? 2 : 1, Horizon::infinite());
    std::vector<CellId> starts;
    std::vector<std::vector<CellId>> goals;
    for (const auto& a : inst.problem.agents) {
      starts.push_back(a.start);
      goals.push_back(a.goals);
    }
    const auto expect = oracle::joint_optimal_flowtime(inst.grid, starts, goals);
    // CBS cannot prove infeasibility, so only solvable instances are compared.
    if (!expect) continue;
    SolverOptions opt;
    opt.time_limit_s = 10;
    const Solution s = solve_cbs(inst.problem, opt);
    expect_solution_valid(inst, s);
    ASSERT_EQ(s.flowtime, *expect) << "trial " << trial << "\n" << write_map(inst.grid) << describe(inst);
  }
}

TEST(Cbs, WindowedTreeNoLargerThanInfinite) {
  std::mt19937 rng(22);
  double windowed = 0, full = 0;
  int count = 0;
  for (int trial = 0; trial < 40; ++trial) {
    Instance inst = random_instance(rng, 6, 6, 6, 1, Horizon::infinite(), 0.15);
    SolverOptions opt;
    opt.time_limit_s = 5;
    const Solution inf = solve_cbs(inst.problem, opt);
    inst.problem.window = Horizon::steps(3);
    const Solution win = solve_cbs(inst.problem, opt);
    if (!inf.solved() || !win.solved()) continue;
    expect_solution_valid(inst, win);
    windowed += win.stats.high_level_generated;
    full += inf.stats.high_level_generated;
    ++count;
  }
  ASSERT_GT(count, 20);
  EXPECT_LE(windowed / count, full / count);
}

TEST(Cbs, ReportsNoSolution) {
  // Two agents must swap on a dead-end corridor.
  Instance inst(grid_from({"..."}), {{0, 0, {2}}, {1, 2, {0}}}, Horizon::infinite());
  SolverOptions opt;
  opt.time_limit_s = 2;
  const Solution s = solve_cbs(inst.problem, opt);
  EXPECT_FALSE(s.solved());
}

TEST(Validate, RejectsBadProblems) {
  const Grid g = grid_from({".@."});
  DistanceCache cache(g);
  WindowedMapfProblem p{&cache, {{0, 0, {2}}}, Horizon::infinite()};
  EXPECT_THROW(validate(p), std::invalid_argument);
  p.agents = {{0, 0, {0}}, {0, 2, {2}}};
  EXPECT_THROW(validate(p), std::invalid_argument);
  p.agents = {{0, 1, {0}}};
  EXPECT_THROW(validate(p), std::invalid_argument);
  p.agents = {{0, 0, {}}};
  EXPECT_THROW(validate(p), std::invalid_argument);
  p.agents = {{0, 0, {0}}, {1, 0, {0}}};
  EXPECT_THROW(validate(p), std::invalid_argument);
}

TEST(Ecbs, FactorOneEqualsCbs) {
  std::mt19937 rng(31);
  for (int trial = 0; trial < 60; ++trial) {
    const Horizon w = trial % 2 ? Horizon::infinite() : Horizon::steps(2 + trial % 4);
    Instance inst = random_instance(rng, 2 + rng() % 4, 2 + rng() % 4, 1 + rng() % 3, 1 + rng() % 2, w);
    SolverOptions opt;
    opt.time_limit_s = 1;
    opt.suboptimality = 1.0;
    const Solution cbs = solve_cbs(inst.problem, opt);
    const Solution ecbs = solve_ecbs(inst.problem, opt);
    ASSERT_EQ(cbs.status, ecbs.status);
    if (cbs.solved()) {
      EXPECT_EQ(cbs.flowtime, ecbs.flowtime) << "trial " << trial;
    }
  }
}

TEST(Ecbs, SingleAgentIsOptimalForAnyFactor) {
  Instance inst(grid_from({".....", ".@@@.", "....."}), {{0, 0, {14}}}, Horizon::infinite());
  SolverOptions opt;
  opt.suboptimality = 2.0;
  const Solution s = solve_ecbs(inst.problem, opt);
  expect_solution_valid(inst, s);
  EXPECT_EQ(s.flowtime, 6);
}

TEST(Ecbs, BoundHolds) {
  std::mt19937 rng(32);
  for (int trial = 0; trial < 25; ++trial) {
    Instance inst = random_instance(rng, 8, 8, 10, 2, Horizon::steps(5), 0.1);
    SolverOptions opt;
    opt.suboptimality = 1.1;
    opt.time_limit_s = 5;
    const Solution s = solve_ecbs(inst.problem, opt);
    if (!s.solved()) continue;
    expect_solution_valid(inst, s);
    EXPECT_LE(s.flowtime, 1.1 * s.lower_bound + 1e-9);
  }
}

// The bound must account for children whose lower bound sits below every other open node.
TEST(Ecbs, BoundHoldsWhenChildrenUndercutOpen) {
  const Grid g = grid_from({"..@@......", "......@.@.", "..@..@.@..", ".@.......@", ".......@@@",
                            "..@....@..", ".@.....@..", "..@.......", "..@.......", "@@....@@.."});
  const std::vector<std::pair<CellId, CellId>> ends = {{56, 40}, {23, 55}, {74, 79}, {30, 34}, {62, 56}, {38, 20},
                                                       {43, 41}, {51, 42}, {65, 76}, {45, 29}, {77, 86}, {54, 10}};
  std::vector<AgentTask> tasks;
  for (const auto& [s, t] : ends) tasks.push_back({static_cast<int>(tasks.size()), s, {t}});
  Instance inst(g, tasks, Horizon::steps(7));
  SolverOptions opt;
  opt.suboptimality = 1.1;
  opt.time_limit_s = 10;
  const Solution s = solve_ecbs(inst.problem, opt);
  expect_solution_valid(inst, s);
  EXPECT_LE(s.flowtime, 1.1 * s.lower_bound + 1e-9);
}

TEST(Ecbs, RejectsFactorBelowOne) {
  Instance inst(grid_from({".."}), {{0, 0, {1}}}, Horizon::infinite());
  SolverOptions opt;
  opt.suboptimality = 0.9;
  EXPECT_THROW(solve_ecbs(inst.problem, opt), std::invalid_argument);
}

TEST(CaStar, DisjointRoutesStayOptimal) {
  Instance inst(grid_from({".....", "@@@@@", "....."}), {{0, 0, {4}}, {1, 14, {10}}}, Horizon::infinite());
  SolverOptions opt;
  const Solution s = solve_ca_star(inst.problem, opt);
  expect_solution_valid(inst, s);
  EXPECT_EQ(s.flowtime, 8);
}

TEST(CaStar, HeadOnPairFindsTheWorkingOrder) {
  // Agent 1 leaves a side pocket to park on the corridor cell agent 0 must cross.
  // Planning agent 1 first blocks agent 0 for good, so only one order works.
  const Grid g = grid_from({"....", "@.@@"});
  Instance inst(g, {{0, g.cell(0, 0), {g.cell(0, 3)}}, {1, g.cell(1, 1), {g.cell(0, 1)}}}, Horizon::infinite());

  // Hand oracle: enumerate both orders with plain prioritized planning.
  auto plan_order = [&](std::vector<int> order) {
    ReservationTable reserved(g.size(), Horizon::infinite());
    for (int a : order) {
      const auto& t = inst.problem.agents[a];
      const SearchResult r = multi_label_astar(*inst.cache, t.start, t.goals, reserved);
      if (!r.path) return false;
      reserved.add_path(*r.path);
    }
    return true;
  };
  const bool first = plan_order({0, 1});
  const bool second = plan_order({1, 0});
  ASSERT_NE(first, second);

  SolverOptions opt;
  opt.seed = 5;
  opt.restarts = 20;
  const Solution s = solve_ca_star(inst.problem, opt);
  expect_solution_valid(inst, s);
  const Solution again = solve_ca_star(inst.problem, opt);
  EXPECT_EQ(s.paths, again.paths);
  EXPECT_EQ(s.stats.restarts, again.stats.restarts);
}

TEST(CaStar, ShortWindowKeepsShortestPaths) {
  const Grid g = grid_from({"....", "@.@@"});
  Instance inst(g, {{0, g.cell(0, 0), {g.cell(0, 3)}}, {1, g.cell(1, 1), {g.cell(0, 1)}}}, Horizon::steps(0));
  SolverOptions opt;
  const Solution s = solve_ca_star(inst.problem, opt);
  ASSERT_TRUE(s.solved());
  EXPECT_EQ(s.paths[0].cost(), 3);
  EXPECT_EQ(s.paths[1].cost(), 1);
}

TEST(Pbs, ConflictFreeRootHasNoSplits) {
  Instance inst(grid_from({".....", "@@@@@", "....."}), {{0, 0, {4}}, {1, 14, {10}}}, Horizon::steps(4));
  const Solution s = solve_pbs(inst.problem);
  expect_solution_valid(inst, s);
  EXPECT_EQ(s.stats.high_level_expanded, 1u);
}

TEST(Pbs, ValidAndNoBetterThanCbs) {
  std::mt19937 rng(41);
  int solved = 0;
  for (int trial = 0; trial < 40; ++trial) {
    const Horizon w = trial % 2 ? Horizon::infinite() : Horizon::steps(4);
    Instance inst = random_instance(rng, 4, 4, 3, 1, w, 0.1);
    SolverOptions opt;
    opt.time_limit_s = 5;
    const Solution pbs = solve_pbs(inst.problem, opt);
    const Solution cbs = solve_cbs(inst.problem, opt);
    if (!pbs.solved()) continue;
    ++solved;
    expect_solution_valid(inst, pbs);
    ASSERT_TRUE(cbs.solved());
    EXPECT_GE(pbs.flowtime, cbs.flowtime);
  }
  EXPECT_GT(solved, 30);
}

TEST(Solvers, FuzzAllSolversConflictFree) {
  std::mt19937 rng(51);
  for (int trial = 0; trial < 60; ++trial) {
    const Horizon w = trial % 3 == 0 ? Horizon::infinite() : Horizon::steps(1 + rng() % 6);
    Instance inst = random_instance(rng, 5 + rng() % 4, 5 + rng() % 4, 2 + rng() % 5, 1 + rng() % 3, w, 0.15);
    SolverOptions opt;
    opt.time_limit_s = 5;
    opt.suboptimality = 1.2;
    opt.seed = trial;
    for (SolverKind k : {SolverKind::kCbs, SolverKind::kEcbs, SolverKind::kCaStar, SolverKind::kPbs}) {
      const Solution s = solve(k, inst.problem, opt);
      if (s.solved()) expect_solution_valid(inst, s);
    }
  }
}

TEST(Solvers, ParseNames) {
  for (SolverKind k : {SolverKind::kCbs, SolverKind::kEcbs, SolverKind::kCaStar, SolverKind::kPbs}) {
    EXPECT_EQ(parse_solver(to_string(k)), k);
  }
  EXPECT_FALSE(parse_solver("lacam"));
}

}  // namespace
}  // namespace rhcr
