#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <map>
#include <random>
#include <set>

#include "oracles.hpp"
#include "rhcr/sim.hpp"
#include "scenes.hpp"

namespace rhcr {
namespace {

using oracle::grid_from;

AgentState agent(int id, CellId at) { return {id, at, {}, 0, false}; }

TEST(Fulfillment, SingleEndpointIsAlwaysDrawn) {
  Grid g = grid_from({"...E."});
  FulfillmentAssigner f(g, 1);
  for (int i = 0; i < 20; ++i) EXPECT_EQ(f.next_goal(agent(0, 0), i % 2 == 0 ? 0 : 3), g.cell(0, 3));
}

TEST(Fulfillment, EndpointsAndPodsArePooled) {
  Grid g = grid_from({"E.S", "@W."});
  FulfillmentAssigner f(g, 1);
  EXPECT_EQ(f.endpoints(), std::vector<CellId>({g.cell(0, 0), g.cell(0, 2)}));
}

TEST(Fulfillment, DrawsAreUniform) {
  Grid g = grid_from({"EEEE.", "E@EE.", "EEEE."});
  FulfillmentAssigner f(g, 7);
  const int k = static_cast<int>(f.endpoints().size());
  const int n = 10000;
  std::map<CellId, int> counts;
  for (int i = 0; i < n; ++i) ++counts[*f.next_goal(agent(i % 3, 0), g.cell(0, 4))];
  ASSERT_EQ(static_cast<int>(counts.size()), k);
  const double p = 1.0 / k;
  const double sigma = std::sqrt(n * p * (1 - p));
  for (const auto& [cell, c] : counts) EXPECT_LT(std::abs(c - n * p), 5 * sigma) << "cell " << cell;
}

TEST(Fulfillment, NeverRepeatsTheReference) {
  Grid g = grid_from({"EE", "EE"});
  FulfillmentAssigner f(g, 3);
  for (int i = 0; i < 500; ++i) EXPECT_NE(*f.next_goal(agent(0, 0), g.cell(1, 1)), g.cell(1, 1));
}

TEST(Fulfillment, SameSeedSameSequence) {
  Grid g = load_map_file(scene::map_path("fulfillment.map"));
  FulfillmentAssigner a(g, 42), b(g, 42), other(g, 43);
  std::vector<CellId> sa, sb, so;
  for (int i = 0; i < 200; ++i) {
    sa.push_back(*a.next_goal(agent(i % 5, 0), 0));
    sb.push_back(*b.next_goal(agent(i % 5, 0), 0));
    so.push_back(*other.next_goal(agent(i % 5, 0), 0));
  }
  EXPECT_EQ(sa, sb);
  EXPECT_NE(sa, so);
}

TEST(Fulfillment, MapWithoutEndpointsUsesLargestComponent) {
  Grid g = grid_from({"..@.", "..@."});
  FulfillmentAssigner f(g, 1);
  EXPECT_EQ(f.endpoints(), std::vector<CellId>({g.cell(0, 0), g.cell(0, 1), g.cell(1, 0), g.cell(1, 1)}));
}

TEST(Sorting, AlternatesStationAndDrop) {
  Grid g = grid_from({"W...E", ".....", "W...E"});
  DistanceCache dist(g);
  SortingAssigner s(g, dist, 5);
  CellId ref = g.cell(1, 2);
  for (int i = 0; i < 10; ++i) {
    const CellId goal = *s.next_goal(agent(0, ref), ref);
    EXPECT_EQ(g.role(goal), i % 2 == 0 ? EndpointRole::kWorkStation : EndpointRole::kEndpoint) << i;
    ref = goal;
  }
}

TEST(Sorting, AlternationIsPerAgent) {
  Grid g = grid_from({"W...E", "....."});
  DistanceCache dist(g);
  SortingAssigner s(g, dist, 5);
  EXPECT_EQ(g.role(*s.next_goal(agent(0, 7), 7)), EndpointRole::kWorkStation);
  EXPECT_EQ(g.role(*s.next_goal(agent(1, 7), 7)), EndpointRole::kWorkStation);
  EXPECT_EQ(g.role(*s.next_goal(agent(0, 7), 7)), EndpointRole::kEndpoint);
}

TEST(Sorting, EquidistantStationsPickLowerIndex) {
  Grid g = grid_from({"W...W", "..E.."});
  DistanceCache dist(g);
  SortingAssigner s(g, dist, 5);
  EXPECT_EQ(s.nearest_station(g.cell(0, 2)), g.cell(0, 0));
  EXPECT_EQ(s.next_goal(agent(0, g.cell(0, 2)), g.cell(0, 2)), g.cell(0, 0));
}

TEST(Sorting, NearestStationMatchesExhaustiveScan) {
  Grid g = load_map_file(scene::map_path("sorting.map"));
  DistanceCache dist(g);
  SortingAssigner s(g, dist, 5);
  std::vector<CellId> stations;
  for (CellId c = 0; c < g.size(); ++c) {
    if (g.passable(c) && g.role(c) == EndpointRole::kWorkStation) stations.push_back(c);
  }
  std::mt19937 rng(9);
  const std::vector<CellId> cells = largest_scc(g);
  for (int i = 0; i < 40; ++i) {
    const CellId from = cells[rng() % cells.size()];
    CellId best = -1;
    int best_d = kUnreachable;
    for (CellId st : stations) {
      const int d = oracle::ucs_distance(g, from, st);
      if (d < best_d) {
        best_d = d;
        best = st;
      }
    }
    EXPECT_EQ(s.nearest_station(from), best) << "from " << from;
  }
}

TEST(Sorting, MissingRolesAreRejected) {
  Grid g = grid_from({"....E"});
  DistanceCache dist(g);
  EXPECT_THROW(SortingAssigner(g, dist, 1), std::invalid_argument);
}

TEST(Components, LargestSccMatchesMutualReachability) {
  std::mt19937 rng(4);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<std::string> rows(4, std::string(5, '.'));
    for (auto& r : rows) {
      for (char& ch : r) ch = rng() % 100 < 25 ? '@' : '.';
    }
    std::string text = "4 5\n";
    for (const auto& r : rows) text += r + "\n";
    text += "DIRECTIONS\n";
    for (int r = 0; r < 4; ++r) {
      for (int c = 0; c < 5; ++c) {
        if (rows[r][c] == '@') continue;
        std::string mask;
        for (char m : std::string("NSEW")) {
          if (rng() % 100 < 70) mask += m;
        }
        text += std::to_string(r) + " " + std::to_string(c) + " " + (mask.empty() ? "-" : mask) + "\n";
      }
    }
    Grid g = load_map(text);
    // Oracle: group cells by their set of mutually reachable cells.
    const int n = g.size();
    std::vector<std::vector<int>> d(n);
    for (CellId a = 0; a < n; ++a) {
      d[a].resize(n);
      for (CellId b = 0; b < n; ++b) d[a][b] = g.passable(a) && g.passable(b) ? oracle::ucs_distance(g, a, b) : kUnreachable;
    }
    std::vector<CellId> best;
    for (CellId a = 0; a < n; ++a) {
      if (!g.passable(a)) continue;
      std::vector<CellId> comp;
      for (CellId b = 0; b < n; ++b) {
        if (d[a][b] != kUnreachable && d[b][a] != kUnreachable) comp.push_back(b);
      }
      if (comp.size() > best.size()) best = comp;
    }
    EXPECT_EQ(largest_scc(g), best) << text;
  }
}

TEST(Placement, FulfillmentStartsOnWorkStations) {
  Grid g = grid_from({"W.E", ".W."});
  EXPECT_EQ(initial_cells(g, Scenario::kFulfillment), std::vector<CellId>({g.cell(0, 0), g.cell(1, 1)}));
}

TEST(Placement, SortingFixtureStartsInsideOneComponent) {
  Grid g = load_map_file(scene::map_path("sorting.map"));
  const std::vector<CellId> cells = initial_cells(g, Scenario::kSorting);
  EXPECT_EQ(cells, largest_scc(g));
  EXPECT_EQ(detect_scenario(g), Scenario::kSorting);
}

TEST(Seeds, SubstreamsDiffer) {
  std::set<std::uint64_t> seen;
  for (std::uint64_t seed : {0ull, 1ull, 2ull, 1ull << 40}) {
    for (std::uint32_t s = 1; s <= 3; ++s) seen.insert(substream_seed(seed, s));
  }
  EXPECT_EQ(seen.size(), 12u);
  EXPECT_EQ(substream_seed(5, 2), substream_seed(5, 2));
}

SimulationConfig small_config(std::shared_ptr<const Grid> g, int m, SolverKind solver, std::uint64_t seed) {
  SimulationConfig cfg;
  cfg.grid = std::move(g);
  cfg.scenario = detect_scenario(*cfg.grid);
  cfg.m = m;
  cfg.horizon.h = 3;
  cfg.horizon.w = Horizon::steps(6);
  cfg.solver = solver;
  cfg.solver_options.time_limit_s = 10.0;
  cfg.solver_options.suboptimality = 1.5;
  cfg.timesteps = 60;
  cfg.seed = seed;
  cfg.record_history = true;
  return cfg;
}

TEST(Simulation, NoAgentsDoNothing) {
  auto g = std::make_shared<const Grid>(grid_from({"E..E"}));
  SimulationConfig cfg = small_config(g, 0, SolverKind::kPbs, 1);
  const SimulationResult r = run_simulation(cfg);
  EXPECT_EQ(r.throughput, 0.0);
  EXPECT_EQ(r.episodes, 0);
  EXPECT_EQ(r.completed, 0);
  EXPECT_FALSE(r.failed);
}

// One agent on an open grid never waits: it completes exactly the goals whose cumulative
// Manhattan distance fits in T, with goals redrawn from the assigner's own stream.
TEST(Simulation, SingleAgentClosedForm) {
  auto g = std::make_shared<const Grid>(grid_from({".....", ".....", ".....", ".....", "....."}));
  for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
    SimulationConfig cfg = small_config(g, 1, SolverKind::kPbs, seed);
    cfg.timesteps = 100;
    cfg.horizon.h = 5;
    cfg.horizon.w = Horizon::steps(5);
    const SimulationResult r = run_simulation(cfg);

    std::vector<CellId> cells = g->passable_cells();
    std::mt19937_64 placement(substream_seed(seed, 1));
    std::shuffle(cells.begin(), cells.end(), placement);
    CellId at = cells[0];
    FulfillmentAssigner stream(*g, substream_seed(seed, 2));
    int used = 0, expected = 0;
    while (true) {
      const CellId next = *stream.next_goal(agent(0, at), at);
      const auto [r0, c0] = g->location(at);
      const auto [r1, c1] = g->location(next);
      used += std::abs(r0 - r1) + std::abs(c0 - c1);
      if (used > cfg.timesteps) break;
      ++expected;
      at = next;
    }
    EXPECT_EQ(r.completed, expected) << "seed " << seed;
    EXPECT_DOUBLE_EQ(r.throughput, expected / 100.0);
  }
}

TEST(Simulation, HistoryIsConflictFreeAndCountsAgree) {
  std::mt19937 rng(21);
  const SolverKind kinds[] = {SolverKind::kCbs, SolverKind::kEcbs, SolverKind::kPbs, SolverKind::kCaStar};
  for (int trial = 0; trial < 8; ++trial) {
    std::vector<std::string> rows(7, std::string(7, '.'));
    for (auto& r : rows) {
      for (char& ch : r) ch = rng() % 100 < 15 ? '@' : (rng() % 100 < 30 ? 'E' : '.');
    }
    auto g = std::make_shared<const Grid>(grid_from(rows));
    const int m = 1 + static_cast<int>(rng() % 4);
    if (static_cast<int>(initial_cells(*g, Scenario::kFulfillment).size()) < m) continue;
    if (FulfillmentAssigner(*g, 0).endpoints().size() < 2) continue;
    SimulationConfig cfg = small_config(g, m, kinds[trial % 4], rng());
    const SimulationResult r = run_simulation(cfg);
    ASSERT_FALSE(r.failed) << r.failure;
    EXPECT_TRUE(audit_history(r.history).empty());
    EXPECT_EQ(r.history[0].size(), static_cast<std::size_t>(cfg.timesteps + 1));
    EXPECT_DOUBLE_EQ(r.throughput * cfg.timesteps, r.completed);
    int sum = 0;
    for (int c : r.completed_per_agent) sum += c;
    EXPECT_EQ(sum, r.completed);
    EXPECT_EQ(static_cast<int>(r.runtimes.size()), r.episodes);
    EXPECT_EQ(static_cast<int>(r.w_used.size()), r.episodes);
    EXPECT_EQ(r.episodes, cfg.timesteps / cfg.horizon.h);
  }
}

TEST(Simulation, StartsAreDistinct) {
  auto g = std::make_shared<const Grid>(load_map_file(scene::map_path("fulfillment.map")));
  SimulationConfig cfg = small_config(g, 30, SolverKind::kPbs, 8);
  cfg.timesteps = 0;
  const SimulationResult r = run_simulation(cfg);
  std::set<CellId> starts;
  for (const auto& h : r.history) {
    starts.insert(h.front());
    EXPECT_EQ(g->role(h.front()), EndpointRole::kWorkStation);
  }
  EXPECT_EQ(starts.size(), 30u);
}

TEST(Simulation, SameConfigSameTrace) {
  auto g = std::make_shared<const Grid>(load_map_file(scene::map_path("sorting.map")));
  SimulationConfig cfg = small_config(g, 20, SolverKind::kPbs, 99);
  cfg.timesteps = 30;
  const SimulationResult a = run_simulation(cfg);
  const SimulationResult b = run_simulation(cfg);
  EXPECT_EQ(a.history, b.history);
  EXPECT_EQ(a.completed, b.completed);
  EXPECT_EQ(a.w_used, b.w_used);
  EXPECT_EQ(a.dummy_assignments, b.dummy_assignments);
  cfg.seed = 100;
  EXPECT_NE(run_simulation(cfg).history, a.history);
}

TEST(Simulation, PartialFinalPeriod) {
  auto g = std::make_shared<const Grid>(grid_from({"E....E", "......"}));
  SimulationConfig cfg = small_config(g, 2, SolverKind::kPbs, 3);
  cfg.timesteps = 10;
  const SimulationResult r = run_simulation(cfg);
  EXPECT_EQ(r.episodes, 4);
  EXPECT_EQ(r.history[0].size(), 11u);
}

TEST(Simulation, InvalidConfigsAreRejected) {
  auto g = std::make_shared<const Grid>(grid_from({"W.E"}));
  SimulationConfig cfg = small_config(g, 2, SolverKind::kPbs, 1);
  EXPECT_THROW(run_simulation(cfg), std::invalid_argument);  // one orange cell, two agents
  cfg.m = 1;
  cfg.horizon.w = Horizon::steps(2);
  EXPECT_THROW(run_simulation(cfg), std::invalid_argument);  // w < h
  cfg.horizon.w = Horizon::steps(3);
  cfg.timesteps = -1;
  EXPECT_THROW(run_simulation(cfg), std::invalid_argument);
  cfg.timesteps = 5;
  cfg.grid = nullptr;
  EXPECT_THROW(run_simulation(cfg), std::invalid_argument);
}

}  // namespace
}  // namespace rhcr
