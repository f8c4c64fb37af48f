#include "rhcr/sim.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace rhcr {

namespace {

enum Stream : std::uint32_t { kPlacement = 1, kAssigner = 2, kSolver = 3 };

std::vector<CellId> cells_with_roles(const Grid& g, std::initializer_list<EndpointRole> roles) {
  std::vector<CellId> out;
  for (CellId c = 0; c < g.size(); ++c) {
    if (g.passable(c) && std::find(roles.begin(), roles.end(), g.role(c)) != roles.end()) out.push_back(c);
  }
  return out;
}

CellId draw_avoiding(const std::vector<CellId>& pool, CellId avoid, std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
  CellId c = pool[pick(rng)];
  if (pool.size() > 1) {
    while (c == avoid) c = pool[pick(rng)];
  }
  return c;
}

}  // namespace

std::string_view to_string(Scenario s) {
  return s == Scenario::kSorting ? "sorting" : "fulfillment";
}

Scenario detect_scenario(const Grid& g) {
  return g.undirected() ? Scenario::kFulfillment : Scenario::kSorting;
}

std::uint64_t substream_seed(std::uint64_t seed, std::uint32_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), stream};
  std::array<std::uint32_t, 2> out{};
  seq.generate(out.begin(), out.end());
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

FulfillmentAssigner::FulfillmentAssigner(const Grid& g, std::uint64_t seed)
    : endpoints_(cells_with_roles(g, {EndpointRole::kEndpoint, EndpointRole::kInventoryPod})), rng_(seed) {
  if (endpoints_.empty()) endpoints_ = largest_scc(g);
  if (endpoints_.empty()) throw std::invalid_argument("map has no endpoint cells");
}

std::optional<CellId> FulfillmentAssigner::next_goal(const AgentState&, CellId reference) {
  return draw_avoiding(endpoints_, reference, rng_);
}

SortingAssigner::SortingAssigner(const Grid& g, const DistanceCache& dist, std::uint64_t seed)
    : dist_(dist),
      stations_(cells_with_roles(g, {EndpointRole::kWorkStation})),
      drops_(cells_with_roles(g, {EndpointRole::kEndpoint})),
      rng_(seed) {
  if (stations_.empty() || drops_.empty()) {
    throw std::invalid_argument("sorting map needs work station ('W') and endpoint ('E') cells");
  }
}

CellId SortingAssigner::nearest_station(CellId from) const {
  CellId best = -1;
  int best_d = kUnreachable;
  for (CellId s : stations_) {  // ascending cell index, so ties keep the lowest
    const int d = dist_.dist(from, s);
    if (d < best_d) {
      best_d = d;
      best = s;
    }
  }
  return best;
}

std::optional<CellId> SortingAssigner::next_goal(const AgentState& agent, CellId reference) {
  if (agent.id < 0) throw std::invalid_argument("negative agent id");
  if (static_cast<std::size_t>(agent.id) >= next_is_station_.size()) next_is_station_.resize(agent.id + 1, 1);
  char& station = next_is_station_[agent.id];
  std::optional<CellId> goal;
  if (station) {
    const CellId s = nearest_station(reference);
    if (s >= 0) goal = s;
  } else {
    goal = draw_avoiding(drops_, reference, rng_);
  }
  if (goal) station = !station;
  return goal;
}

std::vector<CellId> largest_scc(const Grid& g) {
  // Iterative Tarjan.
  const int n = g.size();
  std::vector<int> index(n, -1), low(n, 0), comp(n, -1);
  std::vector<char> on_stack(n, 0);
  std::vector<CellId> stack;
  std::vector<std::pair<CellId, std::size_t>> call;
  int next_index = 0, comps = 0;
  std::vector<int> comp_size;
  for (CellId root = 0; root < n; ++root) {
    if (!g.passable(root) || index[root] >= 0) continue;
    call.push_back({root, 0});
    index[root] = low[root] = next_index++;
    stack.push_back(root);
    on_stack[root] = 1;
    while (!call.empty()) {
      auto& [v, i] = call.back();
      const auto& succ = g.successors(v);
      if (i < succ.size()) {
        const CellId w = succ[i++];
        if (index[w] < 0) {
          index[w] = low[w] = next_index++;
          stack.push_back(w);
          on_stack[w] = 1;
          call.push_back({w, 0});
        } else if (on_stack[w]) {
          low[v] = std::min(low[v], index[w]);
        }
        continue;
      }
      const CellId done = v;
      call.pop_back();
      if (!call.empty()) low[call.back().first] = std::min(low[call.back().first], low[done]);
      if (low[done] == index[done]) {
        int size = 0;
        CellId w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = 0;
          comp[w] = comps;
          ++size;
        } while (w != done);
        comp_size.push_back(size);
        ++comps;
      }
    }
  }
  if (comps == 0) return {};
  int best = 0;
  CellId best_min = n;
  for (int c = 0; c < comps; ++c) {
    if (comp_size[c] < comp_size[best]) continue;
    CellId lowest = n;
    for (CellId v = 0; v < n && lowest == n; ++v) {
      if (comp[v] == c) lowest = v;
    }
    if (comp_size[c] > comp_size[best] || lowest < best_min) {
      best = c;
      best_min = lowest;
    }
  }
  std::vector<CellId> out;
  for (CellId v = 0; v < n; ++v) {
    if (comp[v] == best) out.push_back(v);
  }
  return out;
}

std::vector<CellId> initial_cells(const Grid& g, Scenario s) {
  if (s == Scenario::kFulfillment) {
    std::vector<CellId> orange = cells_with_roles(g, {EndpointRole::kWorkStation});
    if (!orange.empty()) return orange;
  }
  return largest_scc(g);
}

void validate(const SimulationConfig& cfg) {
  if (!cfg.grid) throw std::invalid_argument("simulation has no map");
  validate(cfg.horizon);
  if (cfg.m < 0) throw std::invalid_argument("agent count must be >= 0");
  if (cfg.timesteps < 0) throw std::invalid_argument("timesteps must be >= 0");
  if (cfg.solver_options.suboptimality < 1.0) throw std::invalid_argument("suboptimality factor must be >= 1");
  const std::size_t room = initial_cells(*cfg.grid, cfg.scenario).size();
  if (static_cast<std::size_t>(cfg.m) > room) {
    throw std::invalid_argument("agent count " + std::to_string(cfg.m) + " exceeds the " + std::to_string(room) +
                                " available initial cells");
  }
}

SimulationResult run_simulation(const SimulationConfig& cfg) {
  validate(cfg);
  const Grid& g = *cfg.grid;
  DistanceCache dist(g);
  SimulationResult result;

  std::vector<CellId> starts = initial_cells(g, cfg.scenario);
  std::mt19937_64 placement(substream_seed(cfg.seed, kPlacement));
  std::shuffle(starts.begin(), starts.end(), placement);
  std::vector<AgentState> agents(cfg.m);
  for (int a = 0; a < cfg.m; ++a) {
    agents[a].id = a;
    agents[a].location = starts[a];
  }

  std::unique_ptr<TaskAssigner> assigner;
  if (cfg.scenario == Scenario::kSorting) {
    assigner = std::make_unique<SortingAssigner>(g, dist, substream_seed(cfg.seed, kAssigner));
  } else {
    assigner = std::make_unique<FulfillmentAssigner>(g, substream_seed(cfg.seed, kAssigner));
  }
  std::mt19937_64 solver_rng(substream_seed(cfg.seed, kSolver));

  if (cfg.record_history) {
    result.history.assign(cfg.m, {});
    for (int a = 0; a < cfg.m; ++a) result.history[a].push_back(agents[a].location);
  }

  int time = 0;
  while (time < cfg.timesteps && cfg.m > 0) {
    for (AgentState& a : agents) {
      top_up_goals(dist, a, *assigner, cfg.horizon.h);
      if (a.dummy_goal) ++result.dummy_assignments;
    }
    SolverOptions opt = cfg.solver_options;
    opt.seed = solver_rng();
    const EpisodeResult ep = plan_episode(dist, agents, cfg.horizon, cfg.solver, opt);
    result.runtimes.push_back(ep.runtime_s);
    result.w_used.push_back(ep.w_used.is_infinite() ? -1 : ep.w_used.value());
    ++result.episodes;
    if (!ep.solution.solved()) {
      result.failed = true;
      result.failure = ep.solution.status == SolveStatus::kTimeLimit ? "time limit" : "no solution";
      break;
    }
    if (ep.capped) ++result.capped_episodes;
    const int steps = std::min(cfg.horizon.h, cfg.timesteps - time);
    if (cfg.record_history) {
      for (int a = 0; a < cfg.m; ++a) {
        for (int t = 1; t <= steps; ++t) result.history[a].push_back(ep.solution.paths[a].at(t));
      }
    }
    result.completed += advance(agents, ep.solution.paths, steps);
    time += steps;
  }

  result.throughput = cfg.timesteps > 0 ? static_cast<double>(result.completed) / cfg.timesteps : 0.0;
  for (const AgentState& a : agents) result.completed_per_agent.push_back(a.completed);
  if (!result.runtimes.empty()) {
    const double n = static_cast<double>(result.runtimes.size());
    result.mean_runtime_s = std::accumulate(result.runtimes.begin(), result.runtimes.end(), 0.0) / n;
    double sq = 0.0;
    for (double r : result.runtimes) sq += (r - result.mean_runtime_s) * (r - result.mean_runtime_s);
    result.std_runtime_s = std::sqrt(sq / n);
  }
  return result;
}

std::vector<Conflict> audit_history(const std::vector<std::vector<CellId>>& history) {
  std::vector<Path> paths;
  paths.reserve(history.size());
  for (const auto& h : history) paths.push_back(Path{h, {}});
  return detect_conflicts(paths, Horizon::infinite());
}

}  // namespace rhcr
