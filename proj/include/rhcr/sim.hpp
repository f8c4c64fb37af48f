#pragma once

#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "rhcr/grid.hpp"
#include "rhcr/rhcr.hpp"
#include "rhcr/solvers.hpp"

namespace rhcr {

enum class Scenario {
  kFulfillment,  // goals uniform over endpoint cells
  kSorting,      // alternate nearest work station and random chute endpoint
};

std::string_view to_string(Scenario s);
/// Sorting for directed maps, fulfillment otherwise.
Scenario detect_scenario(const Grid& g);

/// Goals drawn uniformly from a fixed endpoint set ('E' and 'S' cells, or every passable
/// cell on maps without endpoints). A draw equal to the reference cell is redrawn.
class FulfillmentAssigner : public TaskAssigner {
 public:
  FulfillmentAssigner(const Grid& g, std::uint64_t seed);
  std::optional<CellId> next_goal(const AgentState& agent, CellId reference) override;
  const std::vector<CellId>& endpoints() const { return endpoints_; }

 private:
  std::vector<CellId> endpoints_;
  std::mt19937_64 rng_;
};

/// Per agent, alternates a work station ('W', nearest to the reference cell, ties by lowest
/// cell index) and a uniformly drawn chute endpoint ('E'). The first goal is a work station.
class SortingAssigner : public TaskAssigner {
 public:
  SortingAssigner(const Grid& g, const DistanceCache& dist, std::uint64_t seed);
  std::optional<CellId> next_goal(const AgentState& agent, CellId reference) override;
  CellId nearest_station(CellId from) const;

 private:
  const DistanceCache& dist_;
  std::vector<CellId> stations_;
  std::vector<CellId> drops_;
  std::vector<char> next_is_station_;  // indexed by agent id
  std::mt19937_64 rng_;
};

/// Cells agents may start on: orange 'W' cells for fulfillment maps that have them, the
/// largest strongly connected set of passable cells otherwise.
std::vector<CellId> initial_cells(const Grid& g, Scenario s);

/// Passable cells of the largest strongly connected component (ties: lowest cell index).
std::vector<CellId> largest_scc(const Grid& g);

struct SimulationConfig {
  std::shared_ptr<const Grid> grid;
  Scenario scenario = Scenario::kFulfillment;
  int m = 0;
  HorizonConfig horizon;
  SolverKind solver = SolverKind::kPbs;
  SolverOptions solver_options;
  int timesteps = 0;
  std::uint64_t seed = 0;
  /// Keep every agent's executed location per global timestep.
  bool record_history = false;
};

struct SimulationResult {
  int completed = 0;
  double throughput = 0.0;
  int episodes = 0;
  /// Wall-clock seconds per Windowed MAPF call (escalations included).
  std::vector<double> runtimes;
  double mean_runtime_s = 0.0;
  double std_runtime_s = 0.0;
  std::vector<int> w_used;  // -1 encodes an infinite horizon
  int capped_episodes = 0;
  int dummy_assignments = 0;
  std::vector<int> completed_per_agent;
  bool failed = false;
  std::string failure;
  /// history[a][t]: location of agent a at global timestep t (when recorded).
  std::vector<std::vector<CellId>> history;
};

/// Throws std::invalid_argument for an invalid configuration.
void validate(const SimulationConfig& cfg);

SimulationResult run_simulation(const SimulationConfig& cfg);

/// Vertex and swap conflicts in a recorded execution, every timestep checked.
std::vector<Conflict> audit_history(const std::vector<std::vector<CellId>>& history);

/// Seed for one of the independent random streams derived from a run seed.
std::uint64_t substream_seed(std::uint64_t seed, std::uint32_t stream);

}  // namespace rhcr
