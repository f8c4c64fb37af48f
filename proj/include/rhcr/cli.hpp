#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "rhcr/sim.hpp"
#include "rhcr/solvers.hpp"

namespace rhcr::cli {

/// Bad command-line values or sweep files. Maps to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum ExitCode : int { kOk = 0, kRunFailed = 1, kInvalidConfig = 2 };

struct RunSpec {
  std::string map;
  SolverKind solver = SolverKind::kPbs;
  int m = 1;
  Horizon w = Horizon::steps(5);
  int h = 5;
  int p = 0;
  double subopt = 1.1;  // ECBS only
  int timesteps = 5000;
  std::uint64_t seed = 0;
  int reps = 1;
  double time_limit_s = 60.0;
  /// Detected from the map when unset.
  std::optional<Scenario> scenario;
};

/// Throws ConfigError.
void validate(const RunSpec& spec);

/// "inf" or a non-negative integer.
Horizon parse_horizon(const std::string& text);
std::string format_horizon(Horizon w);

/// One CSV row: a single repetition of a RunSpec.
struct RunRecord {
  std::string map;
  std::string solver;
  int m = 0;
  Horizon w;
  int h = 0;
  int p = 0;
  std::uint64_t seed = 0;
  double throughput = 0.0;
  double mean_runtime_s = 0.0;
  double std_runtime_s = 0.0;
  int episodes = 0;
  bool failed = false;

  // JSON only.
  int completed = 0;
  int capped_episodes = 0;
  std::vector<int> w_used;  // -1 = infinite
  std::string failure;

  friend bool operator==(const RunRecord&, const RunRecord&) = default;
};

/// Repetition r of a spec runs with seed spec.seed + r.
std::vector<RunSpec> expand_reps(const std::vector<RunSpec>& specs);

struct SweepOptions {
  int jobs = 1;
  /// Zero the runtime columns so repeated runs produce identical files.
  bool timing = true;
};

/// Runs every spec (repetitions already expanded) on a pool of `jobs` workers. Records come
/// back in spec order. Maps are loaded once per path; a missing or malformed map throws
/// ConfigError before any run starts.
std::vector<RunRecord> run_sweep(const std::vector<RunSpec>& specs, const SweepOptions& opt);

/// Key/value sweep file: `key = v1, v2, ...` per line, '#' starts a comment. Keys: map,
/// solver, agents, w, h, p, subopt, timesteps, seed, reps, time_limit, scenario. Returns the
/// Cartesian product in file-independent order (map, solver, agents, w, h, p, subopt,
/// timesteps, seed, time_limit, scenario; last key varies fastest). Relative map paths
/// resolve against `base_dir`.
std::vector<RunSpec> parse_sweep(std::istream& in, const std::string& base_dir = "");

extern const std::vector<std::string> kCsvColumns;
void write_csv(std::ostream& out, const std::vector<RunRecord>& rows);
/// Inverse of write_csv over the CSV columns (JSON-only fields stay default).
std::vector<RunRecord> read_csv(std::istream& in);
void write_json(std::ostream& out, const std::vector<RunRecord>& rows);

struct FixtureCheck {
  std::string name;
  bool ok = false;
  std::string detail;  // "file:line: message" on failure
};

/// Dimension, obstacle-fraction, role and direction checks on the fixture maps in `dir`.
std::vector<FixtureCheck> verify_fixtures(const std::string& dir);

}  // namespace rhcr::cli
