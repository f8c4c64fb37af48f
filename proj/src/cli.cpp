#include "rhcr/cli.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <exception>
#include <fstream>
#include <istream>
#include <memory>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include <json.hpp>

namespace rhcr::cli {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(trim(cur));
  if (!s.empty() && s.back() == sep) out.push_back("");
  return out;
}

template <typename T>
T parse_number(const std::string& text, const std::string& what) {
  T v{};
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end || text.empty()) throw ConfigError("invalid " + what + ": '" + text + "'");
  return v;
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

Scenario parse_scenario(const std::string& text) {
  if (text == "fulfillment") return Scenario::kFulfillment;
  if (text == "sorting") return Scenario::kSorting;
  throw ConfigError("unknown scenario '" + text + "' (fulfillment, sorting)");
}

SolverKind parse_solver_or_throw(const std::string& text) {
  const auto k = parse_solver(text);
  if (!k) throw ConfigError("unknown solver '" + text + "' (cbs, ecbs, castar, pbs)");
  return *k;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::vector<std::string> csv_split(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

SimulationConfig to_config(const RunSpec& s, std::shared_ptr<const Grid> grid) {
  SimulationConfig cfg;
  cfg.scenario = s.scenario ? *s.scenario : detect_scenario(*grid);
  cfg.grid = std::move(grid);
  cfg.m = s.m;
  cfg.horizon.w = s.w;
  cfg.horizon.h = s.h;
  cfg.horizon.p = s.p;
  cfg.solver = s.solver;
  cfg.solver_options.time_limit_s = s.time_limit_s;
  cfg.solver_options.suboptimality = s.solver == SolverKind::kEcbs ? s.subopt : 1.0;
  cfg.timesteps = s.timesteps;
  cfg.seed = s.seed;
  return cfg;
}

RunRecord to_record(const RunSpec& s, const SimulationResult& r, bool timing) {
  RunRecord rec;
  rec.map = s.map;
  rec.solver = std::string(to_string(s.solver));
  rec.m = s.m;
  rec.w = s.w;
  rec.h = s.h;
  rec.p = s.p;
  rec.seed = s.seed;
  rec.throughput = r.throughput;
  rec.mean_runtime_s = timing ? r.mean_runtime_s : 0.0;
  rec.std_runtime_s = timing ? r.std_runtime_s : 0.0;
  rec.episodes = r.episodes;
  rec.failed = r.failed;
  rec.completed = r.completed;
  rec.capped_episodes = r.capped_episodes;
  rec.w_used = r.w_used;
  rec.failure = r.failure;
  return rec;
}

}  // namespace

Horizon parse_horizon(const std::string& text) {
  if (text == "inf") return Horizon::infinite();
  const int w = parse_number<int>(text, "horizon");
  if (w < 0) throw ConfigError("horizon must be >= 0 or 'inf'");
  return Horizon::steps(w);
}

std::string format_horizon(Horizon w) { return w.is_infinite() ? "inf" : std::to_string(w.value()); }

void validate(const RunSpec& s) {
  if (s.map.empty()) throw ConfigError("no map given");
  if (s.m < 0) throw ConfigError("agents must be >= 0");
  if (s.h < 1) throw ConfigError("period h must be >= 1");
  if (!s.w.is_infinite() && s.w.value() < s.h) {
    throw ConfigError("horizon w=" + format_horizon(s.w) + " is below period h=" + std::to_string(s.h));
  }
  if (s.p < 0) throw ConfigError("potential p must be >= 0");
  if (s.subopt < 1.0) throw ConfigError("suboptimality must be >= 1");
  if (s.timesteps < 0) throw ConfigError("timesteps must be >= 0");
  if (s.reps < 1) throw ConfigError("reps must be >= 1");
  if (!(s.time_limit_s > 0)) throw ConfigError("time limit must be > 0");
}

std::vector<RunSpec> expand_reps(const std::vector<RunSpec>& specs) {
  std::vector<RunSpec> out;
  for (const RunSpec& s : specs) {
    for (int r = 0; r < s.reps; ++r) {
      RunSpec one = s;
      one.seed = s.seed + static_cast<std::uint64_t>(r);
      one.reps = 1;
      out.push_back(one);
    }
  }
  return out;
}

std::vector<RunRecord> run_sweep(const std::vector<RunSpec>& specs, const SweepOptions& opt) {
  std::map<std::string, std::shared_ptr<const Grid>> maps;
  std::vector<SimulationConfig> configs;
  for (const RunSpec& s : specs) {
    validate(s);
    auto& grid = maps[s.map];
    if (!grid) {
      try {
        grid = std::make_shared<const Grid>(load_map_file(s.map));
      } catch (const MapError& e) {
        throw ConfigError(s.map + ":" + std::to_string(e.line()) + ": " + e.what());
      } catch (const std::exception& e) {
        throw ConfigError(e.what());
      }
    }
    configs.push_back(to_config(s, grid));
    try {
      rhcr::validate(configs.back());
    } catch (const std::invalid_argument& e) {
      throw ConfigError(s.map + ": " + e.what());
    }
  }

  std::vector<RunRecord> out(specs.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  auto worker = [&] {
    for (std::size_t i = next++; i < specs.size(); i = next++) {
      try {
        out[i] = to_record(specs[i], run_simulation(configs[i]), opt.timing);
      } catch (...) {
        std::lock_guard lock(error_mu);
        if (!error) error = std::current_exception();
      }
    }
  };
  const int jobs = std::max(1, std::min<int>(opt.jobs, static_cast<int>(specs.size())));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);
  return out;
}

std::vector<RunSpec> parse_sweep(std::istream& in, const std::string& base_dir) {
  static const std::vector<std::string> kOrder = {"map", "solver", "agents", "w", "h", "p", "subopt",
                                                  "timesteps", "seed", "time_limit", "scenario"};
  std::map<std::string, std::vector<std::string>> values;
  int reps = 1;
  std::string line;
  for (int ln = 1; std::getline(in, line); ++ln) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(ln) + ": expected 'key = values'");
    const std::string key = trim(line.substr(0, eq));
    std::vector<std::string> list = split(line.substr(eq + 1), ',');
    for (const std::string& v : list) {
      if (v.empty()) throw ConfigError("line " + std::to_string(ln) + ": empty value for '" + key + "'");
    }
    if (key == "reps") {
      if (list.size() != 1) throw ConfigError("line " + std::to_string(ln) + ": reps takes one value");
      reps = parse_number<int>(list[0], "reps");
      continue;
    }
    if (std::find(kOrder.begin(), kOrder.end(), key) == kOrder.end()) {
      throw ConfigError("line " + std::to_string(ln) + ": unknown key '" + key + "'");
    }
    if (values.count(key)) throw ConfigError("line " + std::to_string(ln) + ": duplicate key '" + key + "'");
    values[key] = std::move(list);
  }
  if (!values.count("map")) throw ConfigError("sweep file has no 'map' key");

  std::vector<RunSpec> specs{RunSpec{}};
  specs[0].reps = reps;
  for (const std::string& key : kOrder) {
    auto it = values.find(key);
    if (it == values.end()) continue;
    std::vector<RunSpec> grown;
    for (const RunSpec& base : specs) {
      for (const std::string& v : it->second) {
        RunSpec s = base;
        if (key == "map") {
          s.map = (!base_dir.empty() && v.front() != '/') ? base_dir + "/" + v : v;
        } else if (key == "solver") {
          s.solver = parse_solver_or_throw(v);
        } else if (key == "agents") {
          s.m = parse_number<int>(v, "agents");
        } else if (key == "w") {
          s.w = parse_horizon(v);
        } else if (key == "h") {
          s.h = parse_number<int>(v, "h");
        } else if (key == "p") {
          s.p = parse_number<int>(v, "p");
        } else if (key == "subopt") {
          s.subopt = parse_number<double>(v, "subopt");
        } else if (key == "timesteps") {
          s.timesteps = parse_number<int>(v, "timesteps");
        } else if (key == "seed") {
          s.seed = parse_number<std::uint64_t>(v, "seed");
        } else if (key == "time_limit") {
          s.time_limit_s = parse_number<double>(v, "time_limit");
        } else if (key == "scenario") {
          s.scenario = parse_scenario(v);
        }
        grown.push_back(s);
      }
    }
    specs = std::move(grown);
  }
  for (const RunSpec& s : specs) validate(s);
  return specs;
}

const std::vector<std::string> kCsvColumns = {"map",  "solver",     "m",              "w",
                                              "h",    "p",          "seed",           "throughput",
                                              "mean_runtime_s", "std_runtime_s", "episodes", "failed"};

void write_csv(std::ostream& out, const std::vector<RunRecord>& rows) {
  for (std::size_t i = 0; i < kCsvColumns.size(); ++i) out << (i ? "," : "") << kCsvColumns[i];
  out << '\n';
  for (const RunRecord& r : rows) {
    out << csv_field(r.map) << ',' << r.solver << ',' << r.m << ',' << format_horizon(r.w) << ',' << r.h << ','
        << r.p << ',' << r.seed << ',' << format_double(r.throughput) << ',' << format_double(r.mean_runtime_s)
        << ',' << format_double(r.std_runtime_s) << ',' << r.episodes << ',' << (r.failed ? 1 : 0) << '\n';
  }
}

std::vector<RunRecord> read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || csv_split(line) != kCsvColumns) throw ConfigError("CSV header mismatch");
  std::vector<RunRecord> rows;
  for (int ln = 2; std::getline(in, line); ++ln) {
    if (trim(line).empty()) continue;
    const auto f = csv_split(line);
    if (f.size() != kCsvColumns.size()) throw ConfigError("CSV line " + std::to_string(ln) + ": wrong field count");
    RunRecord r;
    r.map = f[0];
    r.solver = f[1];
    r.m = parse_number<int>(f[2], "m");
    r.w = parse_horizon(f[3]);
    r.h = parse_number<int>(f[4], "h");
    r.p = parse_number<int>(f[5], "p");
    r.seed = parse_number<std::uint64_t>(f[6], "seed");
    r.throughput = parse_number<double>(f[7], "throughput");
    r.mean_runtime_s = parse_number<double>(f[8], "mean_runtime_s");
    r.std_runtime_s = parse_number<double>(f[9], "std_runtime_s");
    r.episodes = parse_number<int>(f[10], "episodes");
    r.failed = parse_number<int>(f[11], "failed") != 0;
    rows.push_back(r);
  }
  return rows;
}

void write_json(std::ostream& out, const std::vector<RunRecord>& rows) {
  nlohmann::json arr = nlohmann::json::array();
  for (const RunRecord& r : rows) {
    arr.push_back({{"map", r.map},
                   {"solver", r.solver},
                   {"m", r.m},
                   {"w", format_horizon(r.w)},
                   {"h", r.h},
                   {"p", r.p},
                   {"seed", r.seed},
                   {"throughput", r.throughput},
                   {"mean_runtime_s", r.mean_runtime_s},
                   {"std_runtime_s", r.std_runtime_s},
                   {"episodes", r.episodes},
                   {"failed", r.failed},
                   {"failure", r.failure},
                   {"completed", r.completed},
                   {"capped_episodes", r.capped_episodes},
                   {"w_used", r.w_used}});
  }
  out << arr.dump(2) << '\n';
}

// ---------------------------------------------------------------------------
// Fixture verification

namespace {

struct FixtureSpec {
  std::string file;
  int rows;
  int cols;
  double min_obstacles;  // fraction of all cells
  double max_obstacles;
  bool directed;
  bool roles;  // expects 'E' and 'W' cells inside one strongly connected component
};

// 1-based line of the DIRECTIONS entry for each cell.
std::map<std::pair<int, int>, int> direction_lines(const std::string& path) {
  std::map<std::pair<int, int>, int> out;
  std::ifstream in(path);
  std::string line;
  bool section = false;
  for (int ln = 1; std::getline(in, line); ++ln) {
    if (trim(line) == "DIRECTIONS") {
      section = true;
      continue;
    }
    if (!section) continue;
    std::istringstream es(line);
    int r, c;
    if (es >> r >> c) out[{r, c}] = ln;
  }
  return out;
}

void check_fixture(const std::string& dir, const FixtureSpec& f, std::vector<FixtureCheck>& out) {
  const std::string path = dir + "/" + f.file;
  Grid g;
  try {
    g = load_map_file(path);
  } catch (const MapError& e) {
    out.push_back({f.file + " loads", false, path + ":" + std::to_string(e.line()) + ": " + e.what()});
    return;
  } catch (const std::exception& e) {
    out.push_back({f.file + " loads", false, e.what()});
    return;
  }
  out.push_back({f.file + " loads", true, ""});

  const bool dims = g.rows() == f.rows && g.cols() == f.cols;
  out.push_back({f.file + " dimensions " + std::to_string(f.rows) + "x" + std::to_string(f.cols), dims,
                 dims ? "" : path + ":1: found " + std::to_string(g.rows()) + "x" + std::to_string(g.cols())});

  int blocked = 0;
  for (CellId c = 0; c < g.size(); ++c) blocked += g.passable(c) ? 0 : 1;
  const double frac = static_cast<double>(blocked) / g.size();
  const bool frac_ok = frac >= f.min_obstacles && frac <= f.max_obstacles;
  std::ostringstream fr;
  fr << "obstacle fraction " << frac;
  std::ostringstream want;
  want << " in [" << f.min_obstacles << ", " << f.max_obstacles << "]";
  out.push_back({f.file + " " + fr.str() + want.str(), frac_ok, frac_ok ? "" : path + ": " + fr.str()});

  if (f.directed) {
    const Grid expected = generate_sorting_directions(g);
    std::string detail;
    const auto lines = direction_lines(path);
    for (CellId c = 0; c < g.size() && detail.empty(); ++c) {
      if (!g.passable(c)) continue;
      for (Move m : kCardinalMoves) {
        if (g.allows(c, m) == expected.allows(c, m)) continue;
        const Location l = g.location(c);
        const auto it = lines.find({l.row, l.col});
        detail = path + ":" + std::to_string(it == lines.end() ? 0 : it->second) + ": cell (" +
                 std::to_string(l.row) + ", " + std::to_string(l.col) + ") differs from the lane pattern";
        break;
      }
    }
    out.push_back({f.file + " directions follow the lane pattern", detail.empty(), detail});
  }

  if (f.roles) {
    const std::vector<CellId> scc = largest_scc(g);
    std::vector<char> in_scc(g.size(), 0);
    for (CellId c : scc) in_scc[c] = 1;
    int endpoints = 0, stations = 0;
    std::string detail;
    for (CellId c = 0; c < g.size(); ++c) {
      if (!g.passable(c) || g.role(c) == EndpointRole::kNone) continue;
      endpoints += g.role(c) == EndpointRole::kEndpoint ? 1 : 0;
      stations += g.role(c) == EndpointRole::kWorkStation ? 1 : 0;
      if (!in_scc[c] && detail.empty()) {
        const Location l = g.location(c);
        detail = path + ":" + std::to_string(l.row + 2) + ": endpoint (" + std::to_string(l.row) + ", " +
                 std::to_string(l.col) + ") is cut off from the main component";
      }
    }
    if (endpoints == 0 || stations == 0) detail = path + ": needs both 'E' and 'W' cells";
    out.push_back({f.file + " endpoints reachable (" + std::to_string(endpoints) + " E, " + std::to_string(stations) +
                       " W)",
                   detail.empty(), detail});
  }
}

}  // namespace

std::vector<FixtureCheck> verify_fixtures(const std::string& dir) {
  static const std::vector<FixtureSpec> kFixtures = {
      {"fulfillment.map", 33, 46, 0.14, 0.18, false, true},
      {"sorting.map", 37, 77, 0.08, 0.12, true, true},
      {"corridor.map", 3, 5, 3.0 / 15, 3.0 / 15, false, false},
      {"crossing.map", 7, 9, 43.0 / 63, 43.0 / 63, false, false},
  };
  std::vector<FixtureCheck> out;
  for (const FixtureSpec& f : kFixtures) check_fixture(dir, f, out);
  return out;
}

}  // namespace rhcr::cli
