#include "rhcr/grid.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <sstream>

namespace rhcr {

namespace {

constexpr std::array<int, 4> kRowDelta = {-1, 1, 0, 0};
constexpr std::array<int, 4> kColDelta = {0, 0, 1, -1};

Move reverse(Move m) {
  switch (m) {
    case Move::kNorth: return Move::kSouth;
    case Move::kSouth: return Move::kNorth;
    case Move::kEast: return Move::kWest;
    case Move::kWest: return Move::kEast;
    default: return Move::kWait;
  }
}

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
  return std::string(s.substr(b, e - b));
}

}  // namespace

MapError::MapError(Kind kind, int line, const std::string& what)
    : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
      kind_(kind),
      line_(line) {}

Grid::Grid(int rows, int cols)
    : rows_(rows),
      cols_(cols),
      passable_(static_cast<std::size_t>(rows) * cols, 1),
      roles_(static_cast<std::size_t>(rows) * cols, EndpointRole::kNone),
      moves_(static_cast<std::size_t>(rows) * cols, 0) {
  reset_moves();
  finalize();
}

std::optional<CellId> Grid::step(CellId c, Move m) const {
  if (m == Move::kWait) return c;
  const int i = static_cast<int>(m);
  const Location l = location(c);
  const Location n{l.row + kRowDelta[i], l.col + kColDelta[i]};
  if (!in_bounds(n)) return std::nullopt;
  return cell(n);
}

std::uint8_t Grid::geometric_moves(CellId c) const {
  if (!passable(c)) return 0;
  std::uint8_t mask = 0;
  for (Move m : kCardinalMoves) {
    auto t = step(c, m);
    if (t && passable(*t)) mask |= move_bit(m);
  }
  return mask;
}

void Grid::set_passable(CellId c, bool p) {
  passable_[c] = p ? 1 : 0;
  if (!p) roles_[c] = EndpointRole::kNone;
}

void Grid::restrict_moves(CellId c, std::uint8_t mask) {
  moves_[c] = static_cast<std::uint8_t>(moves_[c] & mask & geometric_moves(c));
}

void Grid::reset_moves() {
  for (CellId c = 0; c < size(); ++c) moves_[c] = geometric_moves(c);
}

void Grid::finalize() {
  // Keep restrictions consistent with the obstacle mask.
  for (CellId c = 0; c < size(); ++c) moves_[c] &= geometric_moves(c);
  succ_.assign(size(), {});
  pred_.assign(size(), {});
  for (CellId c = 0; c < size(); ++c) {
    for (Move m : kCardinalMoves) {
      if (!(moves_[c] & move_bit(m))) continue;
      const CellId t = *step(c, m);
      succ_[c].push_back(t);
      pred_[t].push_back(c);
    }
  }
}

std::vector<Neighbor> Grid::neighbors(CellId c) const {
  std::vector<Neighbor> out;
  for (Move m : kCardinalMoves) {
    if (moves_[c] & move_bit(m)) out.push_back({m, *step(c, m)});
  }
  out.push_back({Move::kWait, c});
  return out;
}

bool Grid::undirected() const {
  for (CellId c = 0; c < size(); ++c) {
    for (Move m : kCardinalMoves) {
      if (!(moves_[c] & move_bit(m))) continue;
      if (!(moves_[*step(c, m)] & move_bit(reverse(m)))) return false;
    }
  }
  return true;
}

std::vector<CellId> Grid::cells_with_role(EndpointRole role) const {
  std::vector<CellId> out;
  for (CellId c = 0; c < size(); ++c) {
    if (passable(c) && roles_[c] == role) out.push_back(c);
  }
  return out;
}

std::vector<CellId> Grid::passable_cells() const {
  std::vector<CellId> out;
  for (CellId c = 0; c < size(); ++c) {
    if (passable(c)) out.push_back(c);
  }
  return out;
}

int Grid::obstacle_count() const {
  return static_cast<int>(std::count(passable_.begin(), passable_.end(), 0));
}

Grid load_map(std::string_view text) {
  std::vector<std::string> lines;
  {
    std::string cur;
    for (char ch : text) {
      if (ch == '\n') {
        lines.push_back(cur);
        cur.clear();
      } else {
        cur.push_back(ch);
      }
    }
    if (!cur.empty()) lines.push_back(cur);
  }

  std::size_t ln = 0;
  auto next_nonblank = [&]() -> bool {
    while (ln < lines.size() && trim(lines[ln]).empty()) ++ln;
    return ln < lines.size();
  };

  if (!next_nonblank()) throw MapError(MapError::Kind::kMalformed, 0, "empty map text");
  int rows = 0;
  int cols = 0;
  {
    std::istringstream hs(trim(lines[ln]));
    std::string extra;
    if (!(hs >> rows >> cols) || (hs >> extra) || rows <= 0 || cols <= 0) {
      throw MapError(MapError::Kind::kMalformed, static_cast<int>(ln) + 1,
                     "header must be 'rows cols' with positive integers");
    }
  }
  ++ln;

  Grid g(rows, cols);
  for (int r = 0; r < rows; ++r, ++ln) {
    if (ln >= lines.size() || trim(lines[ln]) == "DIRECTIONS") {
      throw MapError(MapError::Kind::kDimensionMismatch, static_cast<int>(ln) + 1,
                     "expected " + std::to_string(rows) + " grid rows, found " + std::to_string(r));
    }
    const std::string row = trim(lines[ln]);
    if (static_cast<int>(row.size()) != cols) {
      throw MapError(MapError::Kind::kDimensionMismatch, static_cast<int>(ln) + 1,
                     "expected " + std::to_string(cols) + " glyphs, found " + std::to_string(row.size()));
    }
    for (int c = 0; c < cols; ++c) {
      const CellId id = g.cell(r, c);
      switch (row[c]) {
        case '.': break;
        case '@': g.set_passable(id, false); break;
        case 'E': g.set_role(id, EndpointRole::kEndpoint); break;
        case 'W': g.set_role(id, EndpointRole::kWorkStation); break;
        case 'S': g.set_role(id, EndpointRole::kInventoryPod); break;
        default:
          throw MapError(MapError::Kind::kUnknownGlyph, static_cast<int>(ln) + 1,
                         std::string("unknown cell glyph '") + row[c] + "'");
      }
    }
  }
  g.reset_moves();

  if (next_nonblank()) {
    if (trim(lines[ln]) != "DIRECTIONS") {
      throw MapError(MapError::Kind::kDimensionMismatch, static_cast<int>(ln) + 1,
                     "unexpected content after " + std::to_string(rows) + " grid rows");
    }
    ++ln;
    for (; ln < lines.size(); ++ln) {
      const std::string entry = trim(lines[ln]);
      if (entry.empty()) continue;
      std::istringstream es(entry);
      int r = -1;
      int c = -1;
      std::string mask_text;
      std::string extra;
      if (!(es >> r >> c >> mask_text) || (es >> extra)) {
        throw MapError(MapError::Kind::kMalformed, static_cast<int>(ln) + 1,
                       "direction entry must be 'r c NSEW-subset'");
      }
      if (!g.in_bounds({r, c})) {
        throw MapError(MapError::Kind::kMalformed, static_cast<int>(ln) + 1, "direction entry off-grid");
      }
      const CellId id = g.cell(r, c);
      if (!g.passable(id)) {
        throw MapError(MapError::Kind::kDirectionOnImpassable, static_cast<int>(ln) + 1,
                       "direction entry references impassable cell");
      }
      std::uint8_t mask = 0;
      if (mask_text != "-") {
        for (char ch : mask_text) {
          switch (ch) {
            case 'N': mask |= move_bit(Move::kNorth); break;
            case 'S': mask |= move_bit(Move::kSouth); break;
            case 'E': mask |= move_bit(Move::kEast); break;
            case 'W': mask |= move_bit(Move::kWest); break;
            default:
              throw MapError(MapError::Kind::kMalformed, static_cast<int>(ln) + 1,
                             std::string("unknown direction '") + ch + "'");
          }
        }
      }
      g.restrict_moves(id, mask);
    }
  }
  g.finalize();
  return g;
}

Grid load_map_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open map file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return load_map(ss.str());
}

std::string write_map(const Grid& g) {
  std::ostringstream out;
  out << g.rows() << ' ' << g.cols() << '\n';
  for (int r = 0; r < g.rows(); ++r) {
    for (int c = 0; c < g.cols(); ++c) {
      const CellId id = g.cell(r, c);
      if (!g.passable(id)) {
        out << '@';
        continue;
      }
      switch (g.role(id)) {
        case EndpointRole::kNone: out << '.'; break;
        case EndpointRole::kEndpoint: out << 'E'; break;
        case EndpointRole::kWorkStation: out << 'W'; break;
        case EndpointRole::kInventoryPod: out << 'S'; break;
      }
    }
    out << '\n';
  }
  if (!g.undirected()) {
    out << "DIRECTIONS\n";
    static constexpr char kNames[] = {'N', 'S', 'E', 'W'};
    for (CellId c = 0; c < g.size(); ++c) {
      if (!g.passable(c)) continue;
      const Location l = g.location(c);
      std::string mask;
      for (Move m : kCardinalMoves) {
        if (g.allowed_moves(c) & move_bit(m)) mask.push_back(kNames[static_cast<int>(m)]);
      }
      out << l.row << ' ' << l.col << ' ' << (mask.empty() ? "-" : mask) << '\n';
    }
  }
  return out.str();
}

Grid generate_sorting_directions(const Grid& g) {
  Grid out = g;
  for (CellId c = 0; c < out.size(); ++c) {
    if (!out.passable(c)) continue;
    const Location l = out.location(c);
    const Move horizontal = (l.row / 2) % 2 == 0 ? Move::kEast : Move::kWest;
    const Move vertical = (l.col / 2) % 2 == 0 ? Move::kSouth : Move::kNorth;
    out.restrict_moves(c, static_cast<std::uint8_t>(move_bit(horizontal) | move_bit(vertical)));
  }
  out.finalize();
  return out;
}

DistanceTable::DistanceTable(const Grid& g, CellId root)
    : root_(root), dist_(static_cast<std::size_t>(g.size()), kUnreachable) {
  // Backward BFS: dist_[x] is the cost of moving from x to root.
  std::vector<CellId> queue;
  queue.reserve(g.size());
  dist_[root] = 0;
  queue.push_back(root);
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const CellId y = queue[head];
    const int dy = dist_[y] + 1;
    for (CellId x : g.predecessors(y)) {
      if (dist_[x] == kUnreachable) {
        dist_[x] = dy;
        queue.push_back(x);
      }
    }
  }
}

DistanceTable build_distance_table(const Grid& g, CellId goal) { return DistanceTable(g, goal); }

DistanceCache::DistanceCache(const Grid& g)
    : grid_(g), slots_(std::make_unique<Slot[]>(static_cast<std::size_t>(g.size()))) {}

const DistanceTable& DistanceCache::table(CellId goal) const {
  Slot& s = slots_[goal];
  std::call_once(s.once, [&] { s.table = DistanceTable(grid_, goal); });
  return s.table;
}

}  // namespace rhcr
