#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace rhcr {

using CellId = std::int32_t;

/// Timestep count used for distances, path costs and heuristic values.
inline constexpr int kUnreachable = std::numeric_limits<int>::max();

/// Saturating sum; anything plus kUnreachable stays kUnreachable.
constexpr int add_dist(int a, int b) {
  if (a == kUnreachable || b == kUnreachable) return kUnreachable;
  return a + b;
}

struct Location {
  int row = 0;
  int col = 0;
  friend bool operator==(const Location&, const Location&) = default;
};

enum class Move : std::uint8_t { kNorth = 0, kSouth = 1, kEast = 2, kWest = 3, kWait = 4 };

inline constexpr std::array<Move, 4> kCardinalMoves = {Move::kNorth, Move::kSouth, Move::kEast,
                                                       Move::kWest};

constexpr std::uint8_t move_bit(Move m) { return static_cast<std::uint8_t>(1u << static_cast<int>(m)); }
inline constexpr std::uint8_t kAllCardinal = 0b1111;

enum class EndpointRole : std::uint8_t {
  kNone,
  kEndpoint,      // 'E': generic goal endpoint (shelf side, chute side)
  kWorkStation,   // 'W'
  kInventoryPod,  // 'S': inventory pod / loading endpoint
};

struct Neighbor {
  Move move;
  CellId cell;
};

class MapError : public std::runtime_error {
 public:
  enum class Kind { kMalformed, kDimensionMismatch, kUnknownGlyph, kDirectionOnImpassable };

  MapError(Kind kind, int line, const std::string& what);

  Kind kind() const { return kind_; }
  /// 1-based line in the map text, 0 when not tied to a line.
  int line() const { return line_; }

 private:
  Kind kind_;
  int line_;
};

/// 4-neighbour grid with an obstacle mask, per-cell allowed moves and endpoint roles.
/// Immutable once built; share freely across threads.
class Grid {
 public:
  Grid() = default;
  Grid(int rows, int cols);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  int size() const { return rows_ * cols_; }

  CellId cell(Location l) const { return l.row * cols_ + l.col; }
  CellId cell(int row, int col) const { return row * cols_ + col; }
  Location location(CellId c) const { return {c / cols_, c % cols_}; }
  bool in_bounds(Location l) const {
    return l.row >= 0 && l.row < rows_ && l.col >= 0 && l.col < cols_;
  }

  bool passable(CellId c) const { return passable_[c] != 0; }
  EndpointRole role(CellId c) const { return roles_[c]; }
  std::uint8_t allowed_moves(CellId c) const { return moves_[c]; }
  bool allows(CellId c, Move m) const { return m == Move::kWait ? passable(c) : (moves_[c] & move_bit(m)) != 0; }

  /// Target of a move ignoring permissions; nullopt when off-grid.
  std::optional<CellId> step(CellId c, Move m) const;

  /// Allowed moves at c including the wait; only valid for passable c.
  std::vector<Neighbor> neighbors(CellId c) const;

  /// Direct successor list (without wait) used by hot loops.
  const std::vector<CellId>& successors(CellId c) const { return succ_[c]; }
  /// Cells that can move into c in one step (without wait).
  const std::vector<CellId>& predecessors(CellId c) const { return pred_[c]; }

  /// True when every allowed move has its reverse allowed.
  bool undirected() const;

  std::vector<CellId> cells_with_role(EndpointRole role) const;
  std::vector<CellId> passable_cells() const;
  int obstacle_count() const;

  // Mutation is only used while building.
  void set_passable(CellId c, bool p);
  void set_role(CellId c, EndpointRole r) { roles_[c] = r; }
  /// Intersects the cell's move set with mask; off-grid/blocked targets are always excluded.
  void restrict_moves(CellId c, std::uint8_t mask);
  /// Recomputes geometric moves from the obstacle mask (undirected), dropping restrictions.
  void reset_moves();
  /// Rebuilds successor/predecessor lists; call after edits.
  void finalize();

 private:
  std::uint8_t geometric_moves(CellId c) const;

  int rows_ = 0;
  int cols_ = 0;
  std::vector<std::uint8_t> passable_;
  std::vector<EndpointRole> roles_;
  std::vector<std::uint8_t> moves_;
  std::vector<std::vector<CellId>> succ_;
  std::vector<std::vector<CellId>> pred_;
};

Grid load_map(std::string_view text);
Grid load_map_file(const std::string& path);
/// Writes the map text format; the DIRECTIONS section is emitted only for directed grids.
std::string write_map(const Grid& g);

/// Horizontal moves alternate 2 rows east / 2 rows west, vertical moves alternate
/// 2 columns south / 2 columns north, starting at row 0 and column 0.
Grid generate_sorting_directions(const Grid& g);

/// Shortest allowed-move distance from every cell to a fixed root.
class DistanceTable {
 public:
  DistanceTable() = default;
  DistanceTable(const Grid& g, CellId root);

  CellId root() const { return root_; }
  int operator[](CellId from) const { return dist_[from]; }
  const std::vector<int>& values() const { return dist_; }

 private:
  CellId root_ = -1;
  std::vector<int> dist_;
};

DistanceTable build_distance_table(const Grid& g, CellId goal);

/// Lazily built, never evicted per-goal tables. Lookups may run concurrently; each
/// table is constructed at most once.
class DistanceCache {
 public:
  explicit DistanceCache(const Grid& g);
  DistanceCache(const DistanceCache&) = delete;
  DistanceCache& operator=(const DistanceCache&) = delete;

  const Grid& grid() const { return grid_; }
  const DistanceTable& table(CellId goal) const;
  int dist(CellId from, CellId to) const { return table(to)[from]; }

 private:
  struct Slot {
    std::once_flag once;
    DistanceTable table;
  };
  const Grid& grid_;
  std::unique_ptr<Slot[]> slots_;
};

}  // namespace rhcr
