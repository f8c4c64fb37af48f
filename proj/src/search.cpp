#include "rhcr/search.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <queue>
#include <set>
#include <unordered_map>

namespace rhcr {

int compute_h_value(const DistanceCache& dist, std::span<const CellId> goals, CellId x, int label) {
  const int n = static_cast<int>(goals.size());
  if (label >= n) return 0;
  int h = dist.dist(x, goals[label]);
  for (int j = label + 1; j < n && h != kUnreachable; ++j) {
    h = add_dist(h, dist.dist(goals[j - 1], goals[j]));
  }
  return h;
}

// ---------------------------------------------------------------------------
// ReservationTable

ReservationTable::ReservationTable(int cell_count, Horizon w, Horizon hold)
    : w_(w), hold_(hold), vertex_(static_cast<std::size_t>(cell_count)), edge_(static_cast<std::size_t>(cell_count)) {}

void ReservationTable::add_vertex(CellId c, int t) {
  if (!w_.covers(t)) return;
  vertex_[c].push_back({t, t + 1});
  static_after_ = std::max(static_after_, t + 1);
  ++entries_;
}

void ReservationTable::add_vertex_from(CellId c, int t) {
  if (!w_.covers(t)) return;
  if (w_.is_infinite()) {
    vertex_[c].push_back({t, Horizon::kInfiniteSteps});
    static_after_ = std::max(static_after_, t);
    has_permanent_ = true;
  } else {
    vertex_[c].push_back({t, w_.value() + 1});
    static_after_ = std::max(static_after_, w_.value() + 1);
  }
  ++entries_;
}

void ReservationTable::add_edge(CellId from, CellId to, int t) {
  if (!w_.covers(t)) return;
  edge_[from].push_back({to, t});
  static_after_ = std::max(static_after_, t + 1);
  ++entries_;
}

void ReservationTable::add_path(const Path& p) {
  const auto& loc = p.locations;
  const int n = static_cast<int>(loc.size());
  int run_begin = 0;
  for (int t = 1; t <= n; ++t) {
    if (t < n && loc[t] == loc[run_begin]) continue;
    if (t == n) {
      if (hold_.is_infinite()) {
        add_vertex_from(loc[run_begin], run_begin);
      } else if (w_.covers(run_begin)) {
        const int end = std::min(std::max(run_begin, hold_.value()), w_.value()) + 1;
        vertex_[loc[run_begin]].push_back({run_begin, end});
        static_after_ = std::max(static_after_, end);
        ++entries_;
      }
    } else {
      if (!w_.covers(run_begin)) break;
      const int end = std::min(t, w_.value() + 1);
      vertex_[loc[run_begin]].push_back({run_begin, end});
      static_after_ = std::max(static_after_, end);
      ++entries_;
      add_edge(loc[t], loc[t - 1], t);
    }
    run_begin = t;
  }
}

bool ReservationTable::vertex_blocked(CellId c, int t) const {
  for (const Interval& iv : vertex_[c]) {
    if (iv.begin <= t && t < iv.end) return true;
  }
  return false;
}

bool ReservationTable::edge_blocked(CellId from, CellId to, int t) const {
  for (const EdgeBan& e : edge_[from]) {
    if (e.t == t && e.to == to) return true;
  }
  return false;
}

int ReservationTable::vertex_count(CellId c, int t) const {
  int n = 0;
  for (const Interval& iv : vertex_[c]) n += (iv.begin <= t && t < iv.end) ? 1 : 0;
  return n;
}

int ReservationTable::edge_count(CellId from, CellId to, int t) const {
  int n = 0;
  for (const EdgeBan& e : edge_[from]) n += (e.t == t && e.to == to) ? 1 : 0;
  return n;
}

bool ReservationTable::can_hold(CellId c, int t) const {
  const int until = std::max(t, hold_.value());
  for (const Interval& iv : vertex_[c]) {
    if (iv.end > t && iv.begin <= until) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Multi-Label A*

namespace {

struct Node {
  CellId loc;
  int t;
  int label;
  int h;
  int soft;
  int parent;
  unsigned version;
  bool closed;
  int f() const { return t + h; }
};

class MultiLabelSearch {
 public:
  MultiLabelSearch(const DistanceCache& dist, CellId start, std::span<const CellId> goals,
                   const ReservationTable& hard, SearchMode mode, const ReservationTable* soft)
      : dist_(dist),
        grid_(dist.grid()),
        start_(start),
        goals_(goals),
        hard_(hard),
        soft_(soft),
        weight_(std::max(1.0, mode.focal_weight)),
        focal_(weight_ > 1.0 || soft != nullptr) {
    const int n = static_cast<int>(goals_.size());
    suffix_.assign(n + 1, 0);
    for (int l = n - 2; l >= 0; --l) suffix_[l] = add_dist(suffix_[l + 1], leg(goals_[l], goals_[l + 1]));
    free_after_ = std::max(hard_.static_after(), soft_ ? soft_->static_after() : 0);
    free_flight_ok_ = !hard_.has_permanent() && !(soft_ && soft_->has_permanent());
    const long long cells = grid_.size();
    const long long horizon_part = hard_.horizon().is_infinite() ? free_after_ : hard_.horizon().value();
    time_cap_ = static_cast<int>(std::min<long long>((n + 1) * cells + horizon_part, Horizon::kInfiniteSteps));
  }

  SearchResult run() {
    SearchResult result;
    const int n = static_cast<int>(goals_.size());
    assert(n > 0);
    const int root_label = (start_ == goals_[0]) ? 1 : 0;
    const int root_h = h_value(start_, root_label);
    if (root_h == kUnreachable) return result;
    f_min_ = root_h;
    bound_ = focal_bound(f_min_);
    add_node(start_, 0, root_label, root_h, 0, -1);

    while (true) {
      int lb = 0;
      const int idx = pop(lb);
      if (idx < 0) break;
      ++result.expanded;
      const Node cur = nodes_[idx];

      if (cur.label == n && cur.loc == goals_.back() && hard_.can_hold(cur.loc, cur.t)) {
        result.path = reconstruct(idx);
        result.lower_bound = focal_ ? lb : cur.f();
        result.soft_collisions = cur.soft + waits_first(*result.path);
        return result;
      }
      if (free_flight_ok_ && cur.t >= free_after_) {
        Path p = reconstruct(idx);
        complete_greedily(p, cur.loc, cur.label);
        result.lower_bound = focal_ ? lb : cur.f();
        result.soft_collisions = cur.soft + waits_first(p);
        result.path = std::move(p);
        return result;
      }
      if (cur.t >= time_cap_) continue;

      const int nt = cur.t + 1;
      auto try_child = [&](CellId next) {
        if (hard_.vertex_blocked(next, nt)) return;
        if (next != cur.loc && hard_.edge_blocked(cur.loc, next, nt)) return;
        const int label = (cur.label < n && next == goals_[cur.label]) ? cur.label + 1 : cur.label;
        const int h = h_value(next, label);
        if (h == kUnreachable) return;
        int soft = cur.soft;
        if (soft_ != nullptr) {
          soft += soft_->vertex_count(next, nt);
          if (next != cur.loc) soft += soft_->edge_count(cur.loc, next, nt);
        }
        const std::uint64_t key = make_key(next, nt, label);
        auto it = index_.find(key);
        if (it == index_.end()) {
          const int child = add_node(next, nt, label, h, soft, idx);
          index_.emplace(key, child);
          return;
        }
        Node& old = nodes_[it->second];
        if (old.closed) return;
        if (nt < old.t || (nt == old.t && soft < old.soft)) {
          improve(it->second, nt, soft, idx);
        }
      };
      for (CellId next : grid_.successors(cur.loc)) try_child(next);
      try_child(cur.loc);
    }
    result.path.reset();
    return result;
  }

 private:
  struct HeapEntry {
    int f;
    int t;
    int idx;
    bool operator<(const HeapEntry& o) const {
      // priority_queue is a max-heap: "less" means lower priority.
      if (f != o.f) return f > o.f;
      if (t != o.t) return t < o.t;
      return idx > o.idx;
    }
  };
  struct FocalEntry {
    int soft;
    int f;
    int t;
    int idx;
    unsigned version;
    bool operator<(const FocalEntry& o) const {
      if (soft != o.soft) return soft > o.soft;
      if (f != o.f) return f > o.f;
      if (t != o.t) return t < o.t;
      return idx > o.idx;
    }
  };

  // Visiting the cell the agent stands on takes one wait, so a repeated goal costs 1.
  // This keeps h exact on an unconstrained map, which the free-flight shortcut relies on.
  int leg(CellId from, CellId to) const { return from == to ? 1 : dist_.dist(from, to); }

  int h_value(CellId x, int label) const {
    const int n = static_cast<int>(goals_.size());
    if (label >= n) return dist_.dist(x, goals_.back());
    return add_dist(leg(x, goals_[label]), suffix_[label]);
  }

  int focal_bound(int fmin) const {
    return static_cast<int>(std::floor(weight_ * static_cast<double>(fmin) + 1e-9));
  }

  std::uint64_t make_key(CellId loc, int t, int label) const {
    const int kt = std::min(t, free_after_);
    return (static_cast<std::uint64_t>(kt) << 32) | (static_cast<std::uint64_t>(loc) << 10) |
           static_cast<std::uint64_t>(label);
  }

  int add_node(CellId loc, int t, int label, int h, int soft, int parent) {
    const int idx = static_cast<int>(nodes_.size());
    nodes_.push_back({loc, t, label, h, soft, parent, 0u, false});
    if (parent < 0) index_.emplace(make_key(loc, t, label), idx);
    push(idx);
    return idx;
  }

  void improve(int idx, int t, int soft, int parent) {
    Node& nd = nodes_[idx];
    if (focal_) open_.erase({nd.f(), idx});
    nd.t = t;
    nd.soft = soft;
    nd.parent = parent;
    ++nd.version;
    push(idx);
  }

  void push(int idx) {
    const Node& nd = nodes_[idx];
    if (!focal_) {
      heap_.push({nd.f(), nd.t, idx});
      return;
    }
    open_.insert({nd.f(), idx});
    if (nd.f() <= bound_) focal_heap_.push({nd.soft, nd.f(), nd.t, idx, nd.version});
  }

  int pop(int& lb) {
    if (!focal_) {
      while (!heap_.empty()) {
        const HeapEntry e = heap_.top();
        heap_.pop();
        Node& nd = nodes_[e.idx];
        if (nd.closed || nd.t != e.t) continue;
        nd.closed = true;
        lb = e.f;
        return e.idx;
      }
      return -1;
    }
    while (!open_.empty()) {
      raise_bound();
      if (focal_heap_.empty()) break;
      const FocalEntry e = focal_heap_.top();
      focal_heap_.pop();
      Node& nd = nodes_[e.idx];
      if (nd.closed || nd.version != e.version) continue;
      lb = open_.begin()->first;
      open_.erase({nd.f(), e.idx});
      nd.closed = true;
      return e.idx;
    }
    return -1;
  }

  // Moves open nodes into focal once the minimum f has risen past the old bound.
  void raise_bound() {
    if (open_.begin()->first <= f_min_) return;
    const int old_bound = bound_;
    f_min_ = open_.begin()->first;
    bound_ = focal_bound(f_min_);
    for (auto it = open_.upper_bound({old_bound, std::numeric_limits<int>::max()});
         it != open_.end() && it->first <= bound_; ++it) {
      const Node& o = nodes_[it->second];
      focal_heap_.push({o.soft, o.f(), o.t, it->second, o.version});
    }
  }

  Path reconstruct(int idx) const {
    std::vector<int> chain;
    for (int i = idx; i >= 0; i = nodes_[i].parent) chain.push_back(i);
    std::reverse(chain.begin(), chain.end());
    Path p;
    p.locations.reserve(chain.size());
    int prev_label = 0;
    for (int i : chain) {
      const Node& nd = nodes_[i];
      p.locations.push_back(nd.loc);
      for (int l = prev_label; l < nd.label; ++l) p.goal_visit_times.push_back(nd.t);
      prev_label = nd.label;
    }
    return p;
  }

  int soft_step(CellId from, CellId to, int t) const {
    if (soft_ == nullptr) return 0;
    return soft_->vertex_count(to, t) + (from != to ? soft_->edge_count(from, to, t) : 0);
  }

  // Among equal-cost paths, take each wait as early as it can go: a wait is swapped with the
  // move before it while hard constraints allow and soft collisions do not grow. Returns the
  // change in soft collisions (<= 0).
  int waits_first(Path& p) const {
    std::vector<CellId> loc = p.locations;
    int delta = 0;
    for (std::size_t i = 1; i < loc.size(); ++i) {
      if (loc[i] != loc[i - 1]) continue;
      for (std::size_t k = i; k >= 2 && loc[k - 1] != loc[k - 2]; --k) {
        const CellId a = loc[k - 2], b = loc[k - 1];
        const int tk = static_cast<int>(k);
        if (hard_.vertex_blocked(a, tk - 1) || hard_.edge_blocked(a, b, tk)) break;
        const int d = soft_step(a, a, tk - 1) + soft_step(a, b, tk) - soft_step(a, b, tk - 1) - soft_step(b, b, tk);
        if (d > 0) break;
        loc[k - 1] = a;
        delta += d;
      }
    }
    std::vector<int> visits;
    const int n = static_cast<int>(goals_.size());
    int label = 0;
    for (std::size_t t = 0; t < loc.size(); ++t) {
      if (label < n && loc[t] == goals_[label]) {
        ++label;
        visits.push_back(static_cast<int>(t));
      }
    }
    if (label < n) return 0;  // a moved wait was needed to visit a repeated goal
    p.locations = std::move(loc);
    p.goal_visit_times = std::move(visits);
    return delta;
  }

  // Follows distance tables to the end of the goal sequence; only valid where nothing
  // constrains the remaining route.
  void complete_greedily(Path& p, CellId loc, int label) const {
    const int n = static_cast<int>(goals_.size());
    int t = p.cost();
    while (label < n || loc != goals_.back()) {
      const CellId target = label < n ? goals_[label] : goals_.back();
      const int d = dist_.dist(loc, target);
      CellId next = loc;  // d == 0: a wait re-visits the goal
      for (CellId s : grid_.successors(loc)) {
        if (d > 0 && dist_.dist(s, target) == d - 1) {
          next = s;
          break;
        }
      }
      loc = next;
      ++t;
      p.locations.push_back(loc);
      if (label < n && loc == goals_[label]) {
        ++label;
        p.goal_visit_times.push_back(t);
      }
    }
  }

  const DistanceCache& dist_;
  const Grid& grid_;
  CellId start_;
  std::span<const CellId> goals_;
  const ReservationTable& hard_;
  const ReservationTable* soft_;
  double weight_;
  bool focal_;
  std::vector<int> suffix_;
  int free_after_ = 0;
  bool free_flight_ok_ = true;
  int time_cap_ = 0;

  std::vector<Node> nodes_;
  std::unordered_map<std::uint64_t, int> index_;
  std::priority_queue<HeapEntry> heap_;
  std::set<std::pair<int, int>> open_;
  std::priority_queue<FocalEntry> focal_heap_;
  int f_min_ = 0;
  int bound_ = 0;
};

}  // namespace

SearchResult multi_label_astar(const DistanceCache& dist, CellId start, std::span<const CellId> goals,
                               const ReservationTable& hard, SearchMode mode,
                               const ReservationTable* soft) {
  MultiLabelSearch search(dist, start, goals, hard, mode, soft);
  return search.run();
}

// ---------------------------------------------------------------------------
// Conflict detection

namespace {

int last_checked_time(std::span<const Path> paths, Horizon w) {
  int longest = 0;
  for (const Path& p : paths) longest = std::max(longest, p.cost());
  // After every path has ended all agents are static, so time `longest` is representative.
  return std::min(longest, w.value());
}

bool present(const Path& p, int t, Horizon hold) { return t <= std::max(p.cost(), hold.value()); }

template <typename Visit>
void scan_conflicts(std::span<const Path> paths, Horizon w, Horizon hold, Visit&& visit) {
  const int n = static_cast<int>(paths.size());
  const int last = last_checked_time(paths, w);
  std::vector<std::pair<CellId, int>> movers;
  for (int t = 0; t <= last; ++t) {
    // Vertex conflicts: agents sharing a cell.
    std::vector<std::pair<CellId, int>> cells;
    cells.reserve(n);
    for (int i = 0; i < n; ++i) {
      if (present(paths[i], t, hold)) cells.emplace_back(paths[i].at(t), i);
    }
    std::sort(cells.begin(), cells.end());
    std::vector<Conflict> found;
    for (std::size_t a = 0; a < cells.size();) {
      std::size_t b = a + 1;
      while (b < cells.size() && cells[b].first == cells[a].first) ++b;
      for (std::size_t x = a; x < b; ++x) {
        for (std::size_t y = x + 1; y < b; ++y) {
          found.push_back({Conflict::Kind::kVertex, cells[x].second, cells[y].second, cells[a].first, -1, t});
        }
      }
      a = b;
    }
    // Swap conflicts: i moves u -> v while j moves v -> u.
    if (t > 0) {
      movers.clear();
      for (int i = 0; i < n; ++i) {
        if (paths[i].at(t - 1) != paths[i].at(t)) movers.emplace_back(paths[i].at(t - 1), i);
      }
      std::sort(movers.begin(), movers.end());
      for (const auto& [u, i] : movers) {
        const CellId v = paths[i].at(t);
        auto lo = std::lower_bound(movers.begin(), movers.end(), std::make_pair(v, 0));
        for (auto it = lo; it != movers.end() && it->first == v; ++it) {
          const int j = it->second;
          if (j > i && paths[j].at(t) == u) found.push_back({Conflict::Kind::kEdge, i, j, u, v, t});
        }
      }
    }
    std::sort(found.begin(), found.end(), [](const Conflict& a, const Conflict& b) {
      if (a.agent1 != b.agent1) return a.agent1 < b.agent1;
      return a.agent2 < b.agent2;
    });
    for (const Conflict& c : found) {
      if (!visit(c)) return;
    }
  }
}

}  // namespace

std::vector<Conflict> detect_conflicts(std::span<const Path> paths, Horizon w, Horizon hold) {
  std::vector<Conflict> out;
  scan_conflicts(paths, w, hold, [&](const Conflict& c) {
    out.push_back(c);
    return true;
  });
  return out;
}

std::optional<Conflict> first_conflict(std::span<const Path> paths, Horizon w, Horizon hold) {
  std::optional<Conflict> out;
  scan_conflicts(paths, w, hold, [&](const Conflict& c) {
    out = c;
    return false;
  });
  return out;
}

bool paths_conflict(const Path& a, const Path& b, Horizon w, Horizon hold) {
  const int last = std::min(std::max(a.cost(), b.cost()), w.value());
  for (int t = 0; t <= last; ++t) {
    if (a.at(t) == b.at(t) && present(a, t, hold) && present(b, t, hold)) return true;
    if (t > 0 && a.at(t) != a.at(t - 1) && a.at(t) == b.at(t - 1) && a.at(t - 1) == b.at(t)) return true;
  }
  return false;
}

}  // namespace rhcr
