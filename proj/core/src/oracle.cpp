#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <queue>
#include <set>

#include "lmaze/oracle.hpp"

namespace lmaze {

namespace {

constexpr int kDx[4] = {1, 0, -1, 0};  // E, N, W, S
constexpr int kDy[4] = {0, -1, 0, 1};

Cell cell_at(Vec2 p, double h) {
  return {static_cast<int>(std::floor(p.x / h)), static_cast<int>(std::floor(p.y / h))};
}

double segment_distance(Vec2 p, Vec2 a, Vec2 b) {
  const Vec2 ab = b - a;
  const double len2 = dot(ab, ab);
  const double t = len2 > 0.0 ? std::clamp(dot(p - a, ab) / len2, 0.0, 1.0) : 0.0;
  return norm(p - (a + t * ab));
}

}  // namespace

LeeLabels lee_label(const MazeSpec& maze, std::span<const Cell> destination) {
  if (destination.empty()) throw OracleError("destination set is empty");
  LeeLabels out;
  out.nx = maze.nx;
  out.ny = maze.ny;
  out.labels.assign(maze.cells.size(), -1);
  out.destination.assign(destination.begin(), destination.end());
  std::queue<Cell> q;
  for (const auto& c : destination) {
    if (!maze.is_channel(c.x, c.y)) throw OracleError("destination cell is not a channel cell");
    if (out.labels[maze.index(c)] == 0) continue;
    out.labels[maze.index(c)] = 0;
    q.push(c);
  }
  while (!q.empty()) {
    const Cell c = q.front();
    q.pop();
    const int next = out.labels[maze.index(c)] + 1;
    for (int d = 0; d < 4; ++d) {
      const int x = c.x + kDx[d];
      const int y = c.y + kDy[d];
      if (!maze.is_channel(x, y) || out.labels[maze.index(x, y)] >= 0) continue;
      out.labels[maze.index(x, y)] = next;
      q.push({x, y});
    }
  }
  return out;
}

LeeLabels lee_label_to_target(const MazeSpec& maze) {
  const auto neg = maze.electrode_cells(Polarity::Negative);
  return lee_label(maze, neg);
}

Path extract_path(const LeeLabels& labels, Cell source, double cell_size_mm) {
  auto label = labels.at(source);
  if (!label) throw UnreachableError("source cell is unreachable from the destination");
  Path p;
  p.cell_size_mm = cell_size_mm;
  p.cells.push_back(source);
  Cell c = source;
  int v = *label;
  while (v > 0) {
    bool moved = false;
    for (int d = 0; d < 4 && !moved; ++d) {
      const Cell n{c.x + kDx[d], c.y + kDy[d]};
      const auto nl = labels.at(n);
      if (nl && *nl == v - 1) {
        c = n;
        --v;
        p.cells.push_back(c);
        moved = true;
      }
    }
    if (!moved) throw OracleError("label field is inconsistent");
  }
  return p;
}

Path shortest_electrode_path(const MazeSpec& maze) {
  const LeeLabels labels = lee_label_to_target(maze);
  std::optional<Cell> best;
  int best_label = std::numeric_limits<int>::max();
  for (const auto& c : maze.electrode_cells(Polarity::Positive)) {
    const auto l = labels.at(c);
    if (l && *l < best_label) {
      best_label = *l;
      best = c;
    }
  }
  if (!best) throw UnreachableError("no positive electrode cell reaches the negative electrode");
  return extract_path(labels, *best, maze.cell_size_mm);
}

std::string to_string(StreamlineEnd e) {
  switch (e) {
    case StreamlineEnd::ReachedTarget: return "reached_target";
    case StreamlineEnd::FieldVanished: return "field_vanished";
    case StreamlineEnd::MaxSteps: return "max_steps";
  }
  return "";
}

Vec2 sample_bilinear(const VectorField& field, Vec2 p) {
  const double h = field.cell_size_mm;
  const double gx = std::clamp(p.x / h - 0.5, 0.0, static_cast<double>(field.nx - 1));
  const double gy = std::clamp(p.y / h - 0.5, 0.0, static_cast<double>(field.ny - 1));
  const int x0 = std::min(static_cast<int>(gx), std::max(0, field.nx - 2));
  const int y0 = std::min(static_cast<int>(gy), std::max(0, field.ny - 2));
  const int x1 = std::min(x0 + 1, field.nx - 1);
  const int y1 = std::min(y0 + 1, field.ny - 1);
  const double fx = gx - x0;
  const double fy = gy - y0;
  const Vec2 a = (1 - fx) * field(x0, y0) + fx * field(x1, y0);
  const Vec2 b = (1 - fx) * field(x0, y1) + fx * field(x1, y1);
  return (1 - fy) * a + fy * b;
}

Streamline streamline(const VectorField& current, const MazeSpec& maze, Vec2 start, double step_mm, int max_steps) {
  if (current.nx != maze.nx || current.ny != maze.ny) throw DimensionError("field does not match maze");
  if (!(step_mm > 0.0)) throw std::invalid_argument("streamline step must be positive");
  const double h = maze.cell_size_mm;
  auto open_at = [&](Vec2 p) {
    const Cell c = cell_at(p, h);
    return maze.is_channel(c.x, c.y);
  };
  if (!open_at(start)) throw OracleError("streamline starts inside a wall");

  double jmax = 0.0;
  for (const auto& v : current.values) jmax = std::max(jmax, norm(v));
  const double eps = 1e-9 * jmax;
  std::vector<std::uint8_t> target(maze.cells.size(), 0);
  for (const auto& c : maze.electrode_cells(Polarity::Negative)) target[maze.index(c)] = 1;
  auto at_target = [&](Vec2 p) {
    const Cell c = cell_at(p, h);
    return maze.inside(c.x, c.y) && target[maze.index(c)];
  };

  Streamline out;
  out.points.push_back(start);
  Vec2 p = start;
  if (at_target(p)) {
    out.end = StreamlineEnd::ReachedTarget;
    return out;
  }
  auto direction = [&](Vec2 q) -> std::optional<Vec2> {
    const Vec2 v = sample_bilinear(current, q);
    const double n = norm(v);
    if (!(n > eps)) return std::nullopt;
    return (1.0 / n) * v;
  };
  for (int k = 0; k < max_steps; ++k) {
    const auto d1 = direction(p);
    if (!d1) {
      out.end = StreamlineEnd::FieldVanished;
      return out;
    }
    const Vec2 mid = p + (0.5 * step_mm) * *d1;
    const auto d2 = open_at(mid) ? direction(mid) : d1;
    const Vec2 d = d2 ? *d2 : *d1;
    Vec2 next = p + step_mm * d;
    if (!open_at(next)) {
      // Slide along the wall on whichever axis stays open.
      const Vec2 along_x{p.x + step_mm * d.x, p.y};
      const Vec2 along_y{p.x, p.y + step_mm * d.y};
      const bool x_ok = std::abs(d.x) > 1e-3 && open_at(along_x);
      const bool y_ok = std::abs(d.y) > 1e-3 && open_at(along_y);
      if (x_ok && (!y_ok || std::abs(d.x) >= std::abs(d.y))) next = along_x;
      else if (y_ok) next = along_y;
      else {
        out.end = StreamlineEnd::FieldVanished;
        return out;
      }
    }
    p = next;
    out.points.push_back(p);
    if (at_target(p)) {
      out.end = StreamlineEnd::ReachedTarget;
      return out;
    }
  }
  out.end = StreamlineEnd::MaxSteps;
  return out;
}

CorridorMap segment_corridors(const MazeSpec& maze, int width_limit) {
  const int nx = maze.nx;
  const int ny = maze.ny;
  const std::size_t n = maze.cells.size();
  std::vector<int> hrun(n, 0);
  std::vector<int> vrun(n, 0);
  for (int y = 0; y < ny; ++y) {
    int x = 0;
    while (x < nx) {
      if (!maze.is_channel(x, y)) {
        ++x;
        continue;
      }
      int e = x;
      while (e + 1 < nx && maze.is_channel(e + 1, y)) ++e;
      for (int k = x; k <= e; ++k) hrun[maze.index(k, y)] = e - x + 1;
      x = e + 1;
    }
  }
  for (int x = 0; x < nx; ++x) {
    int y = 0;
    while (y < ny) {
      if (!maze.is_channel(x, y)) {
        ++y;
        continue;
      }
      int e = y;
      while (e + 1 < ny && maze.is_channel(x, e + 1)) ++e;
      for (int k = y; k <= e; ++k) vrun[maze.index(x, k)] = e - y + 1;
      y = e + 1;
    }
  }

  CorridorMap map;
  map.nx = nx;
  map.ny = ny;
  {
    // Most common short-run length among cells that clearly lie in a corridor.
    std::map<int, std::size_t> hist;
    for (std::size_t i = 0; i < n; ++i) {
      if (hrun[i] == 0) continue;
      const int lo = std::min(hrun[i], vrun[i]);
      const int hi = std::max(hrun[i], vrun[i]);
      if (hi >= 2 * lo) ++hist[lo];
    }
    int mode = 1;
    std::size_t best = 0;
    for (const auto& [w, count] : hist) {
      if (count > best) {
        best = count;
        mode = w;
      }
    }
    map.corridor_width = mode;
    if (width_limit <= 0) width_limit = mode + std::max(1, mode / 2);
  }
  map.width_limit = width_limit;
  map.kind.assign(n, CorridorMap::Kind::None);
  for (std::size_t i = 0; i < n; ++i) {
    if (hrun[i] == 0) continue;
    const bool h_long = hrun[i] > width_limit;
    const bool v_long = vrun[i] > width_limit;
    if (h_long && !v_long) map.kind[i] = CorridorMap::Kind::Horizontal;
    else if (v_long && !h_long) map.kind[i] = CorridorMap::Kind::Vertical;
    else map.kind[i] = CorridorMap::Kind::Junction;
  }
  map.segment.assign(n, -1);
  for (int y = 0; y < ny; ++y) {
    for (int x = 0; x < nx; ++x) {
      const std::size_t i = maze.index(x, y);
      if (map.kind[i] == CorridorMap::Kind::None || map.segment[i] >= 0) continue;
      const int id = map.segment_count++;
      std::queue<Cell> q;
      q.push({x, y});
      map.segment[i] = id;
      while (!q.empty()) {
        const Cell c = q.front();
        q.pop();
        for (int d = 0; d < 4; ++d) {
          const int ax = c.x + kDx[d];
          const int ay = c.y + kDy[d];
          if (!maze.inside(ax, ay)) continue;
          const std::size_t j = maze.index(ax, ay);
          if (map.segment[j] >= 0 || map.kind[j] != map.kind[i]) continue;
          map.segment[j] = id;
          q.push({ax, ay});
        }
      }
    }
  }
  return map;
}

std::vector<int> corridor_sequence(const CorridorMap& map, std::span<const Cell> route) {
  std::vector<int> seq;
  for (const auto& c : route) {
    if (c.x < 0 || c.y < 0 || c.x >= map.nx || c.y >= map.ny) continue;
    const int s = map.at(c);
    if (s < 0) continue;
    if (!seq.empty() && seq.back() == s) continue;
    auto it = std::find(seq.begin(), seq.end(), s);
    if (it != seq.end()) seq.erase(it + 1, seq.end());
    else seq.push_back(s);
  }
  return seq;
}

std::vector<Cell> cells_along(std::span<const Vec2> polyline, double cell_size_mm, int nx, int ny) {
  std::vector<Cell> out;
  auto add = [&](Vec2 p) {
    const Cell c = cell_at(p, cell_size_mm);
    if (c.x < 0 || c.y < 0 || c.x >= nx || c.y >= ny) return;
    if (out.empty() || !(out.back() == c)) out.push_back(c);
  };
  if (polyline.empty()) return out;
  add(polyline[0]);
  for (std::size_t i = 1; i < polyline.size(); ++i) {
    const Vec2 a = polyline[i - 1];
    const Vec2 b = polyline[i];
    const int steps = std::max(1, static_cast<int>(std::ceil(norm(b - a) / (0.25 * cell_size_mm))));
    for (int k = 1; k <= steps; ++k) add(a + (static_cast<double>(k) / steps) * (b - a));
  }
  return out;
}

double corridor_overlap(const CorridorMap& map, std::span<const Cell> route, std::span<const int> reference) {
  if (route.empty()) return 0.0;
  const std::set<int> ref(reference.begin(), reference.end());
  std::size_t inside = 0;
  for (const auto& c : route) {
    if (c.x < 0 || c.y < 0 || c.x >= map.nx || c.y >= map.ny) continue;
    if (ref.count(map.at(c))) ++inside;
  }
  return static_cast<double>(inside) / static_cast<double>(route.size());
}

Path hot_ridge(const MazeSpec& maze, const ScalarField& joule) {
  if (joule.nx != maze.nx || joule.ny != maze.ny) throw DimensionError("joule map does not match maze");
  double pmax = 0.0;
  for (std::size_t i = 0; i < joule.values.size(); ++i)
    if (maze.cells[i] == CellKind::Channel) pmax = std::max(pmax, joule.values[i]);
  if (!(pmax > 0.0)) throw OracleError("joule map is empty");
  const std::size_t n = maze.cells.size();
  auto cost = [&](std::size_t i) {
    const double p = std::max(joule.values[i], pmax * 1e-24);
    return std::sqrt(pmax / p);
  };
  std::vector<double> dist(n, std::numeric_limits<double>::infinity());
  std::vector<int> prev(n, -1);
  using Item = std::pair<double, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  std::vector<std::uint8_t> goal(n, 0);
  for (const auto& c : maze.electrode_cells(Polarity::Negative)) goal[maze.index(c)] = 1;
  for (const auto& c : maze.electrode_cells(Polarity::Positive)) {
    dist[maze.index(c)] = 0.0;
    pq.push({0.0, maze.index(c)});
  }
  std::optional<std::size_t> reached;
  while (!pq.empty()) {
    const auto [d, i] = pq.top();
    pq.pop();
    if (d > dist[i]) continue;
    if (goal[i]) {
      reached = i;
      break;
    }
    const int x = static_cast<int>(i % maze.nx);
    const int y = static_cast<int>(i / maze.nx);
    for (int k = 0; k < 4; ++k) {
      const int ax = x + kDx[k];
      const int ay = y + kDy[k];
      if (!maze.is_channel(ax, ay)) continue;
      const std::size_t j = maze.index(ax, ay);
      const double nd = d + cost(j);
      if (nd < dist[j]) {
        dist[j] = nd;
        prev[j] = static_cast<int>(i);
        pq.push({nd, j});
      }
    }
  }
  if (!reached) throw UnreachableError("electrodes are not connected");
  Path p;
  p.cell_size_mm = maze.cell_size_mm;
  for (int i = static_cast<int>(*reached); i >= 0; i = prev[i]) {
    p.cells.push_back({i % maze.nx, i / maze.nx});
  }
  std::reverse(p.cells.begin(), p.cells.end());
  return p;
}

double distance_to_path(const Path& path, Vec2 p) {
  const double h = path.cell_size_mm;
  auto center = [h](Cell c) { return Vec2{(c.x + 0.5) * h, (c.y + 0.5) * h}; };
  if (path.cells.empty()) return std::numeric_limits<double>::infinity();
  if (path.cells.size() == 1) return norm(p - center(path.cells[0]));
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < path.cells.size(); ++i)
    best = std::min(best, segment_distance(p, center(path.cells[i - 1]), center(path.cells[i])));
  return best;
}

ComparisonMetrics compare_polyline(std::span<const Vec2> points, const Path& path, const MazeSpec& maze,
                                   const CorridorMap& corridors) {
  if (points.empty() || path.cells.empty()) throw std::invalid_argument("comparison needs non-empty inputs");
  ComparisonMetrics m;
  double length = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (i > 0) length += norm(points[i] - points[i - 1]);
    m.max_lateral_deviation_mm = std::max(m.max_lateral_deviation_mm, distance_to_path(path, points[i]));
  }
  m.length_ratio = path.length_mm() > 0.0 ? length / path.length_mm() : 0.0;
  const auto cells = cells_along(points, maze.cell_size_mm, maze.nx, maze.ny);
  m.trajectory_sequence = corridor_sequence(corridors, cells);
  m.path_sequence = corridor_sequence(corridors, path.cells);
  m.corridor_sequence_equal = m.trajectory_sequence == m.path_sequence;
  m.corridor_overlap = corridor_overlap(corridors, cells, m.path_sequence);
  return m;
}

ComparisonMetrics compare_trajectory(const Trajectory& traj, const Path& path, const MazeSpec& maze,
                                     const CorridorMap& corridors) {
  if (traj.samples.empty() || path.cells.empty()) throw std::invalid_argument("comparison needs non-empty inputs");
  std::vector<Vec2> pts;
  pts.reserve(traj.samples.size());
  for (const auto& s : traj.samples) pts.push_back(s.position);
  ComparisonMetrics m = compare_polyline(pts, path, maze, corridors);
  m.length_ratio = path.length_mm() > 0.0 ? traj.path_length_mm / path.length_mm() : 0.0;
  return m;
}

ComparisonMetrics compare_trajectory(const Trajectory& traj, const Path& path, const MazeSpec& maze) {
  return compare_trajectory(traj, path, maze, segment_corridors(maze));
}

}  // namespace lmaze
