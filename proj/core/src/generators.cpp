#include <algorithm>
#include <cmath>
#include <random>

#include "lmaze/maze.hpp"

namespace lmaze {

namespace {

int to_cells(double mm, double cell_size_mm) {
  return static_cast<int>(std::lround(mm / cell_size_mm));
}

struct Rect {
  int x0, y0, x1, y1;  // inclusive
  bool intersects(const Rect& o) const {
    return x0 <= o.x1 && o.x0 <= x1 && y0 <= o.y1 && o.y0 <= y1;
  }
  Rect grown(int m) const { return {x0 - m, y0 - m, x1 + m, y1 + m}; }
};

void fill(MazeSpec& spec, const Rect& r, CellKind k) {
  for (int y = std::max(0, r.y0); y <= std::min(spec.ny - 1, r.y1); ++y)
    for (int x = std::max(0, r.x0); x <= std::min(spec.nx - 1, r.x1); ++x) spec.cells[spec.index(x, y)] = k;
}

std::vector<Cell> cells_of(const Rect& r) {
  std::vector<Cell> out;
  for (int y = r.y0; y <= r.y1; ++y)
    for (int x = r.x0; x <= r.x1; ++x) out.push_back({x, y});
  std::sort(out.begin(), out.end());
  return out;
}

// Rectangle on one side of a centred square of size n: `depth` is measured
// inwards from the outer edge, `along` runs left-to-right / top-to-bottom.
Rect side_rect(int n, int side, int d0, int d1, int a0, int a1) {
  switch (side) {
    case 0: return {a0, d0, a1, d1};                          // top
    case 1: return {n - 1 - d1, a0, n - 1 - d0, a1};          // right
    case 2: return {a0, n - 1 - d1, a1, n - 1 - d0};          // bottom
    default: return {d0, a0, d1, a1};                         // left
  }
}

}  // namespace

MazeSpec generate_ring_maze(const RingMazeParams& p) {
  if (p.rings < 1) throw MazeError("ring maze needs at least one ring");
  if (!(p.cell_size_mm > 0.0)) throw MazeError("cell size must be positive");
  const int w = to_cells(p.channel_width_mm, p.cell_size_mm);
  const int t = std::max(1, to_cells(p.wall_mm, p.cell_size_mm));
  const int n = to_cells(p.diameter_mm, p.cell_size_mm);
  if (w < 3) throw MazeError("channel width must span at least 3 cells");
  std::vector<int> gaps = p.gaps_per_ring;
  if (gaps.empty()) gaps.assign(p.rings, 1);
  if (static_cast<int>(gaps.size()) != p.rings) throw MazeError("gaps_per_ring must list one count per ring");
  for (int g : gaps)
    if (g < 1) throw MazeError("every ring wall needs at least one gap");

  const int chamber = n - 2 * t - 2 * p.rings * (w + t);
  if (chamber < w)
    throw MazeError("geometry infeasible: rings and channel width exceed the maze diameter");

  MazeSpec spec;
  spec.nx = n;
  spec.ny = n;
  spec.cell_size_mm = p.cell_size_mm;
  spec.cells.assign(static_cast<std::size_t>(n) * n, CellKind::Wall);

  // Ring k = 0 is the innermost corridor; its outer edge sits at depth off(k).
  auto off = [&](int k) { return t + (p.rings - 1 - k) * (w + t); };
  const int chamber_depth = t + p.rings * (w + t);
  for (int k = p.rings - 1; k >= 0; --k) {
    const int d = off(k);
    fill(spec, {d, d, n - 1 - d, n - 1 - d}, CellKind::Channel);
    fill(spec, {d + w, d + w, n - 1 - d - w, n - 1 - d - w}, CellKind::Wall);
  }
  fill(spec, {chamber_depth, chamber_depth, n - 1 - chamber_depth, n - 1 - chamber_depth}, CellKind::Channel);

  std::mt19937_64 rng(p.seed);
  auto pick = [&](int lo, int hi) { return lo + static_cast<int>(rng() % static_cast<std::uint64_t>(hi - lo + 1)); };

  std::vector<Rect> openings;  // gap rectangles, kept for spacing checks
  std::vector<Rect> features;
  constexpr int kMaxAttempts = 10000;

  // Wall k separates ring k from the region inside it (ring k-1 or the chamber).
  for (int k = 0; k < p.rings; ++k) {
    const int inner = off(k) + w + t;  // depth of the inner region's outer edge
    const int span = n - 2 * inner;    // side length of the inner region
    const int margin = std::clamp((span - w) / 2, 0, w);
    const int lo = inner + margin;
    const int hi = n - 1 - inner - margin - (w - 1);
    if (hi < lo) throw MazeError("geometry infeasible: no room for a gap in ring wall");
    for (int g = 0; g < gaps[k]; ++g) {
      bool placed = false;
      for (int attempt = 0; attempt < kMaxAttempts && !placed; ++attempt) {
        const int side = pick(0, 3);
        const int a = pick(lo, hi);
        const Rect gap = side_rect(n, side, off(k) + w, off(k) + w + t - 1, a, a + w - 1);
        bool clash = false;
        for (const auto& o : openings) clash = clash || gap.grown(w).intersects(o);
        if (clash) continue;
        openings.push_back(gap);
        placed = true;
      }
      if (!placed) throw MazeError("geometry infeasible: cannot place ring gaps");
    }
  }
  for (const auto& g : openings) fill(spec, g, CellKind::Channel);

  // One radial barrier per ring corridor.
  for (int k = 0; k < p.rings; ++k) {
    const int d = off(k);
    const int lo = d + 2 * w;
    const int hi = n - 1 - d - 2 * w - (t - 1);
    bool placed = false;
    for (int attempt = 0; attempt < kMaxAttempts && !placed; ++attempt) {
      const int side = pick(0, 3);
      const int a = pick(lo, hi);
      const Rect bar = side_rect(n, side, d, d + w - 1, a, a + t - 1);
      bool clash = false;
      for (const auto& o : openings) clash = clash || bar.grown(w).intersects(o);
      if (clash) continue;
      features.push_back(bar);
      fill(spec, bar, CellKind::Wall);
      placed = true;
    }
    if (!placed) throw MazeError("geometry infeasible: cannot place ring barrier");
  }

  // Electrodes: a small square patch centred in the chamber and one centred
  // across the outer corridor.
  const int patch = std::max(2, w / 4);
  const int c0 = (n - patch) / 2;
  const Rect e1{c0, c0, c0 + patch - 1, c0 + patch - 1};
  Rect e2{};
  bool placed = false;
  {
    const int d = off(p.rings - 1);
    const int lo = d + 2 * w;
    const int hi = n - 1 - d - 2 * w - (patch - 1);
    const int depth0 = d + (w - patch) / 2;
    for (int attempt = 0; attempt < kMaxAttempts && !placed; ++attempt) {
      const int side = pick(0, 3);
      const int a = pick(lo, hi);
      e2 = side_rect(n, side, depth0, depth0 + patch - 1, a, a + patch - 1);
      bool clash = false;
      for (const auto& o : openings) clash = clash || e2.grown(w).intersects(o);
      for (const auto& o : features) clash = clash || e2.grown(w).intersects(o);
      if (clash) continue;
      placed = true;
    }
  }
  if (!placed) throw MazeError("geometry infeasible: cannot place the outer electrode");

  spec.electrodes.push_back({"E1", Polarity::Positive, cells_of(e1)});
  spec.electrodes.push_back({"E2", Polarity::Negative, cells_of(e2)});
  validate(spec);
  return spec;
}

MazeSpec generate_bifurcation_maze(const BifurcationParams& p) {
  const double h = p.cell_size_mm;
  if (!(h > 0.0)) throw MazeError("cell size must be positive");
  if (!(p.len_a_mm > 2 * p.channel_width_mm) || !(p.len_b_mm > 2 * p.channel_width_mm))
    throw MazeError("branch lengths must exceed twice the channel width");
  const int w = to_cells(p.channel_width_mm, h);
  if (w < 3) throw MazeError("channel width must span at least 3 cells");
  const double len_min = std::min(p.len_a_mm, p.len_b_mm);
  const int rise = to_cells(len_min / 2.0, h);  // vertical distance between nodes a and d
  const int hx_a = to_cells((p.len_a_mm - rise * h) / 2.0, h);
  const int hx_b = to_cells((p.len_b_mm - rise * h) / 2.0, h);
  if (rise <= w || hx_a + hx_b <= w || hx_a < w || hx_b < w)
    throw MazeError("geometry infeasible at this cell size");

  const int border = 2;
  const int lead = 3 * w;  // inlet and outlet corridor length
  const int half = std::max(hx_a, hx_b) + border;
  MazeSpec spec;
  spec.nx = 2 * half + w;
  spec.ny = border + lead + rise + w + lead + border;
  spec.cell_size_mm = h;
  spec.cells.assign(static_cast<std::size_t>(spec.nx) * spec.ny, CellKind::Wall);

  const int c0 = half;  // first column of the inlet/outlet corridor
  const int c1 = c0 + w - 1;
  const int ya = border + lead;  // top row of the upper crossbar (node a)
  const int yd = ya + rise;      // top row of the lower crossbar (node d)
  fill(spec, {c0, border, c1, ya}, CellKind::Channel);                             // inlet
  fill(spec, {c0 - hx_a, ya, c1 + hx_b, ya + w - 1}, CellKind::Channel);           // upper crossbar
  fill(spec, {c0 - hx_a, yd, c1 + hx_b, yd + w - 1}, CellKind::Channel);           // lower crossbar
  fill(spec, {c0 - hx_a, ya, c1 - hx_a, yd + w - 1}, CellKind::Channel);           // left leg
  fill(spec, {c0 + hx_b, ya, c1 + hx_b, yd + w - 1}, CellKind::Channel);           // right leg
  fill(spec, {c0, yd + w - 1, c1, spec.ny - 1 - border}, CellKind::Channel);       // outlet

  spec.electrodes.push_back({"E1", Polarity::Positive, cells_of({c0, border, c1, border + 1})});
  spec.electrodes.push_back(
      {"E2", Polarity::Negative, cells_of({c0, spec.ny - 2 - border, c1, spec.ny - 1 - border})});
  validate(spec);
  return spec;
}

MazeSpec generate_strip(int length_cells, int width_cells, double cell_size_mm) {
  if (length_cells < 2 || width_cells < 1) throw MazeError("strip needs length >= 2 and width >= 1");
  MazeSpec spec;
  spec.nx = length_cells;
  spec.ny = width_cells;
  spec.cell_size_mm = cell_size_mm;
  spec.cells.assign(static_cast<std::size_t>(length_cells) * width_cells, CellKind::Channel);
  std::vector<Cell> left;
  std::vector<Cell> right;
  for (int y = 0; y < width_cells; ++y) {
    left.push_back({0, y});
    right.push_back({length_cells - 1, y});
  }
  std::sort(left.begin(), left.end());
  std::sort(right.begin(), right.end());
  spec.electrodes.push_back({"E1", Polarity::Positive, left});
  spec.electrodes.push_back({"E2", Polarity::Negative, right});
  validate(spec);
  return spec;
}

}  // namespace lmaze
