#pragma once

// Independent reference implementations used by the tests. Nothing here calls
// into the solver or the oracle module it checks.

#include <algorithm>
#include <cmath>
#include <deque>
#include <random>
#include <string>
#include <vector>

#include "lmaze/maze.hpp"

namespace lmaze::testing {

inline MazeSpec maze_from_rows(const std::vector<std::string>& rows, double h = kDefaultCellSizeMm) {
  std::string text;
  for (const auto& r : rows) text += r + "\n";
  MazeSpec m = parse_maze(text);
  m.cell_size_mm = h;
  return m;
}

// Random maze up to max_n x max_n with walls, a few coated cells and one
// S and one T cell (possibly more), retried until the electrodes connect.
inline MazeSpec random_maze(std::mt19937_64& rng, int max_n) {
  std::uniform_int_distribution<int> dim(3, max_n);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  while (true) {
    const int nx = dim(rng);
    const int ny = dim(rng);
    std::vector<std::string> rows(static_cast<std::size_t>(ny), std::string(static_cast<std::size_t>(nx), '.'));
    for (auto& r : rows)
      for (auto& ch : r) {
        const double p = u(rng);
        ch = p < 0.25 ? '#' : p < 0.30 ? '+' : '.';
      }
    auto put = [&](char g) {
      std::uniform_int_distribution<int> px(0, nx - 1);
      std::uniform_int_distribution<int> py(0, ny - 1);
      rows[static_cast<std::size_t>(py(rng))][static_cast<std::size_t>(px(rng))] = g;
    };
    const int ns = 1 + static_cast<int>(u(rng) * 3);
    for (int k = 0; k < ns; ++k) put('S');
    const int nt = 1 + static_cast<int>(u(rng) * 3);
    for (int k = 0; k < nt; ++k) put('T');
    std::string text;
    for (const auto& r : rows) text += r + "\n";
    MazeSpec m;
    try {
      m = parse_maze(text);
    } catch (const MazeError&) {
      continue;  // every S or T overwritten
    }
    m.sigma_electrolyte = 1.0 + 20.0 * u(rng);
    m.sigma_coating = 1e3 * (1.0 + u(rng));
    m.applied_voltage = 1.0 + 9.0 * u(rng);
    if (validate_and_components(m).solvable) return m;
  }
}

// Dense Gaussian elimination with partial pivoting.
inline std::vector<double> gauss_solve(std::vector<std::vector<double>> a, std::vector<double> b) {
  const std::size_t n = b.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
    std::swap(a[col], a[piv]);
    std::swap(b[col], b[piv]);
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = a[r][col] / a[col][col];
      if (f == 0.0) continue;
      for (std::size_t k = col; k < n; ++k) a[r][k] -= f * a[col][k];
      b[r] -= f * b[col];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t k = i + 1; k < n; ++k) s -= a[i][k] * x[k];
    x[i] = s / a[i][i];
  }
  return x;
}

// Cell-by-cell conductance network solved directly. Cells that are
// insulating or not conductively connected to an electrode read 0 V.
inline std::vector<double> dense_potential(const MazeSpec& m) {
  const auto sigma = conductivity_grid(m);
  const int nx = m.nx;
  const int ny = m.ny;
  const std::size_t n = sigma.size();
  std::vector<int> fixed(n, 0);  // 1 positive, -1 negative
  for (const auto& e : m.electrodes)
    for (const auto& c : e.cells) fixed[m.index(c.x, c.y)] = e.polarity == Polarity::Positive ? 1 : -1;
  auto g = [&](std::size_t i, std::size_t j) {
    const double a = sigma[i];
    const double b = sigma[j];
    return (a > 0.0 && b > 0.0) ? 2.0 * a * b / (a + b) : 0.0;
  };
  auto neighbours = [&](std::size_t i) {
    std::vector<std::size_t> out;
    const int x = static_cast<int>(i % nx);
    const int y = static_cast<int>(i / nx);
    if (x > 0) out.push_back(i - 1);
    if (x + 1 < nx) out.push_back(i + 1);
    if (y > 0) out.push_back(i - nx);
    if (y + 1 < ny) out.push_back(i + nx);
    return out;
  };
  // Cells reachable from an electrode through conducting faces.
  std::vector<std::uint8_t> live(n, 0);
  std::deque<std::size_t> q;
  for (std::size_t i = 0; i < n; ++i)
    if (fixed[i] != 0) {
      live[i] = 1;
      q.push_back(i);
    }
  while (!q.empty()) {
    const std::size_t i = q.front();
    q.pop_front();
    for (std::size_t j : neighbours(i))
      if (!live[j] && g(i, j) > 0.0) {
        live[j] = 1;
        q.push_back(j);
      }
  }
  std::vector<long> unknown(n, -1);
  std::size_t count = 0;
  for (std::size_t i = 0; i < n; ++i)
    if (live[i] && fixed[i] == 0) unknown[i] = static_cast<long>(count++);
  std::vector<std::vector<double>> a(count, std::vector<double>(count, 0.0));
  std::vector<double> b(count, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (unknown[i] < 0) continue;
    const auto r = static_cast<std::size_t>(unknown[i]);
    for (std::size_t j : neighbours(i)) {
      const double gij = g(i, j);
      if (gij == 0.0) continue;
      a[r][r] += gij;
      if (unknown[j] >= 0) a[r][static_cast<std::size_t>(unknown[j])] -= gij;
      else if (fixed[j] > 0) b[r] += gij * m.applied_voltage;
    }
  }
  const auto x = count > 0 ? gauss_solve(a, b) : std::vector<double>{};
  std::vector<double> phi(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (fixed[i] > 0) phi[i] = m.applied_voltage;
    else if (unknown[i] >= 0) phi[i] = x[static_cast<std::size_t>(unknown[i])];
  }
  return phi;
}

// Brute force: one BFS per destination cell, minimum over all of them.
inline std::vector<int> bfs_distance(const MazeSpec& m, const std::vector<Cell>& dest) {
  const std::size_t n = m.cells.size();
  std::vector<int> best(n, -1);
  for (const Cell d : dest) {
    std::vector<int> dist(n, -1);
    std::deque<Cell> q{d};
    dist[m.index(d.x, d.y)] = 0;
    while (!q.empty()) {
      const Cell c = q.front();
      q.pop_front();
      const Cell nb[4] = {{c.x + 1, c.y}, {c.x - 1, c.y}, {c.x, c.y + 1}, {c.x, c.y - 1}};
      for (const Cell k : nb) {
        if (!m.inside(k.x, k.y) || !m.is_channel(k.x, k.y) || dist[m.index(k.x, k.y)] >= 0) continue;
        dist[m.index(k.x, k.y)] = dist[m.index(c.x, c.y)] + 1;
        q.push_back(k);
      }
    }
    for (std::size_t i = 0; i < n; ++i)
      if (dist[i] >= 0 && (best[i] < 0 || dist[i] < best[i])) best[i] = dist[i];
  }
  return best;
}

// T-junction: an inlet from E1 (bottom) meets a horizontal bar; the left arm
// runs `left` cells and the right arm `right` cells from the junction to
// their T columns. Arms and inlet are `w` cells wide.
struct TJunction {
  MazeSpec maze;
  int junction_x0 = 0;  // first column of the junction block
  int bar_y0 = 0;       // first row of the bar
  int w = 0;
};

inline TJunction t_junction(int left, int right, int w, int inlet) {
  const int nx = left + w + right + 2;
  const int ny = 2 + w + inlet + 1;
  std::vector<std::string> rows(static_cast<std::size_t>(ny), std::string(static_cast<std::size_t>(nx), '#'));
  const int y0 = 1;
  const int jx = 1 + left;
  for (int y = y0; y < y0 + w; ++y)
    for (int x = 1; x < nx - 1; ++x) rows[y][x] = '.';
  for (int y = y0; y < y0 + w; ++y) {
    rows[y][1] = 'T';
    rows[y][nx - 2] = 'T';
  }
  for (int y = y0 + w; y < ny - 1; ++y)
    for (int x = jx; x < jx + w; ++x) rows[y][x] = y == ny - 2 ? 'S' : '.';
  TJunction t;
  t.maze = maze_from_rows(rows);
  t.junction_x0 = jx;
  t.bar_y0 = y0;
  t.w = w;
  return t;
}

// Nodal analysis of a resistor network; node 0 is held at v0, the last node
// at 0 V. Returns node potentials.
struct Resistor {
  int a;
  int b;
  double r;
};

inline std::vector<double> network_potentials(int nodes, const std::vector<Resistor>& rs, double v0) {
  const int unknowns = nodes - 2;
  std::vector<std::vector<double>> a(static_cast<std::size_t>(unknowns), std::vector<double>(unknowns, 0.0));
  std::vector<double> b(static_cast<std::size_t>(unknowns), 0.0);
  auto var = [&](int node) { return node - 1; };
  for (const auto& r : rs) {
    const double g = 1.0 / r.r;
    for (auto [p, q] : {std::pair{r.a, r.b}, std::pair{r.b, r.a}}) {
      if (p == 0 || p == nodes - 1) continue;
      a[var(p)][var(p)] += g;
      if (q == 0) b[var(p)] += g * v0;
      else if (q != nodes - 1) a[var(p)][var(q)] -= g;
    }
  }
  const auto x = gauss_solve(a, b);
  std::vector<double> v(static_cast<std::size_t>(nodes), 0.0);
  v[0] = v0;
  for (int k = 1; k < nodes - 1; ++k) v[k] = x[var(k)];
  return v;
}

}  // namespace lmaze::testing
