#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "lmaze/field.hpp"
#include "lmaze/maze.hpp"
#include "support.hpp"

using namespace lmaze;
namespace lt = lmaze::testing;

namespace {

struct Solved {
  MazeSpec maze;
  std::vector<double> sigma;
  PotentialSolution sol;
  VectorField J;
};

Solved solve(const MazeSpec& m, SolverSettings s = {}) {
  Solved r{m, conductivity_grid(m), solve_potential(m, s), {}};
  r.J = current_density(r.sol.potential, r.sigma);
  return r;
}

// Current through the vertical cross-section between column x and x+1,
// rows [y0, y1), per metre of depth.
double column_current(const Solved& s, int x, int y0, int y1) {
  double sum = 0.0;
  for (int y = y0; y < y1; ++y) sum += s.J.face_east[s.J.index(x, y)];
  return sum * s.maze.cell_size_mm * 1e-3;
}

}  // namespace

TEST_CASE("uniform strip: linear potential and uniform current") {
  const MazeSpec m = lt::maze_from_rows({"S......................T", "S......................T", "S......................T"});
  const Solved s = solve(m);
  REQUIRE(s.sol.report.converged);
  const double V = m.applied_voltage;
  const double L = (m.nx - 1) * m.cell_size_mm * 1e-3;
  for (int y = 0; y < m.ny; ++y)
    for (int x = 0; x < m.nx; ++x) CHECK(s.sol.potential(x, y) == doctest::Approx(V * (1.0 - x * 1e-3 * m.cell_size_mm / L)).epsilon(1e-9));
  const double j = m.sigma_electrolyte * V / L;
  for (int y = 0; y < m.ny; ++y)
    for (int x = 1; x + 1 < m.nx; ++x) {
      CHECK(s.J(x, y).x == doctest::Approx(j).epsilon(1e-8));
      CHECK(std::abs(s.J(x, y).y) < 1e-8 * j);
    }
  CHECK(s.sol.report.current_in == doctest::Approx(j * m.ny * m.cell_size_mm * 1e-3).epsilon(1e-8));
}

TEST_CASE("potential matches a dense direct solve") {
  std::mt19937_64 rng(2024);
  for (int k = 0; k < 20; ++k) {
    const MazeSpec m = lt::random_maze(rng, 10);
    const auto dense = lt::dense_potential(m);
    const auto sol = solve_potential(m);
    REQUIRE(sol.report.converged);
    double err = 0.0;
    for (std::size_t i = 0; i < dense.size(); ++i) err = std::max(err, std::abs(dense[i] - sol.potential.values[i]));
    CHECK(err < 1e-8);
  }
}

TEST_CASE("potential is linear in the applied voltage") {
  MazeSpec m = generate_ring_maze({.rings = 3, .diameter_mm = 50.0, .seed = 2});
  const auto a = solve_potential(m);
  m.applied_voltage *= 3.0;
  const auto b = solve_potential(m);
  for (std::size_t i = 0; i < a.potential.values.size(); ++i)
    CHECK(b.potential.values[i] == doctest::Approx(3.0 * a.potential.values[i]).epsilon(1e-9).scale(m.applied_voltage));
  CHECK(b.report.current_in == doctest::Approx(3.0 * a.report.current_in).epsilon(1e-8));
}

TEST_CASE("maximum principle and mirror symmetry") {
  const MazeSpec m = generate_bifurcation_maze({});
  const auto s = solve_potential(m);
  const double V = m.applied_voltage;
  double asym = 0.0;
  for (int y = 0; y < m.ny; ++y)
    for (int x = 0; x < m.nx; ++x) {
      const double p = s.potential(x, y);
      CHECK(p >= -1e-12);
      CHECK(p <= V + 1e-12);
      asym = std::max(asym, std::abs(p - s.potential(m.nx - 1 - x, y)));
    }
  CHECK(asym < 1e-8 * V);
}

TEST_CASE("current is conserved on a ring maze") {
  const MazeSpec m = generate_ring_maze({.seed = 7});
  const Solved s = solve(m);
  const auto c = conservation(s.J, dirichlet_from(m));
  CHECK(c.balanced);
  CHECK(c.divergence_ok);
  CHECK(c.current_in == doctest::Approx(s.sol.report.current_in));
  CHECK(std::abs(c.current_in - c.current_out) <= 1e-4 * c.current_in);
}

TEST_CASE("T-junction: branch currents follow the resistor network") {
  // Arm lengths from the junction centre to the T columns are 40 and 80 cells.
  const int w = 7;
  const lt::TJunction t = lt::t_junction(37, 77, w, 30);
  const Solved s = solve(t.maze);
  const double left = -column_current(s, t.junction_x0 - 20, t.bar_y0, t.bar_y0 + w);
  const double right = column_current(s, t.junction_x0 + w + 40, t.bar_y0, t.bar_y0 + w);
  CHECK(left > 0.0);
  CHECK(right > 0.0);
  CHECK(left + right == doctest::Approx(s.sol.report.current_in).epsilon(1e-6));

  // Network of the same topology: E1 -> junction, junction -> E2 twice.
  const double sig_w = t.maze.sigma_electrolyte * w;
  const auto v = lt::network_potentials(3, {{0, 1, 30.0 / sig_w}, {1, 2, 40.0 / sig_w}, {1, 2, 80.0 / sig_w}}, 1.0);
  const double oracle = (v[1] / (40.0 / sig_w)) / (v[1] / (80.0 / sig_w));
  CHECK(oracle == doctest::Approx(2.0));
  CHECK(left / right == doctest::Approx(oracle).epsilon(0.05));

  // Joule power scales with the square of the current.
  const auto p = joule_heating(s.J, s.sigma);
  auto mean_p = [&](int x0, int x1) {
    double sum = 0.0;
    int n = 0;
    for (int y = t.bar_y0; y < t.bar_y0 + w; ++y)
      for (int x = x0; x < x1; ++x, ++n) sum += p(x, y);
    return sum / n;
  };
  const double ratio = mean_p(10, 30) / mean_p(t.junction_x0 + w + 20, t.junction_x0 + w + 60);
  CHECK(ratio == doctest::Approx(4.0).epsilon(0.1));
}

TEST_CASE("joule power is J^2 / sigma") {
  const Solved s = solve(generate_strip(30, 4));
  const auto p = joule_heating(s.J, s.sigma);
  for (int x = 1; x < 29; ++x) {
    const double j = norm(s.J(x, 2));
    CHECK(p(x, 2) == doctest::Approx(j * j / s.maze.sigma_electrolyte));
  }
}

TEST_CASE("grad |J| vanishes in a uniform field and points into a constriction") {
  const Solved strip = solve(generate_strip(30, 6));
  const auto g = grad_speed_of_J(strip.J);
  const double j = norm(strip.J(15, 3));
  for (int x = 2; x < 28; ++x)
    for (int y = 0; y < 6; ++y) CHECK(norm(g(x, y)) < 1e-6 * j / (strip.maze.cell_size_mm * 1e-3));

  const MazeSpec neck = lt::maze_from_rows({
      "S..........T",
      "S....##....T",
      "S....##....T",
      "S..........T",
  });
  const Solved n = solve(neck);
  const auto gn = grad_speed_of_J(n.J);
  CHECK(gn(3, 0).x > 0.0);
  CHECK(gn(8, 0).x < 0.0);
}

TEST_CASE("floating islands read zero") {
  const MazeSpec m = lt::maze_from_rows({
      "S...T",
      "#####",
      ".....",
  });
  const auto s = solve_potential(m);
  for (int x = 0; x < 5; ++x) {
    CHECK(s.potential(x, 2) == 0.0);
    CHECK(std::isfinite(s.potential(x, 0)));
  }
}

TEST_CASE("face conductivity is the harmonic mean") {
  CHECK(face_sigma(10.0, 10.0) == 10.0);
  CHECK(face_sigma(10.0, 0.0) == 0.0);
  CHECK(face_sigma(1.0, 3.0) == doctest::Approx(1.5));
}

TEST_CASE("coated cells carry current around a wall") {
  // A wall that is coated becomes a conducting bridge.
  const MazeSpec bare = lt::maze_from_rows({"S.#.T"});
  CHECK_THROWS_AS(solve_potential(bare), SolverError);
  const MazeSpec coated = lt::maze_from_rows({"S.+.T"});
  const auto s = solve_potential(coated);
  CHECK(s.report.current_in > 0.0);
  // Four faces in series: two electrolyte faces, two electrolyte/coating faces.
  const double g_e = coated.sigma_electrolyte;
  const double g_c = face_sigma(coated.sigma_electrolyte, coated.sigma_coating);
  const double drop = coated.applied_voltage * (2.0 / g_c) / (2.0 / g_e + 2.0 / g_c);
  CHECK(s.potential(1, 0) - s.potential(3, 0) == doctest::Approx(drop).epsilon(1e-9));
}

TEST_CASE("solver errors and reports") {
  const MazeSpec m = generate_strip(10, 2);
  const auto sigma = conductivity_grid(m);
  CHECK_THROWS_AS(solve_potential(5, 5, 0.5, sigma, dirichlet_from(m)), DimensionError);
  CHECK_THROWS_AS(solve_potential(m, {.tolerance = 0.0}), std::invalid_argument);
  DirichletSet none = dirichlet_from(m);
  none.negative.clear();
  CHECK_THROWS_AS(solve_potential(10, 2, 0.5, sigma, none), SolverError);

  const MazeSpec ring = generate_ring_maze({.seed = 1});
  const auto capped = solve_potential(ring, {.tolerance = 1e-12, .max_iterations = 3});
  CHECK_FALSE(capped.report.converged);
  CHECK(capped.report.iterations == 3);
  CHECK(capped.report.final_residual > 1e-12);
}

TEST_CASE("units and names") {
  CHECK(unit_of(ScalarQuantity::Potential) == "V");
  CHECK(unit_of(VectorQuantity::CurrentDensity) == "A/m^2");
  CHECK_FALSE(name_of(ScalarQuantity::JoulePower).empty());
}
