#include <algorithm>
#include <random>

#include "doctest.h"
#include "lmaze/field.hpp"
#include "lmaze/oracle.hpp"
#include "support.hpp"

using namespace lmaze;
namespace lt = lmaze::testing;

namespace {

VectorField current_of(const MazeSpec& m) {
  return current_density(solve_potential(m).potential, conductivity_grid(m));
}

Vec2 centre(Cell c, double h) { return {(c.x + 0.5) * h, (c.y + 0.5) * h}; }

}  // namespace

TEST_CASE("corridor labels count down to the destination") {
  const MazeSpec m = lt::maze_from_rows({"S...T"});
  const std::vector<Cell> dest{{4, 0}};
  const LeeLabels lab = lee_label(m, dest);
  for (int x = 0; x < 5; ++x) CHECK(lab.at({x, 0}) == 4 - x);
  CHECK_FALSE(lab.at({5, 0}).has_value());

  const Path p = extract_path(lab, {0, 0}, m.cell_size_mm);
  CHECK(p.cells.size() == 5);
  CHECK(p.length_cells() == 4);
  CHECK(p.length_mm() == doctest::Approx(4 * m.cell_size_mm));
}

TEST_CASE("sealed cells stay unlabelled and unreachable") {
  const MazeSpec m = lt::maze_from_rows({"S.#..", "..#.T"});
  const LeeLabels lab = lee_label_to_target(m);
  CHECK_FALSE(lab.at({0, 0}).has_value());
  CHECK(lab.at({3, 0}) == 2);
  CHECK_THROWS_AS(extract_path(lab, {0, 0}, 0.5), UnreachableError);
  CHECK_THROWS_AS(shortest_electrode_path(m), UnreachableError);
}

TEST_CASE("destination errors") {
  const MazeSpec m = lt::maze_from_rows({"S.#.T"});
  CHECK_THROWS_AS(lee_label(m, std::vector<Cell>{}), OracleError);
  CHECK_THROWS_AS(lee_label(m, std::vector<Cell>{{2, 0}}), OracleError);
}

TEST_CASE("7x7 maze with a loop agrees with brute-force BFS") {
  const MazeSpec m = lt::maze_from_rows({
      "S......",
      ".#####.",
      ".#...#.",
      ".#.#.#.",
      ".#...#.",
      ".##.##.",
      "......T",
  });
  const auto dest = m.electrode_cells(Polarity::Negative);
  const LeeLabels lab = lee_label(m, dest);
  const auto ref = lt::bfs_distance(m, dest);
  CHECK(lab.labels == ref);
  CHECK(lab.at({0, 0}) == 12);
}

TEST_CASE("random mazes agree with brute-force BFS") {
  std::mt19937_64 rng(99);
  for (int k = 0; k < 60; ++k) {
    const MazeSpec m = lt::random_maze(rng, 15);
    const auto dest = m.electrode_cells(Polarity::Negative);
    const LeeLabels lab = lee_label(m, dest);
    REQUIRE(lab.labels == lt::bfs_distance(m, dest));
    // Every extracted path is a strictly descending 4-connected walk.
    for (const Cell s : m.electrode_cells(Polarity::Positive)) {
      const auto l = lab.at(s);
      if (!l) continue;
      const Path p = extract_path(lab, s, m.cell_size_mm);
      CHECK(p.length_cells() == *l);
      for (std::size_t i = 1; i < p.cells.size(); ++i) {
        CHECK(std::abs(p.cells[i].x - p.cells[i - 1].x) + std::abs(p.cells[i].y - p.cells[i - 1].y) == 1);
        CHECK(*lab.at(p.cells[i]) == *lab.at(p.cells[i - 1]) - 1);
      }
    }
  }
}

TEST_CASE("ties go east, north, west, south") {
  const MazeSpec m = lt::maze_from_rows({"..T", "...", "S.."});
  const LeeLabels lab = lee_label_to_target(m);
  const Path p = extract_path(lab, {0, 2}, m.cell_size_mm);
  const std::vector<Cell> expect{{0, 2}, {1, 2}, {2, 2}, {2, 1}, {2, 0}};
  CHECK(p.cells == expect);

  const Path q = extract_path(lab, {1, 1}, m.cell_size_mm);
  const std::vector<Cell> expect_q{{1, 1}, {2, 1}, {2, 0}};
  CHECK(q.cells == expect_q);
}

TEST_CASE("38/42 bifurcation: the path takes the shorter branch") {
  const MazeSpec m = generate_bifurcation_maze({.len_a_mm = 38.0, .len_b_mm = 42.0});
  const Path p = shortest_electrode_path(m);
  const auto ref = lt::bfs_distance(m, m.electrode_cells(Polarity::Negative));
  CHECK(p.length_cells() == ref[m.index(p.cells.front())]);
  // Branch a is on the left half of the grid.
  CHECK(std::any_of(p.cells.begin(), p.cells.end(), [&](Cell c) { return c.x < m.nx / 4; }));
  CHECK(std::none_of(p.cells.begin(), p.cells.end(), [&](Cell c) { return c.x > 3 * m.nx / 4; }));

  const MazeSpec far = generate_bifurcation_maze({.len_a_mm = 20.0, .len_b_mm = 60.0});
  const Path pf = shortest_electrode_path(far);
  CHECK(std::none_of(pf.cells.begin(), pf.cells.end(), [&](Cell c) { return c.x > 3 * far.nx / 4; }));
}

TEST_CASE("streamline in a uniform strip is straight") {
  const MazeSpec m = generate_strip(60, 6);
  const VectorField J = current_of(m);
  const Vec2 start{1.2, 1.3};
  const Streamline s = streamline(J, m, start, 0.25, 1000);
  CHECK(s.end == StreamlineEnd::ReachedTarget);
  for (const Vec2 p : s.points) CHECK(std::abs(p.y - start.y) < 1e-6);  // solver residual only
  CHECK(s.points.back().x > (m.nx - 1) * m.cell_size_mm);
  CHECK_THROWS_AS(streamline(J, m, start, 0.0, 10), std::invalid_argument);
}

TEST_CASE("streamline from a wall or a stagnation point") {
  const MazeSpec m = generate_bifurcation_maze({});
  const VectorField J = current_of(m);
  const double h = m.cell_size_mm;
  const double axis = 0.5 * m.nx * h;
  // Walk along the axis from E1 until the divider between the branches.
  const auto pos = m.electrode_cells(Polarity::Positive);
  double y = centre(pos.front(), h).y;
  const double dir = y > 0.5 * m.ny * h ? -1.0 : 1.0;
  auto open = [&](double yy) {
    return m.is_channel(static_cast<int>(axis / h), static_cast<int>(yy / h)) &&
           m.is_channel(static_cast<int>(axis / h) - 1, static_cast<int>(yy / h));
  };
  while (open(y + dir * h)) y += dir * h;
  CHECK_THROWS_AS(streamline(J, m, {axis, y + dir * h}, 0.25, 100), OracleError);
  const Streamline s = streamline(J, m, {axis, y}, 0.25, 100);
  CHECK(s.end == StreamlineEnd::FieldVanished);
  CHECK(s.points.size() <= 3);
}

TEST_CASE("corridor segmentation") {
  const MazeSpec bar = lt::maze_from_rows({"##########", "S........T", "S........T", "##########"});
  const CorridorMap cm = segment_corridors(bar);
  CHECK(cm.segment_count == 1);
  CHECK(cm.corridor_width == 2);
  CHECK(cm.kind[bar.index(4, 1)] == CorridorMap::Kind::Horizontal);
  CHECK(cm.at({0, 0}) == -1);

  const MazeSpec ell = lt::maze_from_rows({
      "#########",
      "S.......#",
      "S.......#",
      "######..#",
      "######..#",
      "######..#",
      "######TT#",
  });
  const CorridorMap cl = segment_corridors(ell);
  CHECK(cl.segment_count == 3);
  CHECK(cl.kind[ell.index(2, 1)] == CorridorMap::Kind::Horizontal);
  CHECK(cl.kind[ell.index(6, 5)] == CorridorMap::Kind::Vertical);
  CHECK(cl.kind[ell.index(7, 1)] == CorridorMap::Kind::Junction);

  // Repeats merge and a detour into a side segment and back is erased.
  const std::vector<Cell> route{{1, 1}, {2, 1}, {6, 1}, {6, 3}, {6, 1}, {6, 4}, {6, 6}};
  const auto seq = corridor_sequence(cl, route);
  CHECK(seq.size() == 3);
  CHECK(seq.front() == cl.at({1, 1}));
  CHECK(seq.back() == cl.at({6, 6}));
}

TEST_CASE("a trajectory on the path compares perfectly") {
  const MazeSpec m = generate_ring_maze({.seed = 2});
  const Path p = shortest_electrode_path(m);
  Trajectory t;
  for (const Cell c : p.cells) t.samples.push_back({.position = centre(c, m.cell_size_mm)});
  t.path_length_mm = p.length_mm();
  const auto cmp = compare_trajectory(t, p, m);
  CHECK(cmp.max_lateral_deviation_mm == doctest::Approx(0.0));
  CHECK(cmp.length_ratio == doctest::Approx(1.0));
  CHECK(cmp.corridor_sequence_equal);
  CHECK(cmp.corridor_overlap == doctest::Approx(1.0));
  CHECK(distance_to_path(p, centre(p.cells[3], m.cell_size_mm) + Vec2{0.0, 0.2}) <= 0.2 + 1e-12);
}

TEST_CASE("ring maze: streamline and Joule ridge follow the Lee corridors") {
  for (std::uint64_t seed : {1u, 7u}) {
    const MazeSpec m = generate_ring_maze({.seed = seed});
    const auto sigma = conductivity_grid(m);
    const VectorField J = current_density(solve_potential(m).potential, sigma);
    const Path lee = shortest_electrode_path(m);
    const CorridorMap cm = segment_corridors(m);

    const Vec2 start = start_position(m, DynamicsParams{}, J);
    const Streamline s = streamline(J, m, start, 0.25 * m.cell_size_mm, 200 * (m.nx + m.ny));
    CHECK(s.end == StreamlineEnd::ReachedTarget);
    const auto cs = compare_polyline(s.points, lee, m, cm);
    CHECK(cs.corridor_sequence_equal);
    CHECK(cs.corridor_overlap >= 0.9);

    const Path ridge = hot_ridge(m, joule_heating(J, sigma));
    std::vector<Vec2> pts;
    for (const Cell c : ridge.cells) pts.push_back(centre(c, m.cell_size_mm));
    const auto cr = compare_polyline(pts, lee, m, cm);
    CHECK(cr.corridor_sequence_equal);
    CHECK(cr.corridor_overlap >= 0.9);
  }
}

TEST_CASE("bilinear sampling reproduces a linear field") {
  VectorField f(4, 4, 1.0, VectorQuantity::CurrentDensity);
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 4; ++x) {
      f.values[f.index(x, y)] = {static_cast<double>(x), 2.0 * y};
      f.active[f.index(x, y)] = 1;
    }
  const Vec2 v = sample_bilinear(f, {1.75, 2.25});
  CHECK(v.x == doctest::Approx(1.25));
  CHECK(v.y == doctest::Approx(3.5));
}
