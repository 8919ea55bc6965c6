#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

#include "doctest.h"
#include "lmaze/io.hpp"
#include "support.hpp"

using namespace lmaze;
namespace lt = lmaze::testing;

namespace {

struct Fields {
  MazeSpec maze;
  std::vector<double> sigma;
  ScalarField phi;
  VectorField J;
};

Fields fields_of(const MazeSpec& m) {
  Fields f{m, conductivity_grid(m), solve_potential(m).potential, {}};
  f.J = current_density(f.phi, f.sigma);
  return f;
}

std::size_t count_lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

}  // namespace

TEST_CASE("numbers print short and read back exactly") {
  CHECK(format_number(0.1) == "0.1");
  CHECK(format_number(10.0) == "10");
  CHECK(format_number(-0.0) == "0");
  CHECK(format_number(2.5e-7) == "2.5e-07");
  for (double v : {1.0 / 3.0, 6.02214076e23, -1e-300, 123456.789}) CHECK(std::stod(format_number(v)) == v);
}

TEST_CASE("field CSVs follow the schema and round-trip") {
  const Fields f = fields_of(generate_ring_maze({.rings = 2, .diameter_mm = 40.0, .seed = 5}));
  const std::string sc = scalar_field_csv(f.phi);
  CHECK(sc.rfind("x_mm,y_mm,value\n", 0) == 0);
  CHECK(count_lines(sc) == f.phi.values.size() + 1);
  const CsvTable st = parse_csv(sc);
  CHECK(st.header.size() == 3);
  CHECK(csv_cell_size(st) == f.maze.cell_size_mm);
  const ScalarField back = scalar_field_from_csv(st, csv_cell_size(st), ScalarQuantity::Potential);
  CHECK(back.nx == f.phi.nx);
  CHECK(back.ny == f.phi.ny);
  CHECK(back.values == f.phi.values);

  const std::string vc = vector_field_csv(f.J);
  CHECK(vc.rfind("x_mm,y_mm,vx,vy,magnitude\n", 0) == 0);
  const CsvTable vt = parse_csv(vc);
  const VectorField vb = vector_field_from_csv(vt, csv_cell_size(vt), VectorQuantity::CurrentDensity);
  REQUIRE(vb.values.size() == f.J.values.size());
  for (std::size_t i = 0; i < vb.values.size(); ++i) CHECK(vb.values[i] == f.J.values[i]);
  const std::size_t mag = vt.column("magnitude");
  for (const auto& row : vt.rows) CHECK(row[mag] == doctest::Approx(std::hypot(row[2], row[3])));
}

TEST_CASE("trajectory and path CSVs") {
  Trajectory t;
  t.samples = {{0.0, {1.0, 2.0}, 0.0, 5.0}, {0.5, {1.5, 2.0}, 1.0, 5.0}};
  const CsvTable tt = parse_csv(trajectory_csv(t));
  CHECK(tt.header == std::vector<std::string>{"t_s", "x_mm", "y_mm", "speed_mm_s", "force_mag"});
  CHECK(tt.rows.size() == 2);
  CHECK(tt.rows[1][tt.column("x_mm")] == 1.5);

  const Path p{{{0, 0}, {1, 0}, {1, 1}}, 0.5};
  const CsvTable pt = parse_csv(path_csv(p));
  CHECK(pt.header == std::vector<std::string>{"step", "x", "y", "x_mm", "y_mm"});
  CHECK(pt.rows[2][pt.column("y_mm")] == 0.75);
}

TEST_CASE("the CSV reader is strict") {
  CHECK_THROWS_AS(parse_csv(""), IoError);
  CHECK_THROWS_AS(parse_csv("a,b\n1\n"), IoError);
  CHECK_THROWS_AS(parse_csv("a,b\n1,x\n"), IoError);
  CHECK_THROWS_AS(parse_csv("a,b\n1,2\n\n3,4\n"), IoError);
  CHECK_THROWS_AS(parse_csv("a,b\n1,2\n").column("c"), IoError);
  // Missing cell.
  CHECK_THROWS_AS(scalar_field_from_csv(parse_csv("x_mm,y_mm,value\n0.25,0.25,1\n0.75,0.75,1\n"), 0.5,
                                        ScalarQuantity::Potential),
                  IoError);
  CHECK_THROWS_AS(read_csv("/nonexistent/field.csv"), IoError);
}

TEST_CASE("constant field renders mid-gray") {
  ScalarField f(7, 5, 0.5, ScalarQuantity::Potential);
  std::fill(f.values.begin(), f.values.end(), 3.0);
  const GrayImage img = render_gray(f, 3);
  CHECK(img.width == 21);
  CHECK(img.height == 15);
  for (auto p : img.pixels) CHECK(p == 128);
}

TEST_CASE("gray scale spans the full range") {
  ScalarField f(3, 1, 0.5, ScalarQuantity::Potential);
  f.values = {-1.0, 0.0, 1.0};
  const GrayImage img = render_gray(f);
  CHECK(img.pixels.front() == 0);
  CHECK(img.pixels.back() == 255);
}

TEST_CASE("PGM encode/decode and errors") {
  GrayImage img{3, 2, {0, 10, 20, 30, 40, 255}};
  const std::string bytes = encode_pgm(img);
  CHECK(bytes.rfind("P5\n3 2\n255\n", 0) == 0);
  const GrayImage back = decode_pgm(bytes);
  CHECK(back.width == 3);
  CHECK(back.pixels == img.pixels);
  CHECK_THROWS_AS(decode_pgm("P2\n1 1\n255\n0"), IoError);
  CHECK_THROWS_AS(decode_pgm("P5\n2 2\n255\nab"), IoError);
  CHECK_THROWS_AS(encode_pgm(GrayImage{}), IoError);
  CHECK_THROWS_AS(render_gray(ScalarField{}), IoError);
  ScalarField bad(2, 1, 0.5, ScalarQuantity::Potential);
  bad.values[1] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(render_gray(bad), IoError);
}

TEST_CASE("uniform strip current renders as parallel equal strokes") {
  const Fields f = fields_of(generate_strip(40, 16));
  const int scale = 4;
  const int stride = 8;
  const GrayImage img = render_vectors(f.J, scale, stride);
  // Runs of stroke pixels per image row.
  std::vector<int> lengths;
  std::set<int> rows;
  for (int y = 0; y < img.height; ++y) {
    int run = 0;
    for (int x = 0; x <= img.width; ++x) {
      if (x < img.width && img.at(x, y) == 255) {
        ++run;
      } else if (run > 0) {
        lengths.push_back(run);
        rows.insert(y);
        run = 0;
      }
    }
  }
  CHECK(rows.size() == 2);  // one row of horizontal strokes per band of `stride` cells
  CHECK(lengths.size() == 10);
  REQUIRE_FALSE(lengths.empty());
  CHECK(lengths.front() > stride * scale / 2);
  for (int n : lengths) CHECK(n == lengths.front());
}

TEST_CASE("rendering is deterministic") {
  const Fields f = fields_of(generate_ring_maze({.rings = 2, .diameter_mm = 40.0, .seed = 5}));
  const auto p = joule_heating(f.J, f.sigma);
  CHECK(encode_pgm(render_on_maze(p, f.maze, 2)) == encode_pgm(render_on_maze(p, f.maze, 2)));
  CHECK(encode_pgm(render_vectors(f.J)) == encode_pgm(render_vectors(f.J)));
  Trajectory t;
  t.samples = {{0.0, {5.0, 5.0}, 0.0, 0.0}};
  const GrayImage tr = render_trace(f.maze, t, 2, 1);
  CHECK(tr.at(20, 20) == 128);
}

TEST_CASE("ring maze Joule map: bright pixels lie on the Lee path corridors") {
  const Fields f = fields_of(generate_ring_maze({.seed = 7}));
  const auto p = joule_heating(f.J, f.sigma);
  const GrayImage img = render_on_maze(p, f.maze, 1);
  const Path lee = shortest_electrode_path(f.maze);
  const CorridorMap cm = segment_corridors(f.maze);
  const auto seq = corridor_sequence(cm, lee.cells);
  const std::set<int> on_path(seq.begin(), seq.end());

  // Oracle raster: channel cells of the corridors the Lee path runs through.
  std::size_t bright = 0;
  std::size_t bright_on = 0;
  std::size_t path_cells = 0;
  std::size_t path_lit = 0;
  for (int y = 0; y < f.maze.ny; ++y)
    for (int x = 0; x < f.maze.nx; ++x) {
      if (!f.maze.is_channel(x, y)) continue;
      const bool in_path = on_path.count(cm.at({x, y})) > 0;
      const bool lit = img.at(x, y) >= 64;
      bright += lit;
      bright_on += lit && in_path;
      path_cells += in_path;
      path_lit += lit && in_path;
    }
  REQUIRE(bright > 0);
  CHECK(static_cast<double>(bright_on) / bright >= 0.9);
  // And the Lee cells themselves are lit.
  std::size_t lee_lit = 0;
  for (const Cell c : lee.cells) lee_lit += img.at(c.x, c.y) >= 64;
  CHECK(static_cast<double>(lee_lit) / lee.cells.size() >= 0.9);
}

TEST_CASE("text files") {
  const auto dir = std::filesystem::temp_directory_path() / "lmaze_io_test";
  std::filesystem::create_directories(dir);
  write_text(dir / "a.txt", "hello\n");
  CHECK(read_text(dir / "a.txt") == "hello\n");
  CHECK_THROWS_AS(read_text(dir / "missing.txt"), IoError);
  CHECK_THROWS_AS(write_text(dir / "no" / "such" / "dir.txt", "x"), IoError);
  std::filesystem::remove_all(dir);
}
