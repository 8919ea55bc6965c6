#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "lmaze/droplet.hpp"
#include "lmaze/field.hpp"
#include "lmaze/maze.hpp"
#include "lmaze/oracle.hpp"

namespace lmaze {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Shortest text that reads back to the same double.
std::string format_number(double v);

// CSV schemas (comma separated, one header line, '\n' line ends):
//   scalar field   x_mm,y_mm,value           cell centres, row-major from the top row
//   vector field   x_mm,y_mm,vx,vy,magnitude
//   trajectory     t_s,x_mm,y_mm,speed_mm_s,force_mag
//   path           step,x,y,x_mm,y_mm        cell indices and centres
std::string scalar_field_csv(const ScalarField& field);
std::string vector_field_csv(const VectorField& field);
std::string trajectory_csv(const Trajectory& traj);
std::string path_csv(const Path& path);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  std::size_t column(const std::string& name) const;
};

// Strict reader for the numeric CSVs above: every row must have as many
// fields as the header and every field must parse completely.
CsvTable parse_csv(const std::string& text);
CsvTable read_csv(const std::filesystem::path& path);

ScalarField scalar_field_from_csv(const CsvTable& table, double cell_size_mm, ScalarQuantity quantity);
VectorField vector_field_from_csv(const CsvTable& table, double cell_size_mm, VectorQuantity quantity);

// Cell size of a field CSV: twice the smallest cell-centre coordinate.
double csv_cell_size(const CsvTable& table);

// 8-bit grayscale raster, row 0 at the top.
struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;

  std::uint8_t& at(int x, int y) { return pixels[static_cast<std::size_t>(y) * width + x]; }
  std::uint8_t at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
};

// Linear min-max map to 0..255 (a constant field is mid-gray), `scale`
// pixels per cell.
GrayImage render_gray(const ScalarField& field, int scale = 1);

// Magnitude raster in 0..191 with white strokes every `stride` cells, stroke
// length proportional to the local magnitude.
GrayImage render_vectors(const VectorField& field, int scale = 4, int stride = 4);

// Field gray levels on channel cells, walls black, coated walls dark gray.
GrayImage render_on_maze(const ScalarField& field, const MazeSpec& maze, int scale = 1);

// Maze raster (channel white, wall black) with droplet centres as dots.
GrayImage render_trace(const MazeSpec& maze, const Trajectory& traj, int scale = 2, int every = 1);

// Binary PGM (P5, maxval 255).
std::string encode_pgm(const GrayImage& image);
GrayImage decode_pgm(const std::string& bytes);

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& content);

}  // namespace lmaze
