#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace lmaze {

enum class CellKind : std::uint8_t { Channel, Wall, CoatedWall };

enum class Polarity : std::uint8_t { Positive, Negative };

// Grid coordinate: x is the column, y the row (row 0 is the top line of a maze file).
struct Cell {
  int x = 0;
  int y = 0;
  friend bool operator==(const Cell&, const Cell&) = default;
  friend auto operator<=>(const Cell&, const Cell&) = default;
};

struct Electrode {
  std::string id;
  Polarity polarity = Polarity::Positive;
  std::vector<Cell> cells;  // sorted, unique
  friend bool operator==(const Electrode&, const Electrode&) = default;
};

// Error raised by the maze parser and by MazeSpec validation. Parse errors
// carry a 1-based line/column; zero means "not tied to a text position".
class MazeError : public std::runtime_error {
 public:
  MazeError(const std::string& what, int line = 0, int column = 0);
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

// Default physical parameters. 0.5 mol/L NaOH at room temperature is close to
// 10 S/m in standard conductivity tables; gold is ~4.1e7 S/m but the coating is
// a thin film, so a sheet-equivalent 1e4 S/m keeps the linear system well
// conditioned while still being three decades above the electrolyte.
inline constexpr double kDefaultCellSizeMm = 0.5;
inline constexpr double kSigmaNaOH05M = 10.0;
inline constexpr double kDefaultSigmaWall = 0.0;
inline constexpr double kDefaultSigmaCoating = 1.0e4;
inline constexpr double kDefaultVoltage = 5.0;

struct MazeSpec {
  int nx = 0;
  int ny = 0;
  double cell_size_mm = kDefaultCellSizeMm;
  std::vector<CellKind> cells;  // row-major, index y * nx + x
  std::vector<Electrode> electrodes;
  double sigma_electrolyte = kSigmaNaOH05M;
  double sigma_wall = kDefaultSigmaWall;
  double sigma_coating = kDefaultSigmaCoating;
  double applied_voltage = kDefaultVoltage;

  std::size_t index(int x, int y) const { return static_cast<std::size_t>(y) * nx + x; }
  std::size_t index(Cell c) const { return index(c.x, c.y); }
  bool inside(int x, int y) const { return x >= 0 && y >= 0 && x < nx && y < ny; }
  CellKind at(int x, int y) const { return cells[index(x, y)]; }
  CellKind at(Cell c) const { return cells[index(c)]; }
  bool is_channel(int x, int y) const { return inside(x, y) && at(x, y) == CellKind::Channel; }

  // Cells of every electrode with the given polarity, sorted.
  std::vector<Cell> electrode_cells(Polarity p) const;

  friend bool operator==(const MazeSpec&, const MazeSpec&) = default;
};

// Throws MazeError if any MazeSpec invariant is violated.
void validate(const MazeSpec& spec);

MazeSpec parse_maze(std::string_view text);
MazeSpec load_maze(const std::string& path);

// Canonical text form; parse_maze(emit_maze(s)) == s for every valid s.
std::string emit_maze(const MazeSpec& spec);

struct ConnectivityReport {
  std::vector<int> component;  // per cell; -1 for non-channel cells
  int component_count = 0;
  bool solvable = false;
};

ConnectivityReport validate_and_components(const MazeSpec& spec);

std::vector<double> conductivity_grid(const MazeSpec& spec);

// Concentric square rings around a central chamber. Each ring wall has
// gaps_per_ring[k] openings (k = 0 is the wall around the chamber) and each
// ring corridor carries one radial barrier, so the corridor route between
// consecutive openings is forced. E1 sits in the chamber, E2 in the outer ring.
struct RingMazeParams {
  int rings = 4;
  std::vector<int> gaps_per_ring;  // empty means one gap per wall
  double diameter_mm = 70.0;
  double channel_width_mm = 4.0;
  double wall_mm = 2.0;
  double cell_size_mm = kDefaultCellSizeMm;
  std::uint64_t seed = 1;
};

MazeSpec generate_ring_maze(const RingMazeParams& params);

// Inlet corridor from E1 splitting at node a into two rectangular branches
// (centerline lengths len_a on the left, len_b on the right) that rejoin at
// node d and lead to E2. Equal lengths give an exactly mirror-symmetric grid.
struct BifurcationParams {
  double len_a_mm = 40.0;
  double len_b_mm = 40.0;
  double channel_width_mm = 4.0;
  double cell_size_mm = kDefaultCellSizeMm;
};

MazeSpec generate_bifurcation_maze(const BifurcationParams& params);

// Straight corridor with S on the left end and T on the right end.
MazeSpec generate_strip(int length_cells, int width_cells, double cell_size_mm = kDefaultCellSizeMm);

// Convex wall corners: wall cells (Wall or CoatedWall) with channel cells on two
// perpendicular sides whose shared diagonal neighbour is also channel.
std::vector<Cell> convex_wall_corners(const MazeSpec& spec);

// Copy of spec with every convex wall corner cell turned into CoatedWall.
MazeSpec coat_corners(const MazeSpec& spec);

}  // namespace lmaze
