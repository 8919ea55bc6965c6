#pragma once

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "lmaze/droplet.hpp"
#include "lmaze/field.hpp"
#include "lmaze/maze.hpp"

namespace lmaze {

class OracleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UnreachableError : public OracleError {
 public:
  using OracleError::OracleError;
};

// Wavefront distances (in cells) to the destination set; -1 marks unlabelled cells.
struct LeeLabels {
  int nx = 0;
  int ny = 0;
  std::vector<int> labels;
  std::vector<Cell> destination;

  std::optional<int> at(Cell c) const {
    if (c.x < 0 || c.y < 0 || c.x >= nx || c.y >= ny) return std::nullopt;
    const int v = labels[static_cast<std::size_t>(c.y) * nx + c.x];
    return v >= 0 ? std::optional<int>(v) : std::nullopt;
  }
};

struct Path {
  std::vector<Cell> cells;
  double cell_size_mm = 0.0;
  int length_cells() const { return cells.empty() ? 0 : static_cast<int>(cells.size()) - 1; }
  double length_mm() const { return length_cells() * cell_size_mm; }
};

LeeLabels lee_label(const MazeSpec& maze, std::span<const Cell> destination);

// Lee labels towards the Negative electrode.
LeeLabels lee_label_to_target(const MazeSpec& maze);

// Descends the labels from `source`; ties go E, N, W, S (N is towards row 0).
Path extract_path(const LeeLabels& labels, Cell source, double cell_size_mm);

// Shortest path from the best Positive electrode cell to the Negative electrode.
Path shortest_electrode_path(const MazeSpec& maze);

enum class StreamlineEnd : std::uint8_t { ReachedTarget, FieldVanished, MaxSteps };

std::string to_string(StreamlineEnd e);

struct Streamline {
  std::vector<Vec2> points;  // mm
  StreamlineEnd end = StreamlineEnd::MaxSteps;
};

// Bilinear interpolation of a cell-centred field at a point in mm.
Vec2 sample_bilinear(const VectorField& field, Vec2 p);

// Midpoint integration along the normalised field. A step that would enter a
// wall keeps only its unblocked axis; when no axis is free (or |J| drops
// below 1e-9 of the field maximum) the line ends with FieldVanished.
Streamline streamline(const VectorField& current, const MazeSpec& maze, Vec2 start, double step_mm, int max_steps);

// Corridor segmentation: every channel cell is classified by the lengths of
// its horizontal and vertical channel runs. Cells whose short run is at most
// `width_limit` belong to a straight corridor along the long run; cells where
// both runs exceed it form junction/corner zones. Segments are the
// 4-connected components of equally classified cells.
struct CorridorMap {
  enum class Kind : std::uint8_t { None, Horizontal, Vertical, Junction };
  int nx = 0;
  int ny = 0;
  int width_limit = 0;
  int corridor_width = 0;  // most common corridor width in cells
  std::vector<int> segment;  // -1 off-channel
  std::vector<Kind> kind;    // per cell
  int segment_count = 0;

  int at(Cell c) const { return segment[static_cast<std::size_t>(c.y) * nx + c.x]; }
};

// width_limit 0 derives it from the most common corridor width.
CorridorMap segment_corridors(const MazeSpec& maze, int width_limit = 0);

// Segment ids along a cell route with consecutive repeats merged and loops erased.
std::vector<int> corridor_sequence(const CorridorMap& map, std::span<const Cell> route);

// Cells visited by a polyline in mm, sampled at quarter-cell spacing.
std::vector<Cell> cells_along(std::span<const Vec2> polyline, double cell_size_mm, int nx, int ny);

// Fraction of route cells that fall in segments of the reference sequence.
double corridor_overlap(const CorridorMap& map, std::span<const Cell> route, std::span<const int> reference);

// Coolest-cost route between the electrodes with cell cost sqrt(p_max / p):
// the hot ridge of a Joule-power map.
Path hot_ridge(const MazeSpec& maze, const ScalarField& joule);

struct ComparisonMetrics {
  double max_lateral_deviation_mm = 0.0;
  double length_ratio = 0.0;
  bool corridor_sequence_equal = false;
  std::vector<int> trajectory_sequence;
  std::vector<int> path_sequence;
  double corridor_overlap = 0.0;  // share of trajectory cells in the path's corridors
};

// Same metrics for any polyline (streamlines, ridges); length from the polyline itself.
ComparisonMetrics compare_polyline(std::span<const Vec2> points, const Path& path, const MazeSpec& maze,
                                   const CorridorMap& corridors);

ComparisonMetrics compare_trajectory(const Trajectory& traj, const Path& path, const MazeSpec& maze,
                                     const CorridorMap& corridors);

ComparisonMetrics compare_trajectory(const Trajectory& traj, const Path& path, const MazeSpec& maze);

// Distance from a point to the polyline through the path's cell centres.
double distance_to_path(const Path& path, Vec2 p);

}  // namespace lmaze
