#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "lmaze/field.hpp"
#include "lmaze/maze.hpp"

namespace lmaze {

// Positions are in mm with the origin at the top-left grid corner; cell (x, y)
// covers [x h, (x+1) h] x [y h, (y+1) h].
struct DropletState {
  Vec2 position;
  double radius_mm = 1.0;
  Vec2 velocity;  // mm/s, realised displacement / dt of the last step
  // Heading, |u| <= 1. Only the part of the force along the heading drives
  // the droplet; it starts at zero, so motion needs a build-up period.
  Vec2 heading;
  double t = 0.0;
  int step = 0;
};

enum class ForceSource : std::uint8_t { DiskMeanJ, DiskMeanGradSpeedJ };

std::string to_string(ForceSource s);
ForceSource force_source_from(const std::string& s);

struct DynamicsParams {
  double mobility = 1.0e-3;        // (mm/s) per force unit
  double static_threshold = 0.0;   // force units; a weaker admissible drive leaves the droplet at rest
  // When > 0, simulate() replaces static_threshold by this fraction of the
  // peak disk force over the channel.
  double threshold_fraction = 0.0;
  double dt = 0.0;                 // s; 0 selects the step that caps motion at half a cell
  int max_steps = 200000;
  int lock_window = 2000;          // steps
  double lock_epsilon_mm = 0.05;   // net displacement over the window below this means Locked
  ForceSource force_source = ForceSource::DiskMeanJ;
  double force_gain = 1.0;
  double radius_mm = 1.0;
  // Distance (at the current drive) over which the heading turns towards a new
  // force direction. 0 means the heading follows the force instantly.
  double turn_length_mm = 0.0;
  double noise_amplitude = 0.0;    // force units, zero-mean Gaussian per step; 0 disables
  std::uint64_t noise_seed = 0;
};

void validate(const DynamicsParams& p);

enum class Termination : std::uint8_t { ReachedTarget, Locked, MaxSteps };

std::string to_string(Termination t);

struct TrajectorySample {
  double t = 0.0;
  Vec2 position;
  double speed = 0.0;
  double force_magnitude = 0.0;
};

struct Trajectory {
  std::vector<TrajectorySample> samples;
  Termination termination = Termination::MaxSteps;
  double path_length_mm = 0.0;
  double dt = 0.0;
  double radius_mm = 0.0;
  double static_threshold = 0.0;  // as applied
};

class DynamicsError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Area of the intersection of a disk with an axis-aligned rectangle.
double disk_rect_overlap(Vec2 center, double radius, double x0, double y0, double x1, double y1);

// Sum over grid cells of field * (area of the cell inside the disk) [mm^2],
// times gain. Only cells flagged in `mask` contribute (walls give nothing).
// Throws DynamicsError if the disk does not touch the grid.
Vec2 disk_integrate(const VectorField& field, Vec2 center, double radius_mm, double gain,
                    std::span<const std::uint8_t> mask);

// Convenience: contributions restricted to Channel cells of the maze.
Vec2 disk_integrate(const VectorField& field, Vec2 center, double radius_mm, double gain, const MazeSpec& maze);

std::vector<std::uint8_t> channel_mask(const MazeSpec& maze);

// Field the droplet follows for the chosen force source.
VectorField driving_field(const VectorField& current, ForceSource source);

// Largest distance by which the disk enters a wall cell or leaves the grid (0 if clear).
double wall_penetration(const MazeSpec& maze, Vec2 center, double radius_mm);

// Whether the disk overlaps any cell of the given polarity.
bool touches_electrode(const MazeSpec& maze, Vec2 center, double radius_mm, Polarity p);

// One overdamped stick-slip update. `noise` is only drawn from when
// params.noise_amplitude > 0.
DropletState step(const DropletState& state, const DynamicsParams& params, const MazeSpec& maze,
                  const VectorField& field, std::mt19937_64* noise = nullptr);

// Resting position next to the Positive electrode where the disk fits.
Vec2 start_position(const MazeSpec& maze, const DynamicsParams& params, const VectorField& field);

// Largest disk force over disks centred on channel cells (noise excluded).
double peak_disk_force(const MazeSpec& maze, const DynamicsParams& params, const VectorField& field);

// Time step that keeps motion at or below half a cell per step.
double auto_time_step(const MazeSpec& maze, const DynamicsParams& params, const VectorField& field);

Trajectory simulate(const MazeSpec& maze, const DynamicsParams& params, const VectorField& field);

struct DwellSegment {
  std::size_t first = 0;  // sample indices, inclusive
  std::size_t last = 0;
  double t_start = 0.0;
  double t_end = 0.0;
  Vec2 position;  // droplet centre at the start of the dwell
};

struct VelocityProfile {
  std::vector<std::pair<double, double>> speed;  // (t s, speed mm/s)
  double peak_speed = 0.0;
  std::vector<DwellSegment> dwells;  // maximal runs with speed < 1% of peak
};

VelocityProfile velocity_profile(const Trajectory& traj);

}  // namespace lmaze
