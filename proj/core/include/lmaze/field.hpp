#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "lmaze/maze.hpp"

namespace lmaze {

enum class ScalarQuantity : std::uint8_t { Potential, JoulePower, SpeedOfJ, Divergence };
enum class VectorQuantity : std::uint8_t { CurrentDensity, GradSpeedOfJ };

// Units: Potential [V], JoulePower [W/m^3], SpeedOfJ [A/m^2], Divergence [A/m^3].
std::string unit_of(ScalarQuantity q);
std::string unit_of(VectorQuantity q);
std::string name_of(ScalarQuantity q);
std::string name_of(VectorQuantity q);

struct ScalarField {
  int nx = 0;
  int ny = 0;
  double cell_size_mm = 0.0;
  ScalarQuantity quantity = ScalarQuantity::Potential;
  std::vector<double> values;  // row-major, y * nx + x

  ScalarField() = default;
  ScalarField(int nx_, int ny_, double h, ScalarQuantity q)
      : nx(nx_), ny(ny_), cell_size_mm(h), quantity(q), values(static_cast<std::size_t>(nx_) * ny_, 0.0) {}
  double& operator()(int x, int y) { return values[static_cast<std::size_t>(y) * nx + x]; }
  double operator()(int x, int y) const { return values[static_cast<std::size_t>(y) * nx + x]; }
};

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Vec2&, const Vec2&) = default;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
double norm(Vec2 a);

// Cell-centred vector field. `active` marks cells with sigma > 0; inactive
// cells hold zero vectors. Current-density fields additionally carry the
// finite-volume face values the divergence is computed from: face_east[c] is
// the x-component on the face between c and its +x neighbour, face_south[c] the
// y-component on the face between c and its +y neighbour (row below).
struct VectorField {
  int nx = 0;
  int ny = 0;
  double cell_size_mm = 0.0;
  VectorQuantity quantity = VectorQuantity::CurrentDensity;
  std::vector<Vec2> values;
  std::vector<std::uint8_t> active;
  std::vector<double> face_east;
  std::vector<double> face_south;

  VectorField() = default;
  VectorField(int nx_, int ny_, double h, VectorQuantity q)
      : nx(nx_), ny(ny_), cell_size_mm(h), quantity(q),
        values(static_cast<std::size_t>(nx_) * ny_), active(values.size(), 0) {}
  std::size_t index(int x, int y) const { return static_cast<std::size_t>(y) * nx + x; }
  const Vec2& operator()(int x, int y) const { return values[index(x, y)]; }
  bool has_faces() const { return face_east.size() == values.size(); }
};

struct SolveReport {
  int iterations = 0;
  double final_residual = 0.0;  // relative L2 of the preconditioned system residual
  double current_in = 0.0;      // A per metre of depth, into the electrolyte at Positive cells
  double current_out = 0.0;     // A per metre of depth, out of the electrolyte at Negative cells
  bool converged = false;
  double tolerance = 0.0;
};

struct DirichletSet {
  std::vector<Cell> positive;  // pinned at `voltage`
  std::vector<Cell> negative;  // pinned at 0
  double voltage = 0.0;
};

DirichletSet dirichlet_from(const MazeSpec& spec);

struct SolverSettings {
  double tolerance = 1e-9;
  int max_iterations = 0;  // 0 means 50 * max(nx, ny)
};

class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct PotentialSolution {
  ScalarField potential;
  SolveReport report;
};

// Finite-volume solve of div(sigma grad phi) = 0 with harmonic-mean face
// conductivities and Jacobi-preconditioned conjugate gradients. Cells with
// sigma = 0, and conducting cells with no path to an electrode, are excluded
// from the unknowns and reported as 0 V.
// Throws SolverError when no current can flow between the electrode sets.
PotentialSolution solve_potential(int nx, int ny, double cell_size_mm, std::span<const double> sigma,
                                  const DirichletSet& electrodes, const SolverSettings& settings = {});

PotentialSolution solve_potential(const MazeSpec& spec, const SolverSettings& settings = {});

// Face conductivity shared by two cells; zero if either side is insulating.
inline double face_sigma(double a, double b) { return (a > 0.0 && b > 0.0) ? 2.0 * a * b / (a + b) : 0.0; }

// J = -sigma grad(phi). Face values come straight from the finite-volume
// fluxes; a cell value averages its conducting faces per axis, which is the
// central difference inside uniform regions and one-sided next to walls.
VectorField current_density(const ScalarField& potential, std::span<const double> sigma);

struct ConservationResult {
  ScalarField divergence;  // A/m^3
  double current_in = 0.0;
  double current_out = 0.0;
  double max_interior_divergence = 0.0;  // over non-electrode conducting cells
  double mean_speed = 0.0;               // mean |J| over conducting cells
  double divergence_bound = 0.0;         // 1e-3 * mean|J| / cell_size
  bool balanced = false;                 // |I_in - I_out| / I_in <= 1e-4
  bool divergence_ok = false;
  bool ok() const { return balanced && divergence_ok; }
};

ConservationResult conservation(const VectorField& current, const DirichletSet& electrodes);

ScalarField joule_heating(const VectorField& current, std::span<const double> sigma);

ScalarField speed_of(const VectorField& field);

// Gradient of |J| by central differences, one-sided next to insulating cells.
VectorField grad_speed_of_J(const VectorField& current);

}  // namespace lmaze
