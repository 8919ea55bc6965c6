#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "lmaze/droplet.hpp"
#include "lmaze/field.hpp"
#include "lmaze/maze.hpp"
#include "lmaze/oracle.hpp"

namespace lmaze {

std::string version_string();

// Process exit codes. The first three encode the trajectory outcome.
enum ExitCode : int {
  kExitReachedTarget = 0,
  kExitInternal = 1,
  kExitLocked = 2,
  kExitMaxSteps = 3,
  kExitConfig = 4,
  kExitMaze = 5,
  kExitSolver = 6,
  kExitIo = 7,
};

int exit_code_for(Termination t);

class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& what, int line = 0, const std::string& file = {})
      : std::runtime_error((file.empty() ? "" : file + ": ") + (line > 0 ? "line " + std::to_string(line) + ": " : "") +
                           what),
        detail_(what),
        line_(line) {}
  int line() const { return line_; }
  const std::string& detail() const { return detail_; }

 private:
  std::string detail_;
  int line_;
};

enum class Generator : std::uint8_t { None, Ring, Bifurcation, Strip };

// Artifact groups: fields (potential.csv, current.csv), heatmap
// (potential.pgm, joule.pgm), trajectory, oracle (path.csv), comparison,
// report; arrows (current.pgm), trace (trace.pgm) and streamline
// (streamline.csv) are opt-in extras.
inline const std::set<std::string> kDefaultArtifacts{"fields", "heatmap", "trajectory", "oracle", "comparison", "report"};

struct ScenarioConfig {
  std::filesystem::path maze_file;  // exactly one of maze_file / generator
  Generator generator = Generator::None;
  std::uint64_t seed = 1;
  RingMazeParams ring;
  BifurcationParams bifurcation;
  double strip_length_mm = 40.0;
  double strip_width_mm = 4.0;
  double cell_size_mm = kDefaultCellSizeMm;  // generated mazes only

  // Overrides of the maze's physical constants.
  std::optional<double> voltage;
  std::optional<double> sigma_electrolyte;
  std::optional<double> sigma_wall;
  std::optional<double> sigma_coating;
  bool coat_corners = false;

  SolverSettings solver;
  // Tuned on the generated mazes: ring corners produce dwells, 38/42 locks.
  DynamicsParams dynamics = [] {
    DynamicsParams d;
    d.threshold_fraction = 0.2;
    d.turn_length_mm = 16.0;
    return d;
  }();
  bool noise_seed_set = false;
  bool sensitivity = true;  // re-run Locked outcomes at half and double the threshold

  std::filesystem::path output_dir;
  std::set<std::string> artifacts = kDefaultArtifacts;
};

// Flat `key = value` text; '#' starts a comment line. Relative maze paths
// resolve against `base_dir`.
ScenarioConfig parse_config(const std::string& text, const std::filesystem::path& base_dir = {});
ScenarioConfig load_config(const std::filesystem::path& path);

// Canonical key/value echo of every effective setting except the output directory.
std::map<std::string, std::string> echo_config(const ScenarioConfig& config);

// Maze described by the config, after overrides and optional corner coating.
MazeSpec build_maze(const ScenarioConfig& config);

struct CornerForceStats {
  std::size_t corner_cells = 0;
  std::size_t region_cells = 0;  // channel cells within one corridor width of a corner
  int corridor_width_cells = 0;
  double max_force = 0.0;  // disk-integrated driving field of the configured force source
  Vec2 max_force_at;
  double max_current_force = 0.0;  // disk-integrated J
  double max_grad_force = 0.0;     // disk-integrated grad |J|
};

// `corners` come from the uncoated geometry so paired runs share one region.
CornerForceStats corner_force(const MazeSpec& maze, const VectorField& current, const DynamicsParams& params,
                              const std::vector<Cell>& corners);

struct SensitivityCheck {
  bool checked = false;
  std::vector<std::pair<double, Termination>> outcomes;  // (threshold scale, termination)
  bool parameter_sensitive = false;
};

struct ScenarioResult {
  ScenarioConfig config;
  MazeSpec maze;
  SolveReport solve;
  ConservationResult conservation;
  ScalarField potential;
  VectorField current;
  ScalarField joule;
  Trajectory trajectory;
  VelocityProfile profile;
  Path path;
  Streamline streamline;  // from the droplet start position
  ComparisonMetrics streamline_vs_path;
  ComparisonMetrics ridge_vs_path;
  ComparisonMetrics comparison;
  CornerForceStats corners;
  SensitivityCheck sensitivity;
  int exit_code = kExitReachedTarget;
};

// Which stages run.
enum class Stage : std::uint8_t { Solve, Oracle, Full };

ScenarioResult run_scenario(const ScenarioConfig& config, Stage stage = Stage::Full);

// report.json text; `timestamp` is the only field that depends on the clock.
std::string report_json(const ScenarioResult& result, const std::string& timestamp);
std::string comparison_json(const ScenarioResult& result);

// Writes the requested artifacts into config.output_dir (created if needed);
// returns the file names written.
std::vector<std::string> export_bundle(const ScenarioResult& result, const std::string& timestamp,
                                       Stage stage = Stage::Full);

std::string utc_timestamp();

}  // namespace lmaze
