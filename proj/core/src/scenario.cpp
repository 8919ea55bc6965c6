#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <functional>
#include <sstream>

#include "json.hpp"
#include "lmaze/io.hpp"
#include "lmaze/scenario.hpp"

#ifndef LMAZE_VERSION
#define LMAZE_VERSION "0.0.0"
#endif

namespace lmaze {

namespace {

using Json = nlohmann::ordered_json;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(' ');
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(' ');
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& v) {
  double out = 0.0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size() || !std::isfinite(out))
    throw ConfigError("'" + v + "' is not a number");
  return out;
}

template <class Int>
Int to_integer(const std::string& v) {
  Int out = 0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size()) throw ConfigError("'" + v + "' is not an integer");
  return out;
}

bool to_bool(const std::string& v) {
  if (v == "true") return true;
  if (v == "false") return false;
  throw ConfigError("'" + v + "' is not true/false");
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) throw ConfigError("empty entry in list '" + v + "'");
    out.push_back(item);
  }
  return out;
}

std::string generator_name(Generator g) {
  switch (g) {
    case Generator::Ring: return "ring";
    case Generator::Bifurcation: return "bifurcation";
    case Generator::Strip: return "strip";
    case Generator::None: break;
  }
  return "";
}

using Setter = std::function<void(ScenarioConfig&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"maze", [](ScenarioConfig& c, const std::string& v) { c.maze_file = v; }},
      {"generator",
       [](ScenarioConfig& c, const std::string& v) {
         if (v == "ring") c.generator = Generator::Ring;
         else if (v == "bifurcation") c.generator = Generator::Bifurcation;
         else if (v == "strip") c.generator = Generator::Strip;
         else throw ConfigError("unknown generator '" + v + "'");
       }},
      {"seed", [](ScenarioConfig& c, const std::string& v) { c.seed = to_integer<std::uint64_t>(v); }},
      {"ring.rings", [](ScenarioConfig& c, const std::string& v) { c.ring.rings = to_integer<int>(v); }},
      {"ring.gaps",
       [](ScenarioConfig& c, const std::string& v) {
         c.ring.gaps_per_ring.clear();
         for (const auto& g : split_list(v)) c.ring.gaps_per_ring.push_back(to_integer<int>(g));
       }},
      {"ring.diameter_mm", [](ScenarioConfig& c, const std::string& v) { c.ring.diameter_mm = to_double(v); }},
      {"ring.channel_width_mm", [](ScenarioConfig& c, const std::string& v) { c.ring.channel_width_mm = to_double(v); }},
      {"ring.wall_mm", [](ScenarioConfig& c, const std::string& v) { c.ring.wall_mm = to_double(v); }},
      {"bifurcation.len_a_mm", [](ScenarioConfig& c, const std::string& v) { c.bifurcation.len_a_mm = to_double(v); }},
      {"bifurcation.len_b_mm", [](ScenarioConfig& c, const std::string& v) { c.bifurcation.len_b_mm = to_double(v); }},
      {"bifurcation.channel_width_mm",
       [](ScenarioConfig& c, const std::string& v) { c.bifurcation.channel_width_mm = to_double(v); }},
      {"strip.length_mm", [](ScenarioConfig& c, const std::string& v) { c.strip_length_mm = to_double(v); }},
      {"strip.width_mm", [](ScenarioConfig& c, const std::string& v) { c.strip_width_mm = to_double(v); }},
      {"cell_size_mm", [](ScenarioConfig& c, const std::string& v) { c.cell_size_mm = to_double(v); }},
      {"voltage", [](ScenarioConfig& c, const std::string& v) { c.voltage = to_double(v); }},
      {"sigma_electrolyte", [](ScenarioConfig& c, const std::string& v) { c.sigma_electrolyte = to_double(v); }},
      {"sigma_wall", [](ScenarioConfig& c, const std::string& v) { c.sigma_wall = to_double(v); }},
      {"sigma_coating", [](ScenarioConfig& c, const std::string& v) { c.sigma_coating = to_double(v); }},
      {"coat_corners", [](ScenarioConfig& c, const std::string& v) { c.coat_corners = to_bool(v); }},
      {"solver.tolerance", [](ScenarioConfig& c, const std::string& v) { c.solver.tolerance = to_double(v); }},
      {"solver.max_iterations",
       [](ScenarioConfig& c, const std::string& v) { c.solver.max_iterations = to_integer<int>(v); }},
      {"dynamics.mobility", [](ScenarioConfig& c, const std::string& v) { c.dynamics.mobility = to_double(v); }},
      {"dynamics.static_threshold",
       [](ScenarioConfig& c, const std::string& v) { c.dynamics.static_threshold = to_double(v); }},
      {"dynamics.threshold_fraction",
       [](ScenarioConfig& c, const std::string& v) { c.dynamics.threshold_fraction = to_double(v); }},
      {"dynamics.turn_length_mm",
       [](ScenarioConfig& c, const std::string& v) { c.dynamics.turn_length_mm = to_double(v); }},
      {"dynamics.dt", [](ScenarioConfig& c, const std::string& v) { c.dynamics.dt = to_double(v); }},
      {"dynamics.max_steps", [](ScenarioConfig& c, const std::string& v) { c.dynamics.max_steps = to_integer<int>(v); }},
      {"dynamics.lock_window",
       [](ScenarioConfig& c, const std::string& v) { c.dynamics.lock_window = to_integer<int>(v); }},
      {"dynamics.lock_epsilon_mm",
       [](ScenarioConfig& c, const std::string& v) { c.dynamics.lock_epsilon_mm = to_double(v); }},
      {"dynamics.force_source",
       [](ScenarioConfig& c, const std::string& v) {
         try {
           c.dynamics.force_source = force_source_from(v);
         } catch (const std::invalid_argument& e) {
           throw ConfigError(e.what());
         }
       }},
      {"dynamics.force_gain", [](ScenarioConfig& c, const std::string& v) { c.dynamics.force_gain = to_double(v); }},
      {"dynamics.radius_mm", [](ScenarioConfig& c, const std::string& v) { c.dynamics.radius_mm = to_double(v); }},
      {"dynamics.noise_amplitude",
       [](ScenarioConfig& c, const std::string& v) { c.dynamics.noise_amplitude = to_double(v); }},
      {"dynamics.noise_seed",
       [](ScenarioConfig& c, const std::string& v) {
         c.dynamics.noise_seed = to_integer<std::uint64_t>(v);
         c.noise_seed_set = true;
       }},
      {"sensitivity", [](ScenarioConfig& c, const std::string& v) { c.sensitivity = to_bool(v); }},
      {"output", [](ScenarioConfig& c, const std::string& v) { c.output_dir = v; }},
      {"artifacts",
       [](ScenarioConfig& c, const std::string& v) {
         static const std::set<std::string> known{"fields",     "heatmap", "trajectory", "oracle",
                                                  "comparison", "report",  "arrows",     "trace",  "streamline"};
         c.artifacts.clear();
         for (const auto& a : split_list(v)) {
           if (!known.contains(a)) throw ConfigError("unknown artifact '" + a + "'");
           c.artifacts.insert(a);
         }
       }},
  };
  return table;
}

std::string join_ints(const std::vector<int>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + std::to_string(v[i]);
  return out;
}

Json vec_json(Vec2 v) { return Json::array({v.x, v.y}); }

Json trajectory_summary(const ScenarioResult& r) {
  const auto& t = r.trajectory;
  Json dwells = Json::array();
  for (const auto& d : r.profile.dwells) {
    dwells.push_back(Json{{"first_sample", d.first},
                          {"last_sample", d.last},
                          {"t_start_s", d.t_start},
                          {"t_end_s", d.t_end},
                          {"position_mm", vec_json(d.position)}});
  }
  return Json{{"termination", to_string(t.termination)},
              {"samples", t.samples.size()},
              {"steps", t.samples.empty() ? 0 : t.samples.size() - 1},
              {"duration_s", t.samples.empty() ? 0.0 : t.samples.back().t},
              {"dt_s", t.dt},
              {"path_length_mm", t.path_length_mm},
              {"radius_mm", t.radius_mm},
              {"static_threshold", t.static_threshold},
              {"start_mm", t.samples.empty() ? Json() : vec_json(t.samples.front().position)},
              {"end_mm", t.samples.empty() ? Json() : vec_json(t.samples.back().position)},
              {"peak_speed_mm_s", r.profile.peak_speed},
              {"dwell_segments", dwells}};
}

Json comparison_object(const ComparisonMetrics& m) {
  return Json{{"max_lateral_deviation_mm", m.max_lateral_deviation_mm},
              {"length_ratio", m.length_ratio},
              {"corridor_sequence_equal", m.corridor_sequence_equal},
              {"corridor_overlap", m.corridor_overlap},
              {"trajectory_sequence", m.trajectory_sequence},
              {"path_sequence", m.path_sequence}};
}

void ensure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) throw IoError(dir.string() + ": cannot create output directory");
}

}  // namespace

std::string version_string() { return LMAZE_VERSION; }

int exit_code_for(Termination t) {
  switch (t) {
    case Termination::ReachedTarget: return kExitReachedTarget;
    case Termination::Locked: return kExitLocked;
    case Termination::MaxSteps: return kExitMaxSteps;
  }
  return kExitInternal;
}

ScenarioConfig parse_config(const std::string& text, const std::filesystem::path& base_dir) {
  ScenarioConfig c;
  std::set<std::string> seen;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find('\t') != std::string::npos) throw ConfigError("tab character", lineno);
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw ConfigError("expected 'key = value'", lineno);
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    if (key.empty()) throw ConfigError("missing key", lineno);
    if (value.empty()) throw ConfigError("missing value for '" + key + "'", lineno);
    const auto it = setters().find(key);
    if (it == setters().end()) throw ConfigError("unknown key '" + key + "'", lineno);
    if (!seen.insert(key).second) throw ConfigError("duplicate key '" + key + "'", lineno);
    try {
      it->second(c, value);
    } catch (const ConfigError& e) {
      throw ConfigError(key + ": " + e.detail(), lineno);
    }
  }
  const bool has_file = !c.maze_file.empty();
  const bool has_gen = c.generator != Generator::None;
  if (has_file == has_gen) throw ConfigError("exactly one of 'maze' and 'generator' must be given");
  if (has_file && c.maze_file.is_relative() && !base_dir.empty()) c.maze_file = base_dir / c.maze_file;
  if (!c.noise_seed_set) c.dynamics.noise_seed = c.seed;
  if (!(c.solver.tolerance > 0.0)) throw ConfigError("solver.tolerance must be positive");
  if (c.solver.max_iterations < 0) throw ConfigError("solver.max_iterations must be non-negative");
  try {
    validate(c.dynamics);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return c;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  std::string text;
  try {
    text = read_text(path);
  } catch (const IoError& e) {
    throw ConfigError(e.what());
  }
  try {
    return parse_config(text, path.parent_path());
  } catch (const ConfigError& e) {
    throw ConfigError(e.detail(), e.line(), path.string());
  }
}

std::map<std::string, std::string> echo_config(const ScenarioConfig& c) {
  std::map<std::string, std::string> m;
  auto num = [](double v) { return format_number(v); };
  if (!c.maze_file.empty()) {
    m["maze"] = c.maze_file.generic_string();
  } else {
    m["generator"] = generator_name(c.generator);
    m["seed"] = std::to_string(c.seed);
    m["cell_size_mm"] = num(c.cell_size_mm);
    switch (c.generator) {
      case Generator::Ring:
        m["ring.rings"] = std::to_string(c.ring.rings);
        if (!c.ring.gaps_per_ring.empty()) m["ring.gaps"] = join_ints(c.ring.gaps_per_ring);
        m["ring.diameter_mm"] = num(c.ring.diameter_mm);
        m["ring.channel_width_mm"] = num(c.ring.channel_width_mm);
        m["ring.wall_mm"] = num(c.ring.wall_mm);
        break;
      case Generator::Bifurcation:
        m["bifurcation.len_a_mm"] = num(c.bifurcation.len_a_mm);
        m["bifurcation.len_b_mm"] = num(c.bifurcation.len_b_mm);
        m["bifurcation.channel_width_mm"] = num(c.bifurcation.channel_width_mm);
        break;
      case Generator::Strip:
        m["strip.length_mm"] = num(c.strip_length_mm);
        m["strip.width_mm"] = num(c.strip_width_mm);
        break;
      case Generator::None: break;
    }
  }
  if (c.voltage) m["voltage"] = num(*c.voltage);
  if (c.sigma_electrolyte) m["sigma_electrolyte"] = num(*c.sigma_electrolyte);
  if (c.sigma_wall) m["sigma_wall"] = num(*c.sigma_wall);
  if (c.sigma_coating) m["sigma_coating"] = num(*c.sigma_coating);
  m["coat_corners"] = c.coat_corners ? "true" : "false";
  m["solver.tolerance"] = num(c.solver.tolerance);
  m["solver.max_iterations"] = std::to_string(c.solver.max_iterations);
  const auto& d = c.dynamics;
  m["dynamics.mobility"] = num(d.mobility);
  m["dynamics.static_threshold"] = num(d.static_threshold);
  m["dynamics.threshold_fraction"] = num(d.threshold_fraction);
  m["dynamics.turn_length_mm"] = num(d.turn_length_mm);
  m["dynamics.dt"] = num(d.dt);
  m["dynamics.max_steps"] = std::to_string(d.max_steps);
  m["dynamics.lock_window"] = std::to_string(d.lock_window);
  m["dynamics.lock_epsilon_mm"] = num(d.lock_epsilon_mm);
  m["dynamics.force_source"] = to_string(d.force_source);
  m["dynamics.force_gain"] = num(d.force_gain);
  m["dynamics.radius_mm"] = num(d.radius_mm);
  m["dynamics.noise_amplitude"] = num(d.noise_amplitude);
  m["dynamics.noise_seed"] = std::to_string(d.noise_seed);
  m["sensitivity"] = c.sensitivity ? "true" : "false";
  std::string arts;
  for (const auto& a : c.artifacts) arts += (arts.empty() ? "" : ",") + a;
  m["artifacts"] = arts;
  return m;
}

MazeSpec build_maze(const ScenarioConfig& c) {
  MazeSpec maze;
  switch (c.generator) {
    case Generator::None: maze = load_maze(c.maze_file.string()); break;
    case Generator::Ring: {
      RingMazeParams p = c.ring;
      p.cell_size_mm = c.cell_size_mm;
      p.seed = c.seed;
      maze = generate_ring_maze(p);
      break;
    }
    case Generator::Bifurcation: {
      BifurcationParams p = c.bifurcation;
      p.cell_size_mm = c.cell_size_mm;
      maze = generate_bifurcation_maze(p);
      break;
    }
    case Generator::Strip: {
      const int len = static_cast<int>(std::lround(c.strip_length_mm / c.cell_size_mm));
      const int wid = static_cast<int>(std::lround(c.strip_width_mm / c.cell_size_mm));
      maze = generate_strip(len, wid, c.cell_size_mm);
      break;
    }
  }
  if (c.voltage) maze.applied_voltage = *c.voltage;
  if (c.sigma_electrolyte) maze.sigma_electrolyte = *c.sigma_electrolyte;
  if (c.sigma_wall) maze.sigma_wall = *c.sigma_wall;
  if (c.sigma_coating) maze.sigma_coating = *c.sigma_coating;
  if (c.coat_corners) maze = coat_corners(maze);
  validate(maze);
  return maze;
}

CornerForceStats corner_force(const MazeSpec& maze, const VectorField& current, const DynamicsParams& params,
                              const std::vector<Cell>& corners) {
  CornerForceStats s;
  s.corner_cells = corners.size();
  s.corridor_width_cells = segment_corridors(maze).corridor_width;
  if (corners.empty()) return s;
  const double h = maze.cell_size_mm;
  const double reach = s.corridor_width_cells * h;
  const VectorField grad = grad_speed_of_J(current);
  for (int y = 0; y < maze.ny; ++y) {
    for (int x = 0; x < maze.nx; ++x) {
      if (maze.at(x, y) != CellKind::Channel) continue;
      const Vec2 c{(x + 0.5) * h, (y + 0.5) * h};
      bool near = false;
      for (const Cell k : corners) {
        const double dx = std::max({k.x * h - c.x, 0.0, c.x - (k.x + 1) * h});
        const double dy = std::max({k.y * h - c.y, 0.0, c.y - (k.y + 1) * h});
        if (dx * dx + dy * dy <= reach * reach) {
          near = true;
          break;
        }
      }
      if (!near) continue;
      ++s.region_cells;
      const double fg = norm(disk_integrate(grad, c, params.radius_mm, params.force_gain, maze));
      const double fj = norm(disk_integrate(current, c, params.radius_mm, params.force_gain, maze));
      const double f = params.force_source == ForceSource::DiskMeanJ ? fj : fg;
      if (f > s.max_force) {
        s.max_force = f;
        s.max_force_at = c;
      }
      s.max_current_force = std::max(s.max_current_force, fj);
      s.max_grad_force = std::max(s.max_grad_force, fg);
    }
  }
  return s;
}

ScenarioResult run_scenario(const ScenarioConfig& config, Stage stage) {
  ScenarioResult r;
  r.config = config;
  r.maze = build_maze(config);
  if (!validate_and_components(r.maze).solvable) throw MazeError("electrodes are not connected through channel cells");

  auto sol = solve_potential(r.maze, config.solver);
  r.solve = sol.report;
  if (!r.solve.converged)
    throw SolverError("solver did not converge: residual " + format_number(r.solve.final_residual) + " after " +
                      std::to_string(r.solve.iterations) + " iterations");
  r.potential = std::move(sol.potential);
  const auto sigma = conductivity_grid(r.maze);
  r.current = current_density(r.potential, sigma);
  r.conservation = conservation(r.current, dirichlet_from(r.maze));
  r.joule = joule_heating(r.current, sigma);
  r.corners = corner_force(r.maze, r.current, config.dynamics, convex_wall_corners(r.maze));
  if (stage == Stage::Solve) return r;

  r.path = shortest_electrode_path(r.maze);
  {
    const CorridorMap corridors = segment_corridors(r.maze);
    const double h = r.maze.cell_size_mm;
    r.streamline = streamline(r.current, r.maze, start_position(r.maze, config.dynamics, r.current), 0.25 * h,
                              200 * (r.maze.nx + r.maze.ny));
    r.streamline_vs_path = compare_polyline(r.streamline.points, r.path, r.maze, corridors);
    const Path ridge = hot_ridge(r.maze, r.joule);
    std::vector<Vec2> ridge_pts;
    for (const Cell c : ridge.cells) ridge_pts.push_back({(c.x + 0.5) * h, (c.y + 0.5) * h});
    r.ridge_vs_path = compare_polyline(ridge_pts, r.path, r.maze, corridors);
  }
  if (stage == Stage::Oracle) return r;

  const VectorField drive = driving_field(r.current, config.dynamics.force_source);
  r.trajectory = simulate(r.maze, config.dynamics, drive);
  r.profile = velocity_profile(r.trajectory);
  r.comparison = compare_trajectory(r.trajectory, r.path, r.maze);
  r.exit_code = exit_code_for(r.trajectory.termination);

  const auto& d = config.dynamics;
  if (config.sensitivity && r.trajectory.termination == Termination::Locked &&
      (d.static_threshold > 0.0 || d.threshold_fraction > 0.0)) {
    r.sensitivity.checked = true;
    for (double scale : {0.5, 2.0}) {
      DynamicsParams p = d;
      p.static_threshold *= scale;
      p.threshold_fraction *= scale;
      const Termination t = simulate(r.maze, p, drive).termination;
      r.sensitivity.outcomes.emplace_back(scale, t);
      if (t != r.trajectory.termination) r.sensitivity.parameter_sensitive = true;
    }
  }
  return r;
}

std::string comparison_json(const ScenarioResult& r) {
  Json j = comparison_object(r.comparison);
  j["path_length_mm"] = r.path.length_mm();
  j["trajectory_length_mm"] = r.trajectory.path_length_mm;
  return j.dump(2) + "\n";
}

std::string report_json(const ScenarioResult& r, const std::string& timestamp) {
  Json j;
  j["tool"] = Json{{"name", "lmaze"}, {"version", version_string()}};
  j["timestamp"] = timestamp;
  Json cfg = Json::object();
  for (const auto& [k, v] : echo_config(r.config)) cfg[k] = v;
  j["config"] = cfg;
  j["maze"] = Json{{"nx", r.maze.nx},
                   {"ny", r.maze.ny},
                   {"cell_size_mm", r.maze.cell_size_mm},
                   {"voltage", r.maze.applied_voltage},
                   {"sigma_electrolyte", r.maze.sigma_electrolyte},
                   {"sigma_wall", r.maze.sigma_wall},
                   {"sigma_coating", r.maze.sigma_coating}};
  j["solve"] = Json{{"converged", r.solve.converged},
                    {"iterations", r.solve.iterations},
                    {"final_residual", r.solve.final_residual},
                    {"tolerance", r.solve.tolerance},
                    {"current_in_A_per_m", r.solve.current_in},
                    {"current_out_A_per_m", r.solve.current_out}};
  j["conservation"] = Json{{"balanced", r.conservation.balanced},
                           {"divergence_ok", r.conservation.divergence_ok},
                           {"max_interior_divergence", r.conservation.max_interior_divergence},
                           {"divergence_bound", r.conservation.divergence_bound}};
  j["corner_force"] = Json{{"corner_cells", r.corners.corner_cells},
                           {"region_cells", r.corners.region_cells},
                           {"corridor_width_cells", r.corners.corridor_width_cells},
                           {"force_source", to_string(r.config.dynamics.force_source)},
                           {"max_force", r.corners.max_force},
                           {"max_force_at_mm", vec_json(r.corners.max_force_at)},
                           {"max_disk_mean_j", r.corners.max_current_force},
                           {"max_disk_mean_grad_speed_j", r.corners.max_grad_force}};
  if (!r.path.cells.empty()) {
    j["oracle"] = Json{{"path_cells", r.path.length_cells()},
                       {"path_length_mm", r.path.length_mm()},
                       {"streamline_end", to_string(r.streamline.end)},
                       {"streamline_points", r.streamline.points.size()},
                       {"streamline_vs_path", comparison_object(r.streamline_vs_path)},
                       {"ridge_vs_path", comparison_object(r.ridge_vs_path)}};
  }
  if (!r.trajectory.samples.empty()) {
    j["trajectory"] = trajectory_summary(r);
    j["comparison"] = comparison_object(r.comparison);
    Json outcomes = Json::array();
    for (const auto& [scale, t] : r.sensitivity.outcomes)
      outcomes.push_back(Json{{"threshold_scale", scale}, {"termination", to_string(t)}});
    j["sensitivity"] = Json{{"checked", r.sensitivity.checked},
                            {"parameter_sensitive", r.sensitivity.parameter_sensitive},
                            {"outcomes", outcomes}};
  }
  // Column units of the CSV files in the bundle. The droplet force is the
  // driving field integrated over the disk area.
  const std::string force_unit =
      unit_of(r.config.dynamics.force_source == ForceSource::DiskMeanJ ? VectorQuantity::CurrentDensity
                                                                       : VectorQuantity::GradSpeedOfJ) +
      "*mm^2";
  j["files"] = Json{
      {"potential.csv", Json{{"columns", {"x_mm", "y_mm", "value"}}, {"units", {"mm", "mm", unit_of(ScalarQuantity::Potential)}}}},
      {"current.csv",
       Json{{"columns", {"x_mm", "y_mm", "vx", "vy", "magnitude"}},
            {"units", {"mm", "mm", unit_of(VectorQuantity::CurrentDensity), unit_of(VectorQuantity::CurrentDensity),
                       unit_of(VectorQuantity::CurrentDensity)}}}},
      {"trajectory.csv",
       Json{{"columns", {"t_s", "x_mm", "y_mm", "speed_mm_s", "force_mag"}},
            {"units", {"s", "mm", "mm", "mm/s", force_unit}}}},
      {"path.csv", Json{{"columns", {"step", "x", "y", "x_mm", "y_mm"}}, {"units", {"1", "cell", "cell", "mm", "mm"}}}}};
  j["exit_code"] = r.exit_code;
  return j.dump(2) + "\n";
}

std::vector<std::string> export_bundle(const ScenarioResult& r, const std::string& timestamp, Stage stage) {
  const auto& dir = r.config.output_dir;
  if (dir.empty()) throw IoError("no output directory configured");
  ensure_dir(dir);
  const auto& want = r.config.artifacts;
  std::vector<std::string> written;
  auto put = [&](const std::string& name, const std::string& content) {
    write_text(dir / name, content);
    written.push_back(name);
  };
  const bool full = stage == Stage::Full;
  if (want.contains("report")) put("report.json", report_json(r, timestamp));
  if (full && want.contains("trajectory")) put("trajectory.csv", trajectory_csv(r.trajectory));
  if (want.contains("fields")) {
    put("potential.csv", scalar_field_csv(r.potential));
    put("current.csv", vector_field_csv(r.current));
  }
  if (want.contains("heatmap")) {
    put("potential.pgm", encode_pgm(render_on_maze(r.potential, r.maze, 2)));
    put("joule.pgm", encode_pgm(render_on_maze(r.joule, r.maze, 2)));
  }
  if (stage != Stage::Solve && want.contains("oracle")) put("path.csv", path_csv(r.path));
  if (full && want.contains("comparison")) put("comparison.json", comparison_json(r));
  if (want.contains("arrows")) put("current.pgm", encode_pgm(render_vectors(r.current, 4, 6)));
  if (stage != Stage::Solve && want.contains("streamline")) {
    std::string csv = "x_mm,y_mm\n";
    for (const Vec2 p : r.streamline.points) csv += format_number(p.x) + "," + format_number(p.y) + "\n";
    put("streamline.csv", csv);
  }
  if (full && want.contains("trace")) put("trace.pgm", encode_pgm(render_trace(r.maze, r.trajectory, 2, 4)));
  std::sort(written.begin(), written.end());
  return written;
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace lmaze
