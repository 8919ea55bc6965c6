#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

#include "lmaze/droplet.hpp"

namespace lmaze {

namespace {

// Antiderivative of sqrt(r^2 - x^2).
double half_chord_integral(double x, double r) {
  const double xc = std::clamp(x, -r, r);
  return 0.5 * (xc * std::sqrt(std::max(0.0, r * r - xc * xc)) + r * r * std::asin(xc / r));
}

struct CellRange {
  int x0, x1, y0, y1;
};

CellRange cells_near(Vec2 c, double reach, double h) {
  return {static_cast<int>(std::floor((c.x - reach) / h)), static_cast<int>(std::floor((c.x + reach) / h)),
          static_cast<int>(std::floor((c.y - reach) / h)), static_cast<int>(std::floor((c.y + reach) / h))};
}

template <class Contributes>
Vec2 integrate_disk(const VectorField& field, Vec2 center, double radius, double gain, Contributes&& contributes) {
  if (!(radius > 0.0)) throw DynamicsError("disk radius must be positive");
  const double h = field.cell_size_mm;
  const double width = field.nx * h;
  const double height = field.ny * h;
  if (center.x + radius <= 0.0 || center.y + radius <= 0.0 || center.x - radius >= width ||
      center.y - radius >= height)
    throw DynamicsError("disk lies entirely outside the grid");
  const CellRange r = cells_near(center, radius, h);
  Vec2 sum;
  for (int y = std::max(0, r.y0); y <= std::min(field.ny - 1, r.y1); ++y) {
    for (int x = std::max(0, r.x0); x <= std::min(field.nx - 1, r.x1); ++x) {
      if (!contributes(x, y)) continue;
      const double a = disk_rect_overlap(center, radius, x * h, y * h, (x + 1) * h, (y + 1) * h);
      if (a <= 0.0) continue;
      const Vec2& v = field.values[field.index(x, y)];
      sum.x += a * v.x;
      sum.y += a * v.y;
    }
  }
  return gain * sum;
}

bool is_wall(const MazeSpec& maze, int x, int y) { return !maze.inside(x, y) || maze.at(x, y) != CellKind::Channel; }

struct Contact {
  Vec2 normal;  // from the wall towards the disk centre
  double gap;   // distance from the centre to the wall square
};

Vec2 closest_on_cell(Vec2 p, int x, int y, double h) {
  return {std::clamp(p.x, x * h, (x + 1) * h), std::clamp(p.y, y * h, (y + 1) * h)};
}

std::vector<Contact> contacts(const MazeSpec& maze, Vec2 p, double reach) {
  const double h = maze.cell_size_mm;
  const CellRange r = cells_near(p, reach, h);
  std::vector<Contact> out;
  for (int y = r.y0; y <= r.y1; ++y) {
    for (int x = r.x0; x <= r.x1; ++x) {
      if (!is_wall(maze, x, y)) continue;
      const Vec2 q = closest_on_cell(p, x, y, h);
      const Vec2 d = p - q;
      const double dist = norm(d);
      if (dist >= reach) continue;
      Vec2 n;
      if (dist > 0.0) {
        n = (1.0 / dist) * d;
      } else {
        const Vec2 c{(x + 0.5) * h, (y + 0.5) * h};
        const Vec2 e = p - c;
        const double len = norm(e);
        n = len > 0.0 ? (1.0 / len) * e : Vec2{0.0, -1.0};
      }
      out.push_back({n, dist});
    }
  }
  return out;
}

// Push the disk out of any wall it overlaps.
Vec2 clamp_inside(const MazeSpec& maze, Vec2 p, double radius) {
  for (int iter = 0; iter < 16; ++iter) {
    const auto cs = contacts(maze, p, radius);
    if (cs.empty()) break;
    auto deepest = std::min_element(cs.begin(), cs.end(), [](const Contact& a, const Contact& b) { return a.gap < b.gap; });
    p = p + (radius - deepest->gap) * deepest->normal;
  }
  return p;
}

}  // namespace

std::string to_string(ForceSource s) { return s == ForceSource::DiskMeanJ ? "disk_mean_j" : "disk_mean_grad_speed_j"; }

ForceSource force_source_from(const std::string& s) {
  if (s == "disk_mean_j") return ForceSource::DiskMeanJ;
  if (s == "disk_mean_grad_speed_j") return ForceSource::DiskMeanGradSpeedJ;
  throw std::invalid_argument("unknown force source '" + s + "'");
}

std::string to_string(Termination t) {
  switch (t) {
    case Termination::ReachedTarget: return "reached_target";
    case Termination::Locked: return "locked";
    case Termination::MaxSteps: return "max_steps";
  }
  return "";
}

void validate(const DynamicsParams& p) {
  if (!(p.mobility > 0.0)) throw std::invalid_argument("mobility must be positive");
  if (!(p.static_threshold >= 0.0)) throw std::invalid_argument("static_threshold must be non-negative");
  if (!(p.dt >= 0.0)) throw std::invalid_argument("dt must be positive (or 0 for automatic)");
  if (p.max_steps < 1) throw std::invalid_argument("max_steps must be positive");
  if (p.lock_window < 1) throw std::invalid_argument("lock_window must be at least 1");
  if (!(p.lock_epsilon_mm >= 0.0)) throw std::invalid_argument("lock_epsilon must be non-negative");
  if (!(p.radius_mm > 0.0)) throw std::invalid_argument("droplet radius must be positive");
  if (!(p.noise_amplitude >= 0.0)) throw std::invalid_argument("noise amplitude must be non-negative");
  if (!(p.threshold_fraction >= 0.0)) throw std::invalid_argument("threshold_fraction must be non-negative");
  if (!(p.turn_length_mm >= 0.0)) throw std::invalid_argument("turn_length must be non-negative");
}

double disk_rect_overlap(Vec2 center, double radius, double x0, double y0, double x1, double y1) {
  // Shift so the disk is centred at the origin, then integrate the vertical
  // extent of the intersection over x, piecewise between chord breakpoints.
  x0 -= center.x;
  x1 -= center.x;
  y0 -= center.y;
  y1 -= center.y;
  const double r = radius;
  const double lo = std::max(x0, -r);
  const double hi = std::min(x1, r);
  if (!(hi > lo) || !(y1 > y0)) return 0.0;
  std::array<double, 6> cuts{};
  std::size_t n = 0;
  cuts[n++] = lo;
  cuts[n++] = hi;
  for (double yy : {y0, y1}) {
    if (std::abs(yy) < r) {
      const double s = std::sqrt(r * r - yy * yy);
      for (double c : {-s, s}) {
        if (c > lo && c < hi) cuts[n++] = c;
      }
    }
  }
  std::sort(cuts.begin(), cuts.begin() + static_cast<std::ptrdiff_t>(n));
  double area = 0.0;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const double a = cuts[k];
    const double b = cuts[k + 1];
    if (!(b > a)) continue;
    const double m = 0.5 * (a + b);
    const double s = std::sqrt(std::max(0.0, r * r - m * m));
    const bool top_is_rect = y1 < s;
    const bool bottom_is_rect = y0 > -s;
    const double top = top_is_rect ? y1 : s;
    const double bottom = bottom_is_rect ? y0 : -s;
    if (top <= bottom) continue;
    const double chord = half_chord_integral(b, r) - half_chord_integral(a, r);
    const double top_int = top_is_rect ? y1 * (b - a) : chord;
    const double bottom_int = bottom_is_rect ? y0 * (b - a) : -chord;
    area += top_int - bottom_int;
  }
  return std::max(0.0, area);
}

Vec2 disk_integrate(const VectorField& field, Vec2 center, double radius_mm, double gain,
                    std::span<const std::uint8_t> mask) {
  if (mask.size() != field.values.size()) throw DimensionError("mask does not match field");
  return integrate_disk(field, center, radius_mm, gain, [&](int x, int y) { return mask[field.index(x, y)] != 0; });
}

Vec2 disk_integrate(const VectorField& field, Vec2 center, double radius_mm, double gain, const MazeSpec& maze) {
  if (maze.nx != field.nx || maze.ny != field.ny) throw DimensionError("maze does not match field");
  return integrate_disk(field, center, radius_mm, gain,
                        [&](int x, int y) { return maze.at(x, y) == CellKind::Channel; });
}

std::vector<std::uint8_t> channel_mask(const MazeSpec& maze) {
  std::vector<std::uint8_t> m(maze.cells.size());
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = maze.cells[i] == CellKind::Channel;
  return m;
}

VectorField driving_field(const VectorField& current, ForceSource source) {
  if (source == ForceSource::DiskMeanJ) return current;
  return grad_speed_of_J(current);
}

double wall_penetration(const MazeSpec& maze, Vec2 center, double radius_mm) {
  double worst = 0.0;
  for (const auto& c : contacts(maze, center, radius_mm)) worst = std::max(worst, radius_mm - c.gap);
  return worst;
}

bool touches_electrode(const MazeSpec& maze, Vec2 center, double radius_mm, Polarity p) {
  const double h = maze.cell_size_mm;
  for (const auto& e : maze.electrodes) {
    if (e.polarity != p) continue;
    for (const auto& c : e.cells) {
      const Vec2 q = closest_on_cell(center, c.x, c.y, h);
      if (norm(center - q) < radius_mm) return true;
    }
  }
  return false;
}

DropletState step(const DropletState& state, const DynamicsParams& params, const MazeSpec& maze,
                  const VectorField& field, std::mt19937_64* noise) {
  const double h = maze.cell_size_mm;
  const double dt = params.dt;
  DropletState next = state;
  next.t = state.t + dt;
  next.step = state.step + 1;

  Vec2 force = disk_integrate(field, state.position, state.radius_mm, params.force_gain, maze);
  if (params.noise_amplitude > 0.0 && noise != nullptr) {
    std::normal_distribution<double> gauss(0.0, params.noise_amplitude);
    force.x += gauss(*noise);
    force.y += gauss(*noise);
  }
  const double fmag = norm(force);
  const Vec2 fdir = fmag > 0.0 ? (1.0 / fmag) * force : Vec2{};
  if (params.turn_length_mm > 0.0) {
    const double rate = std::min(1.0, params.mobility * fmag * dt / params.turn_length_mm);
    next.heading = state.heading + rate * (fdir - state.heading);
  } else {
    next.heading = fdir;
  }
  Vec2 drive = std::max(0.0, dot(next.heading, fdir)) * force;

  const double contact_tol = 1e-6 * h;
  const auto cs = contacts(maze, state.position, state.radius_mm + contact_tol);
  for (int pass = 0; pass < 4; ++pass) {
    for (const auto& c : cs) {
      const double into = dot(drive, c.normal);
      if (into < 0.0) drive = drive - into * c.normal;
    }
  }
  for (const auto& c : cs) {
    // Wedged between opposing contacts: no admissible direction remains.
    if (dot(drive, c.normal) < -1e-12 * norm(drive)) drive = {};
  }
  // Static threshold on the admissible drive: pressing into a wall does not
  // help the droplet unstick.
  if (norm(drive) < params.static_threshold || norm(drive) == 0.0) {
    next.velocity = {};
    return next;
  }
  const Vec2 v = params.mobility * drive;
  Vec2 disp = dt * v;
  const double len = norm(disp);
  if (len > 0.5 * h) disp = (0.5 * h / len) * disp;
  const Vec2 moved = clamp_inside(maze, state.position + disp, state.radius_mm);
  next.position = moved;
  next.velocity = (1.0 / dt) * (moved - state.position);
  return next;
}

Vec2 start_position(const MazeSpec& maze, const DynamicsParams& params, const VectorField& field) {
  const auto pos = maze.electrode_cells(Polarity::Positive);
  if (pos.empty()) throw DynamicsError("maze has no positive electrode");
  const double h = maze.cell_size_mm;
  Vec2 centroid;
  for (const auto& c : pos) centroid = centroid + Vec2{(c.x + 0.5) * h, (c.y + 0.5) * h};
  centroid = (1.0 / static_cast<double>(pos.size())) * centroid;

  // Candidates on a half-cell lattice; nearest to E1 wins, ties go to the
  // stronger driving force, then to scan order.
  const double r = params.radius_mm;
  double best_d = std::numeric_limits<double>::infinity();
  double best_f = -1.0;
  std::optional<Vec2> best;
  for (int j = 1; j < 2 * maze.ny; ++j) {
    for (int i = 1; i < 2 * maze.nx; ++i) {
      const Vec2 p{0.5 * i * h, 0.5 * j * h};
      const int cx = std::min(maze.nx - 1, static_cast<int>(p.x / h));
      const int cy = std::min(maze.ny - 1, static_cast<int>(p.y / h));
      if (maze.at(cx, cy) != CellKind::Channel) continue;
      const double d = norm(p - centroid);
      if (d > best_d + 1e-9 * h) continue;
      if (wall_penetration(maze, p, r) > 0.0) continue;
      if (touches_electrode(maze, p, r, Polarity::Positive) || touches_electrode(maze, p, r, Polarity::Negative))
        continue;
      const double f = norm(disk_integrate(field, p, r, params.force_gain, maze));
      if (d < best_d - 1e-9 * h || f > best_f) {
        best_d = d;
        best_f = f;
        best = p;
      }
    }
  }
  if (!best) throw DynamicsError("no start position: channel narrower than the droplet diameter");
  return *best;
}

double peak_disk_force(const MazeSpec& maze, const DynamicsParams& params, const VectorField& field) {
  const double h = maze.cell_size_mm;
  double fmax = 0.0;
  for (int y = 0; y < maze.ny; ++y) {
    for (int x = 0; x < maze.nx; ++x) {
      if (maze.at(x, y) != CellKind::Channel) continue;
      const Vec2 c{(x + 0.5) * h, (y + 0.5) * h};
      fmax = std::max(fmax, norm(disk_integrate(field, c, params.radius_mm, params.force_gain, maze)));
    }
  }
  return fmax;
}

double auto_time_step(const MazeSpec& maze, const DynamicsParams& params, const VectorField& field) {
  const double fmax = peak_disk_force(maze, params, field) + 3.0 * params.noise_amplitude;
  if (!(fmax > 0.0)) throw DynamicsError("driving field vanishes everywhere");
  return 0.5 * maze.cell_size_mm / (params.mobility * fmax);
}

Trajectory simulate(const MazeSpec& maze, const DynamicsParams& params_in, const VectorField& field) {
  validate(params_in);
  if (field.nx != maze.nx || field.ny != maze.ny) throw DimensionError("field does not match maze");
  if (!validate_and_components(maze).solvable) throw DynamicsError("maze is not solvable");
  DynamicsParams params = params_in;
  if (params.dt == 0.0) params.dt = auto_time_step(maze, params, field);
  if (params.threshold_fraction > 0.0)
    params.static_threshold = params.threshold_fraction * peak_disk_force(maze, params, field);

  DropletState s;
  s.radius_mm = params.radius_mm;
  s.position = start_position(maze, params, field);
  std::mt19937_64 rng(params.noise_seed);

  Trajectory traj;
  traj.dt = params.dt;
  traj.radius_mm = params.radius_mm;
  traj.static_threshold = params.static_threshold;
  auto force_at = [&](Vec2 p) { return norm(disk_integrate(field, p, s.radius_mm, params.force_gain, maze)); };
  traj.samples.push_back({0.0, s.position, 0.0, force_at(s.position)});
  if (touches_electrode(maze, s.position, s.radius_mm, Polarity::Negative)) {
    traj.termination = Termination::ReachedTarget;
    return traj;
  }
  traj.termination = Termination::MaxSteps;
  for (int k = 1; k <= params.max_steps; ++k) {
    const Vec2 before = s.position;
    s = step(s, params, maze, field, &rng);
    traj.path_length_mm += norm(s.position - before);
    traj.samples.push_back({s.t, s.position, norm(s.velocity), force_at(s.position)});
    if (touches_electrode(maze, s.position, s.radius_mm, Polarity::Negative)) {
      traj.termination = Termination::ReachedTarget;
      break;
    }
    if (k >= params.lock_window) {
      const Vec2 past = traj.samples[static_cast<std::size_t>(k - params.lock_window)].position;
      if (norm(s.position - past) < params.lock_epsilon_mm) {
        traj.termination = Termination::Locked;
        break;
      }
    }
  }
  return traj;
}

VelocityProfile velocity_profile(const Trajectory& traj) {
  if (traj.samples.empty()) throw std::invalid_argument("empty trajectory");
  VelocityProfile out;
  for (const auto& s : traj.samples) {
    out.speed.emplace_back(s.t, s.speed);
    out.peak_speed = std::max(out.peak_speed, s.speed);
  }
  const double limit = 0.01 * out.peak_speed;
  std::size_t i = 0;
  while (i < traj.samples.size()) {
    if (!(traj.samples[i].speed < limit)) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j + 1 < traj.samples.size() && traj.samples[j + 1].speed < limit) ++j;
    out.dwells.push_back({i, j, traj.samples[i].t, traj.samples[j].t, traj.samples[i].position});
    i = j + 1;
  }
  return out;
}

}  // namespace lmaze
