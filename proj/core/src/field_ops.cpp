#include <algorithm>
#include <cmath>

#include "lmaze/field.hpp"

namespace lmaze {

namespace {

constexpr double kMmToM = 1e-3;

void check_dims(int nx, int ny, std::size_t size) {
  if (nx <= 0 || ny <= 0 || static_cast<std::size_t>(nx) * ny != size)
    throw DimensionError("field dimensions do not match");
}

// Average of the available one-sided values along an axis.
double axis_mean(bool has_lo, double lo, bool has_hi, double hi) {
  if (has_lo && has_hi) return 0.5 * (lo + hi);
  if (has_lo) return lo;
  if (has_hi) return hi;
  return 0.0;
}

}  // namespace

VectorField current_density(const ScalarField& potential, std::span<const double> sigma) {
  const int nx = potential.nx;
  const int ny = potential.ny;
  check_dims(nx, ny, potential.values.size());
  if (sigma.size() != potential.values.size()) throw DimensionError("conductivity grid does not match potential");
  const double h = potential.cell_size_mm * kMmToM;

  VectorField j(nx, ny, potential.cell_size_mm, VectorQuantity::CurrentDensity);
  j.face_east.assign(j.values.size(), 0.0);
  j.face_south.assign(j.values.size(), 0.0);
  std::vector<std::uint8_t> east_open(j.values.size(), 0);
  std::vector<std::uint8_t> south_open(j.values.size(), 0);
  for (int y = 0; y < ny; ++y) {
    for (int x = 0; x < nx; ++x) {
      const std::size_t i = j.index(x, y);
      j.active[i] = sigma[i] > 0.0;
      if (x + 1 < nx) {
        const double g = face_sigma(sigma[i], sigma[i + 1]);
        if (g > 0.0) {
          j.face_east[i] = -g * (potential.values[i + 1] - potential.values[i]) / h;
          east_open[i] = 1;
        }
      }
      if (y + 1 < ny) {
        const std::size_t below = j.index(x, y + 1);
        const double g = face_sigma(sigma[i], sigma[below]);
        if (g > 0.0) {
          j.face_south[i] = -g * (potential.values[below] - potential.values[i]) / h;
          south_open[i] = 1;
        }
      }
    }
  }
  for (int y = 0; y < ny; ++y) {
    for (int x = 0; x < nx; ++x) {
      const std::size_t i = j.index(x, y);
      if (!j.active[i]) continue;
      const bool w = x > 0 && east_open[i - 1];
      const bool n = y > 0 && south_open[j.index(x, y - 1)];
      j.values[i].x = axis_mean(w, w ? j.face_east[i - 1] : 0.0, east_open[i], j.face_east[i]);
      j.values[i].y = axis_mean(n, n ? j.face_south[j.index(x, y - 1)] : 0.0, south_open[i], j.face_south[i]);
    }
  }
  return j;
}

ConservationResult conservation(const VectorField& current, const DirichletSet& electrodes) {
  const int nx = current.nx;
  const int ny = current.ny;
  check_dims(nx, ny, current.values.size());
  if (!current.has_faces()) throw std::invalid_argument("conservation needs face fluxes from current_density");
  const double h = current.cell_size_mm * kMmToM;

  ConservationResult out;
  out.divergence = ScalarField(nx, ny, current.cell_size_mm, ScalarQuantity::Divergence);
  std::vector<std::int8_t> pole(current.values.size(), 0);
  for (const auto& c : electrodes.positive) pole[current.index(c.x, c.y)] = 1;
  for (const auto& c : electrodes.negative) pole[current.index(c.x, c.y)] = -1;

  double speed_sum = 0.0;
  std::size_t active = 0;
  for (int y = 0; y < ny; ++y) {
    for (int x = 0; x < nx; ++x) {
      const std::size_t i = current.index(x, y);
      const double west = x > 0 ? current.face_east[i - 1] : 0.0;
      const double north = y > 0 ? current.face_south[current.index(x, y - 1)] : 0.0;
      const double div = (current.face_east[i] - west + current.face_south[i] - north) / h;
      out.divergence.values[i] = div;
      if (pole[i] > 0) out.current_in += div * h * h;
      else if (pole[i] < 0) out.current_out -= div * h * h;
      if (!current.active[i]) continue;
      speed_sum += norm(current.values[i]);
      ++active;
      if (pole[i] == 0) out.max_interior_divergence = std::max(out.max_interior_divergence, std::abs(div));
    }
  }
  out.mean_speed = active > 0 ? speed_sum / static_cast<double>(active) : 0.0;
  out.divergence_bound = 1e-3 * out.mean_speed / h;
  const double scale = std::max(out.current_in, 1e-300);
  out.balanced = out.current_in > 0.0 && std::abs(out.current_in - out.current_out) / scale <= 1e-4;
  out.divergence_ok = out.max_interior_divergence <= out.divergence_bound;
  return out;
}

ScalarField joule_heating(const VectorField& current, std::span<const double> sigma) {
  check_dims(current.nx, current.ny, current.values.size());
  if (sigma.size() != current.values.size()) throw DimensionError("conductivity grid does not match current");
  ScalarField p(current.nx, current.ny, current.cell_size_mm, ScalarQuantity::JoulePower);
  for (std::size_t i = 0; i < sigma.size(); ++i) {
    if (sigma[i] > 0.0) p.values[i] = dot(current.values[i], current.values[i]) / sigma[i];
  }
  return p;
}

ScalarField speed_of(const VectorField& field) {
  ScalarField s(field.nx, field.ny, field.cell_size_mm, ScalarQuantity::SpeedOfJ);
  for (std::size_t i = 0; i < field.values.size(); ++i) s.values[i] = norm(field.values[i]);
  return s;
}

VectorField grad_speed_of_J(const VectorField& current) {
  const int nx = current.nx;
  const int ny = current.ny;
  check_dims(nx, ny, current.values.size());
  const double h = current.cell_size_mm * kMmToM;
  const ScalarField s = speed_of(current);
  VectorField g(nx, ny, current.cell_size_mm, VectorQuantity::GradSpeedOfJ);
  g.active = current.active;
  auto on = [&](int x, int y) { return x >= 0 && y >= 0 && x < nx && y < ny && current.active[current.index(x, y)]; };
  for (int y = 0; y < ny; ++y) {
    for (int x = 0; x < nx; ++x) {
      if (!on(x, y)) continue;
      const double c = s(x, y);
      const bool w = on(x - 1, y);
      const bool e = on(x + 1, y);
      const bool n = on(x, y - 1);
      const bool so = on(x, y + 1);
      Vec2 v;
      if (w && e) v.x = (s(x + 1, y) - s(x - 1, y)) / (2.0 * h);
      else if (e) v.x = (s(x + 1, y) - c) / h;
      else if (w) v.x = (c - s(x - 1, y)) / h;
      if (n && so) v.y = (s(x, y + 1) - s(x, y - 1)) / (2.0 * h);
      else if (so) v.y = (s(x, y + 1) - c) / h;
      else if (n) v.y = (c - s(x, y - 1)) / h;
      g.values[g.index(x, y)] = v;
    }
  }
  return g;
}

}  // namespace lmaze
