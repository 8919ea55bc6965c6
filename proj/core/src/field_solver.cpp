#include <algorithm>
#include <array>
#include <cmath>
#include <queue>

#include "lmaze/field.hpp"

namespace lmaze {

namespace {

constexpr int kDx[4] = {1, 0, -1, 0};
constexpr int kDy[4] = {0, -1, 0, 1};

enum class Role : std::uint8_t { Insulator, Unknown, Positive, Negative, Floating };

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// Sparse symmetric operator on the unknown cells: 5-point stencil, at most
// four off-diagonal couplings per row.
struct GridOperator {
  std::vector<double> diag;
  std::vector<std::array<int, 4>> nbr;       // unknown index or -1
  std::vector<std::array<double, 4>> coef;   // conductance to that neighbour

  void apply(const std::vector<double>& x, std::vector<double>& y) const {
    for (std::size_t i = 0; i < diag.size(); ++i) {
      double s = diag[i] * x[i];
      for (int d = 0; d < 4; ++d) {
        if (nbr[i][d] >= 0) s -= coef[i][d] * x[nbr[i][d]];
      }
      y[i] = s;
    }
  }
};

}  // namespace

double norm(Vec2 a) { return std::hypot(a.x, a.y); }

std::string unit_of(ScalarQuantity q) {
  switch (q) {
    case ScalarQuantity::Potential: return "V";
    case ScalarQuantity::JoulePower: return "W/m^3";
    case ScalarQuantity::SpeedOfJ: return "A/m^2";
    case ScalarQuantity::Divergence: return "A/m^3";
  }
  return "";
}

std::string unit_of(VectorQuantity q) {
  return q == VectorQuantity::CurrentDensity ? "A/m^2" : "A/m^3";
}

std::string name_of(ScalarQuantity q) {
  switch (q) {
    case ScalarQuantity::Potential: return "potential";
    case ScalarQuantity::JoulePower: return "joule_power";
    case ScalarQuantity::SpeedOfJ: return "current_speed";
    case ScalarQuantity::Divergence: return "divergence";
  }
  return "";
}

std::string name_of(VectorQuantity q) {
  return q == VectorQuantity::CurrentDensity ? "current_density" : "grad_current_speed";
}

DirichletSet dirichlet_from(const MazeSpec& spec) {
  return {spec.electrode_cells(Polarity::Positive), spec.electrode_cells(Polarity::Negative),
          spec.applied_voltage};
}

PotentialSolution solve_potential(int nx, int ny, double cell_size_mm, std::span<const double> sigma,
                                  const DirichletSet& el, const SolverSettings& settings) {
  const std::size_t n = static_cast<std::size_t>(nx) * ny;
  if (nx <= 0 || ny <= 0 || sigma.size() != n) throw DimensionError("conductivity grid does not match dimensions");
  if (!(settings.tolerance > 0.0)) throw std::invalid_argument("solver tolerance must be positive");
  if (el.positive.empty() || el.negative.empty()) throw SolverError("both electrode sets must be non-empty");
  for (double s : sigma) {
    if (!(s >= 0.0) || !std::isfinite(s)) throw std::invalid_argument("conductivity must be finite and non-negative");
  }
  auto idx = [nx](int x, int y) { return static_cast<std::size_t>(y) * nx + x; };

  std::vector<Role> role(n, Role::Insulator);
  for (std::size_t i = 0; i < n; ++i) role[i] = sigma[i] > 0.0 ? Role::Floating : Role::Insulator;
  for (const auto& c : el.positive) {
    if (c.x < 0 || c.y < 0 || c.x >= nx || c.y >= ny) throw SolverError("electrode cell outside grid");
    role[idx(c.x, c.y)] = Role::Positive;
  }
  for (const auto& c : el.negative) {
    if (c.x < 0 || c.y < 0 || c.x >= nx || c.y >= ny) throw SolverError("electrode cell outside grid");
    if (role[idx(c.x, c.y)] == Role::Positive) throw SolverError("electrode sets overlap");
    role[idx(c.x, c.y)] = Role::Negative;
  }

  // Conducting cells reachable from an electrode become unknowns; the rest float.
  bool connected = false;
  {
    std::vector<std::uint8_t> seen_from_pos(n, 0);
    std::queue<std::size_t> q;
    for (const auto& c : el.positive) {
      if (sigma[idx(c.x, c.y)] > 0.0 && !seen_from_pos[idx(c.x, c.y)]) {
        seen_from_pos[idx(c.x, c.y)] = 1;
        q.push(idx(c.x, c.y));
      }
    }
    auto flood = [&](std::vector<std::uint8_t>& seen, Role target) {
      while (!q.empty()) {
        const std::size_t i = q.front();
        q.pop();
        const int x = static_cast<int>(i % nx);
        const int y = static_cast<int>(i / nx);
        for (int d = 0; d < 4; ++d) {
          const int ax = x + kDx[d];
          const int ay = y + kDy[d];
          if (ax < 0 || ay < 0 || ax >= nx || ay >= ny) continue;
          const std::size_t j = idx(ax, ay);
          if (seen[j] || face_sigma(sigma[i], sigma[j]) <= 0.0) continue;
          seen[j] = 1;
          if (role[j] == target) connected = true;
          if (role[j] == Role::Floating || role[j] == Role::Unknown) q.push(j);
        }
      }
    };
    flood(seen_from_pos, Role::Negative);
    std::vector<std::uint8_t> seen_from_neg(n, 0);
    for (const auto& c : el.negative) {
      if (sigma[idx(c.x, c.y)] > 0.0 && !seen_from_neg[idx(c.x, c.y)]) {
        seen_from_neg[idx(c.x, c.y)] = 1;
        q.push(idx(c.x, c.y));
      }
    }
    flood(seen_from_neg, Role::Positive);
    for (std::size_t i = 0; i < n; ++i) {
      if (role[i] == Role::Floating && (seen_from_pos[i] || seen_from_neg[i])) role[i] = Role::Unknown;
    }
  }
  if (!connected) throw SolverError("electrodes are not connected: total current would be zero");

  std::vector<int> unknown_of(n, -1);
  std::vector<std::size_t> cell_of;
  for (std::size_t i = 0; i < n; ++i) {
    if (role[i] == Role::Unknown) {
      unknown_of[i] = static_cast<int>(cell_of.size());
      cell_of.push_back(i);
    }
  }
  const std::size_t m = cell_of.size();

  GridOperator op;
  op.diag.assign(m, 0.0);
  op.nbr.assign(m, {-1, -1, -1, -1});
  op.coef.assign(m, {0.0, 0.0, 0.0, 0.0});
  std::vector<double> b(m, 0.0);
  for (std::size_t k = 0; k < m; ++k) {
    const std::size_t i = cell_of[k];
    const int x = static_cast<int>(i % nx);
    const int y = static_cast<int>(i / nx);
    for (int d = 0; d < 4; ++d) {
      const int ax = x + kDx[d];
      const int ay = y + kDy[d];
      if (ax < 0 || ay < 0 || ax >= nx || ay >= ny) continue;
      const std::size_t j = idx(ax, ay);
      const double g = face_sigma(sigma[i], sigma[j]);
      if (g <= 0.0) continue;
      op.diag[k] += g;
      if (role[j] == Role::Unknown) {
        op.nbr[k][d] = unknown_of[j];
        op.coef[k][d] = g;
      } else if (role[j] == Role::Positive) {
        b[k] += g * el.voltage;
      }
    }
  }

  const int max_iter = settings.max_iterations > 0 ? settings.max_iterations : 50 * std::max(nx, ny);
  std::vector<double> x(m, 0.0);
  SolveReport report;
  report.tolerance = settings.tolerance;
  const double b_norm = std::sqrt(dot(b, b));
  if (m == 0 || b_norm == 0.0) {
    report.converged = true;
  } else {
    // Initial guess: linear interpolation is not available on a general maze,
    // so start from the mid-voltage which keeps the first residual bounded.
    std::fill(x.begin(), x.end(), 0.5 * el.voltage);
    std::vector<double> r(m), z(m), p(m), ap(m);
    op.apply(x, ap);
    for (std::size_t k = 0; k < m; ++k) r[k] = b[k] - ap[k];
    for (std::size_t k = 0; k < m; ++k) z[k] = r[k] / op.diag[k];
    p = z;
    double rz = dot(r, z);
    double res = std::sqrt(dot(r, r)) / b_norm;
    int it = 0;
    while (res > settings.tolerance && it < max_iter) {
      op.apply(p, ap);
      const double pap = dot(p, ap);
      if (!(pap > 0.0)) break;
      const double alpha = rz / pap;
      for (std::size_t k = 0; k < m; ++k) {
        x[k] += alpha * p[k];
        r[k] -= alpha * ap[k];
      }
      ++it;
      res = std::sqrt(dot(r, r)) / b_norm;
      if (res <= settings.tolerance) break;
      for (std::size_t k = 0; k < m; ++k) z[k] = r[k] / op.diag[k];
      const double rz_next = dot(r, z);
      const double beta = rz_next / rz;
      rz = rz_next;
      for (std::size_t k = 0; k < m; ++k) p[k] = z[k] + beta * p[k];
    }
    // Report the true residual rather than the recursively updated one.
    op.apply(x, ap);
    double rr = 0.0;
    for (std::size_t k = 0; k < m; ++k) rr += (b[k] - ap[k]) * (b[k] - ap[k]);
    report.iterations = it;
    report.final_residual = std::sqrt(rr) / b_norm;
    report.converged = report.final_residual <= settings.tolerance;
  }

  PotentialSolution sol{ScalarField(nx, ny, cell_size_mm, ScalarQuantity::Potential), report};
  for (std::size_t k = 0; k < m; ++k) sol.potential.values[cell_of[k]] = x[k];
  for (const auto& c : el.positive) sol.potential.values[idx(c.x, c.y)] = el.voltage;

  // Electrode currents from face fluxes (A per metre of depth).
  for (std::size_t i = 0; i < n; ++i) {
    if (role[i] != Role::Positive && role[i] != Role::Negative) continue;
    const int cx = static_cast<int>(i % nx);
    const int cy = static_cast<int>(i / nx);
    for (int d = 0; d < 4; ++d) {
      const int ax = cx + kDx[d];
      const int ay = cy + kDy[d];
      if (ax < 0 || ay < 0 || ax >= nx || ay >= ny) continue;
      const std::size_t j = idx(ax, ay);
      if (role[j] == role[i]) continue;
      const double g = face_sigma(sigma[i], sigma[j]);
      if (g <= 0.0) continue;
      const double flow = g * (sol.potential.values[i] - sol.potential.values[j]);
      if (role[i] == Role::Positive) sol.report.current_in += flow;
      else sol.report.current_out -= flow;
    }
  }
  if (sol.report.converged && !(sol.report.current_in > 0.0))
    throw SolverError("singular system: zero total current between electrodes");
  return sol;
}

PotentialSolution solve_potential(const MazeSpec& spec, const SolverSettings& settings) {
  const auto sigma = conductivity_grid(spec);
  return solve_potential(spec.nx, spec.ny, spec.cell_size_mm, sigma, dirichlet_from(spec), settings);
}

}  // namespace lmaze
