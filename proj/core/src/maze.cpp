#include "lmaze/maze.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <queue>
#include <sstream>

namespace lmaze {

MazeError::MazeError(const std::string& what, int line, int column)
    : std::runtime_error(line > 0 ? what + " (line " + std::to_string(line) + ", column " +
                                        std::to_string(column) + ")"
                                  : what),
      line_(line),
      column_(column) {}

std::vector<Cell> MazeSpec::electrode_cells(Polarity p) const {
  std::vector<Cell> out;
  for (const auto& e : electrodes) {
    if (e.polarity == p) out.insert(out.end(), e.cells.begin(), e.cells.end());
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

void validate(const MazeSpec& spec) {
  if (spec.nx <= 0 || spec.ny <= 0) throw MazeError("grid dimensions must be positive");
  if (spec.cells.size() != static_cast<std::size_t>(spec.nx) * spec.ny)
    throw MazeError("cell array does not match grid dimensions");
  if (!(spec.cell_size_mm > 0.0) || !std::isfinite(spec.cell_size_mm))
    throw MazeError("cell_size_mm must be positive");
  if (!(spec.applied_voltage > 0.0) || !std::isfinite(spec.applied_voltage))
    throw MazeError("voltage must be positive");
  if (!(spec.sigma_wall >= 0.0)) throw MazeError("sigma_wall must be non-negative");
  if (!(spec.sigma_electrolyte > spec.sigma_wall))
    throw MazeError("sigma_electrolyte must exceed sigma_wall");
  const bool coated = std::find(spec.cells.begin(), spec.cells.end(), CellKind::CoatedWall) !=
                      spec.cells.end();
  if (coated && !(spec.sigma_coating > spec.sigma_electrolyte))
    throw MazeError("sigma_coating must exceed sigma_electrolyte when coated walls exist");

  bool has_pos = false;
  bool has_neg = false;
  std::vector<int> owner(spec.cells.size(), -1);
  for (std::size_t e = 0; e < spec.electrodes.size(); ++e) {
    const auto& el = spec.electrodes[e];
    if (el.cells.empty()) throw MazeError("electrode " + el.id + " has no cells");
    for (const auto& c : el.cells) {
      if (!spec.inside(c.x, c.y)) throw MazeError("electrode " + el.id + " lies outside the grid");
      if (spec.at(c) != CellKind::Channel)
        throw MazeError("electrode " + el.id + " placed on a wall cell", c.y + 1, c.x + 1);
      auto& o = owner[spec.index(c)];
      if (o >= 0 && o != static_cast<int>(e))
        throw MazeError("electrodes " + spec.electrodes[o].id + " and " + el.id + " overlap");
      o = static_cast<int>(e);
    }
    (el.polarity == Polarity::Positive ? has_pos : has_neg) = true;
  }
  if (!has_pos) throw MazeError("no positive electrode");
  if (!has_neg) throw MazeError("no negative electrode");
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

double parse_number(std::string_view v, int line, int column) {
  double out = 0.0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(out))
    throw MazeError("invalid number '" + std::string(v) + "'", line, column);
  return out;
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace

MazeSpec parse_maze(std::string_view text) {
  std::vector<std::string_view> lines;
  {
    std::size_t pos = 0;
    while (pos <= text.size()) {
      auto nl = text.find('\n', pos);
      if (nl == std::string_view::npos) {
        if (pos < text.size()) lines.push_back(text.substr(pos));
        break;
      }
      lines.push_back(text.substr(pos, nl - pos));
      pos = nl + 1;
    }
  }

  MazeSpec spec;
  std::size_t i = 0;
  // Optional header: key = value lines terminated by a blank line.
  const bool has_header = !lines.empty() && lines[0].find('=') != std::string_view::npos;
  if (has_header) {
    std::map<std::string, bool> seen;
    for (; i < lines.size(); ++i) {
      const int line_no = static_cast<int>(i) + 1;
      auto line = trim(lines[i]);
      if (line.empty()) {
        ++i;
        break;
      }
      if (line.front() == '#' && line.find('=') == std::string_view::npos)
        throw MazeError("header must be separated from the grid by a blank line", line_no, 1);
      if (lines[i].find('\t') != std::string_view::npos)
        throw MazeError("tab characters are not allowed", line_no,
                        static_cast<int>(lines[i].find('\t')) + 1);
      auto eq = line.find('=');
      if (eq == std::string_view::npos) throw MazeError("expected 'key = value'", line_no, 1);
      std::string key(trim(line.substr(0, eq)));
      auto value = trim(line.substr(eq + 1));
      const int value_col = static_cast<int>(lines[i].find('=')) + 2;
      if (value.empty()) throw MazeError("missing value for parameter '" + key + "'", line_no, value_col);
      if (seen[key]) throw MazeError("duplicate parameter '" + key + "'", line_no, 1);
      seen[key] = true;
      const double v = parse_number(value, line_no, value_col);
      if (key == "cell_size_mm") spec.cell_size_mm = v;
      else if (key == "sigma_electrolyte") spec.sigma_electrolyte = v;
      else if (key == "sigma_wall") spec.sigma_wall = v;
      else if (key == "sigma_coating") spec.sigma_coating = v;
      else if (key == "voltage") spec.applied_voltage = v;
      else throw MazeError("unknown parameter '" + key + "'", line_no, 1);
    }
  }

  std::vector<std::string_view> grid;
  const std::size_t grid_start = i;
  for (; i < lines.size(); ++i) {
    auto line = lines[i];
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) {
      // Trailing blank lines are tolerated; blank lines inside the grid are not.
      for (std::size_t k = i; k < lines.size(); ++k) {
        if (!trim(lines[k]).empty())
          throw MazeError("blank line inside the grid", static_cast<int>(i) + 1, 1);
      }
      break;
    }
    grid.push_back(line);
  }
  if (grid.empty()) throw MazeError("maze grid is empty", static_cast<int>(grid_start) + 1, 1);

  spec.nx = static_cast<int>(grid.front().size());
  spec.ny = static_cast<int>(grid.size());
  spec.cells.assign(static_cast<std::size_t>(spec.nx) * spec.ny, CellKind::Wall);
  Electrode pos{"E1", Polarity::Positive, {}};
  Electrode neg{"E2", Polarity::Negative, {}};
  for (int y = 0; y < spec.ny; ++y) {
    const int line_no = static_cast<int>(grid_start) + y + 1;
    const auto row = grid[y];
    if (static_cast<int>(row.size()) != spec.nx)
      throw MazeError("grid lines must have equal length", line_no,
                      std::min<int>(static_cast<int>(row.size()), spec.nx) + 1);
    for (int x = 0; x < spec.nx; ++x) {
      CellKind k;
      switch (row[x]) {
        case '#': k = CellKind::Wall; break;
        case '+': k = CellKind::CoatedWall; break;
        case '.': k = CellKind::Channel; break;
        case 'S': k = CellKind::Channel; pos.cells.push_back({x, y}); break;
        case 'T': k = CellKind::Channel; neg.cells.push_back({x, y}); break;
        case '\t': throw MazeError("tab characters are not allowed", line_no, x + 1);
        default:
          throw MazeError(std::string("unknown glyph '") + row[x] + "'", line_no, x + 1);
      }
      spec.cells[spec.index(x, y)] = k;
    }
  }
  std::sort(pos.cells.begin(), pos.cells.end());
  std::sort(neg.cells.begin(), neg.cells.end());
  if (!pos.cells.empty()) spec.electrodes.push_back(std::move(pos));
  if (!neg.cells.empty()) spec.electrodes.push_back(std::move(neg));
  validate(spec);
  return spec;
}

MazeSpec load_maze(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MazeError("cannot open maze file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_maze(ss.str());
}

std::string emit_maze(const MazeSpec& spec) {
  std::string out;
  out += "cell_size_mm = " + format_double(spec.cell_size_mm) + "\n";
  out += "sigma_electrolyte = " + format_double(spec.sigma_electrolyte) + "\n";
  out += "sigma_wall = " + format_double(spec.sigma_wall) + "\n";
  out += "sigma_coating = " + format_double(spec.sigma_coating) + "\n";
  out += "voltage = " + format_double(spec.applied_voltage) + "\n\n";
  std::vector<char> glyph(spec.cells.size());
  for (std::size_t i = 0; i < spec.cells.size(); ++i) {
    glyph[i] = spec.cells[i] == CellKind::Wall ? '#' : spec.cells[i] == CellKind::CoatedWall ? '+' : '.';
  }
  for (const auto& e : spec.electrodes) {
    for (const auto& c : e.cells) glyph[spec.index(c)] = e.polarity == Polarity::Positive ? 'S' : 'T';
  }
  for (int y = 0; y < spec.ny; ++y) {
    out.append(glyph.data() + spec.index(0, y), spec.nx);
    out += '\n';
  }
  return out;
}

ConnectivityReport validate_and_components(const MazeSpec& spec) {
  ConnectivityReport rep;
  rep.component.assign(spec.cells.size(), -1);
  constexpr int dx[4] = {1, 0, -1, 0};
  constexpr int dy[4] = {0, -1, 0, 1};
  for (int y = 0; y < spec.ny; ++y) {
    for (int x = 0; x < spec.nx; ++x) {
      if (!spec.is_channel(x, y) || rep.component[spec.index(x, y)] >= 0) continue;
      const int id = rep.component_count++;
      std::queue<Cell> q;
      q.push({x, y});
      rep.component[spec.index(x, y)] = id;
      while (!q.empty()) {
        const Cell c = q.front();
        q.pop();
        for (int d = 0; d < 4; ++d) {
          const int ax = c.x + dx[d];
          const int ay = c.y + dy[d];
          if (!spec.is_channel(ax, ay) || rep.component[spec.index(ax, ay)] >= 0) continue;
          rep.component[spec.index(ax, ay)] = id;
          q.push({ax, ay});
        }
      }
    }
  }
  std::vector<bool> has_pos(rep.component_count, false);
  std::vector<bool> has_neg(rep.component_count, false);
  for (const auto& e : spec.electrodes) {
    for (const auto& c : e.cells) {
      const int id = rep.component[spec.index(c)];
      if (id < 0) continue;
      (e.polarity == Polarity::Positive ? has_pos : has_neg)[id] = true;
    }
  }
  for (int k = 0; k < rep.component_count; ++k) rep.solvable = rep.solvable || (has_pos[k] && has_neg[k]);
  return rep;
}

std::vector<double> conductivity_grid(const MazeSpec& spec) {
  std::vector<double> sigma(spec.cells.size());
  std::transform(spec.cells.begin(), spec.cells.end(), sigma.begin(), [&](CellKind k) {
    switch (k) {
      case CellKind::Channel: return spec.sigma_electrolyte;
      case CellKind::Wall: return spec.sigma_wall;
      case CellKind::CoatedWall: return spec.sigma_coating;
    }
    return 0.0;
  });
  return sigma;
}

std::vector<Cell> convex_wall_corners(const MazeSpec& spec) {
  auto open = [&](int x, int y) { return spec.is_channel(x, y); };
  std::vector<Cell> out;
  for (int y = 0; y < spec.ny; ++y) {
    for (int x = 0; x < spec.nx; ++x) {
      if (spec.at(x, y) == CellKind::Channel) continue;
      bool corner = false;
      for (int sx : {-1, 1}) {
        for (int sy : {-1, 1}) {
          corner = corner || (open(x + sx, y) && open(x, y + sy) && open(x + sx, y + sy));
        }
      }
      if (corner) out.push_back({x, y});
    }
  }
  return out;
}

MazeSpec coat_corners(const MazeSpec& spec) {
  MazeSpec out = spec;
  for (const auto& c : convex_wall_corners(spec)) out.cells[out.index(c)] = CellKind::CoatedWall;
  return out;
}

}  // namespace lmaze
