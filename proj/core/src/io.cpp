#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "lmaze/io.hpp"

namespace lmaze {

namespace {

void append_row(std::string& out, std::initializer_list<double> values) {
  bool first = true;
  for (double v : values) {
    if (!first) out += ',';
    out += format_number(v);
    first = false;
  }
  out += '\n';
}

double cell_center(int i, double h) { return (i + 0.5) * h; }

void check_renderable(int nx, int ny, std::size_t size) {
  if (nx <= 0 || ny <= 0) throw IoError("cannot render a zero-area field");
  if (static_cast<std::size_t>(nx) * ny != size) throw DimensionError("field dimensions do not match");
}

struct Range {
  double lo = 0.0;
  double hi = 0.0;
};

template <class Get>
Range finite_range(std::size_t n, Get&& get) {
  Range r{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (std::size_t i = 0; i < n; ++i) {
    const double v = get(i);
    if (!std::isfinite(v)) throw IoError("cannot render a non-finite field value");
    r.lo = std::min(r.lo, v);
    r.hi = std::max(r.hi, v);
  }
  return r;
}

std::uint8_t level(double v, Range r, int top) {
  if (!(r.hi > r.lo)) return static_cast<std::uint8_t>((top + 1) / 2);
  const double t = (v - r.lo) / (r.hi - r.lo);
  return static_cast<std::uint8_t>(std::lround(std::clamp(t, 0.0, 1.0) * top));
}

void fill_cell(GrayImage& img, int x, int y, int scale, std::uint8_t g) {
  for (int py = y * scale; py < (y + 1) * scale; ++py)
    for (int px = x * scale; px < (x + 1) * scale; ++px) img.at(px, py) = g;
}

void draw_line(GrayImage& img, double x0, double y0, double x1, double y1, std::uint8_t g) {
  const int n = static_cast<int>(std::ceil(std::max(std::abs(x1 - x0), std::abs(y1 - y0)))) + 1;
  for (int k = 0; k <= n; ++k) {
    const double t = static_cast<double>(k) / n;
    const int px = static_cast<int>(std::lround(x0 + t * (x1 - x0)));
    const int py = static_cast<int>(std::lround(y0 + t * (y1 - y0)));
    if (px >= 0 && py >= 0 && px < img.width && py < img.height) img.at(px, py) = g;
  }
}

}  // namespace

std::string format_number(double v) {
  if (v == 0.0) v = 0.0;  // drop the sign of negative zero
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string scalar_field_csv(const ScalarField& field) {
  std::string out = "x_mm,y_mm,value\n";
  const double h = field.cell_size_mm;
  for (int y = 0; y < field.ny; ++y)
    for (int x = 0; x < field.nx; ++x) append_row(out, {cell_center(x, h), cell_center(y, h), field(x, y)});
  return out;
}

std::string vector_field_csv(const VectorField& field) {
  std::string out = "x_mm,y_mm,vx,vy,magnitude\n";
  const double h = field.cell_size_mm;
  for (int y = 0; y < field.ny; ++y) {
    for (int x = 0; x < field.nx; ++x) {
      const Vec2 v = field.values[field.index(x, y)];
      append_row(out, {cell_center(x, h), cell_center(y, h), v.x, v.y, norm(v)});
    }
  }
  return out;
}

std::string trajectory_csv(const Trajectory& traj) {
  std::string out = "t_s,x_mm,y_mm,speed_mm_s,force_mag\n";
  for (const auto& s : traj.samples) append_row(out, {s.t, s.position.x, s.position.y, s.speed, s.force_magnitude});
  return out;
}

std::string path_csv(const Path& path) {
  std::string out = "step,x,y,x_mm,y_mm\n";
  const double h = path.cell_size_mm;
  for (std::size_t i = 0; i < path.cells.size(); ++i) {
    const Cell c = path.cells[i];
    append_row(out, {static_cast<double>(i), static_cast<double>(c.x), static_cast<double>(c.y), cell_center(c.x, h),
                     cell_center(c.y, h)});
  }
  return out;
}

std::size_t CsvTable::column(const std::string& name) const {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw IoError("CSV has no column '" + name + "'");
  return static_cast<std::size_t>(it - header.begin());
}

CsvTable parse_csv(const std::string& text) {
  CsvTable t;
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line.empty()) throw IoError("CSV is missing its header");
  {
    std::istringstream hs(line);
    std::string name;
    while (std::getline(hs, name, ',')) t.header.push_back(name);
  }
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) throw IoError("CSV line " + std::to_string(lineno) + " is empty");
    std::vector<double> row;
    std::size_t start = 0;
    while (true) {
      const std::size_t end = std::min(line.find(',', start), line.size());
      double v = 0.0;
      const char* first = line.data() + start;
      const char* last = line.data() + end;
      const auto res = std::from_chars(first, last, v);
      if (res.ec != std::errc() || res.ptr != last)
        throw IoError("CSV line " + std::to_string(lineno) + ": bad number '" + std::string(first, last) + "'");
      row.push_back(v);
      if (end == line.size()) break;
      start = end + 1;
    }
    if (row.size() != t.header.size())
      throw IoError("CSV line " + std::to_string(lineno) + " has " + std::to_string(row.size()) + " fields, expected " +
                    std::to_string(t.header.size()));
    t.rows.push_back(std::move(row));
  }
  return t;
}

CsvTable read_csv(const std::filesystem::path& path) {
  try {
    return parse_csv(read_text(path));
  } catch (const IoError& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

namespace {

struct GridIndex {
  int nx = 0;
  int ny = 0;
  std::vector<std::size_t> cell;  // per row
};

GridIndex index_rows(const CsvTable& table, double cell_size_mm) {
  if (!(cell_size_mm > 0.0)) throw IoError("cell size must be positive");
  const std::size_t cx = table.column("x_mm");
  const std::size_t cy = table.column("y_mm");
  auto to_index = [&](double mm) { return static_cast<int>(std::floor(mm / cell_size_mm)); };
  GridIndex g;
  for (const auto& r : table.rows) {
    if (r[cx] < 0.0 || r[cy] < 0.0) throw IoError("CSV has negative coordinates");
    g.nx = std::max(g.nx, to_index(r[cx]) + 1);
    g.ny = std::max(g.ny, to_index(r[cy]) + 1);
  }
  if (table.rows.empty() || static_cast<std::size_t>(g.nx) * g.ny != table.rows.size())
    throw IoError("CSV does not cover a full grid at this cell size");
  std::vector<std::uint8_t> seen(table.rows.size(), 0);
  for (const auto& r : table.rows) {
    const std::size_t i = static_cast<std::size_t>(to_index(r[cy])) * g.nx + to_index(r[cx]);
    if (seen[i]++) throw IoError("CSV lists a cell twice");
    g.cell.push_back(i);
  }
  return g;
}

}  // namespace

ScalarField scalar_field_from_csv(const CsvTable& table, double cell_size_mm, ScalarQuantity quantity) {
  const GridIndex g = index_rows(table, cell_size_mm);
  const std::size_t cv = table.header.size() == 3 ? table.column("value") : table.column("magnitude");
  ScalarField f(g.nx, g.ny, cell_size_mm, quantity);
  for (std::size_t k = 0; k < table.rows.size(); ++k) f.values[g.cell[k]] = table.rows[k][cv];
  return f;
}

VectorField vector_field_from_csv(const CsvTable& table, double cell_size_mm, VectorQuantity quantity) {
  const GridIndex g = index_rows(table, cell_size_mm);
  const std::size_t cx = table.column("vx");
  const std::size_t cy = table.column("vy");
  VectorField f(g.nx, g.ny, cell_size_mm, quantity);
  for (std::size_t k = 0; k < table.rows.size(); ++k) {
    const Vec2 v{table.rows[k][cx], table.rows[k][cy]};
    f.values[g.cell[k]] = v;
    f.active[g.cell[k]] = norm(v) > 0.0;
  }
  return f;
}

double csv_cell_size(const CsvTable& table) {
  const std::size_t cx = table.column("x_mm");
  const std::size_t cy = table.column("y_mm");
  double m = std::numeric_limits<double>::infinity();
  for (const auto& r : table.rows) m = std::min({m, r[cx], r[cy]});
  if (!(m > 0.0) || !std::isfinite(m)) throw IoError("CSV coordinates are not cell centres");
  return 2.0 * m;
}

GrayImage render_gray(const ScalarField& field, int scale) {
  check_renderable(field.nx, field.ny, field.values.size());
  if (scale < 1) throw IoError("scale must be at least 1");
  const Range r = finite_range(field.values.size(), [&](std::size_t i) { return field.values[i]; });
  GrayImage img{field.nx * scale, field.ny * scale, {}};
  img.pixels.assign(static_cast<std::size_t>(img.width) * img.height, 0);
  for (int y = 0; y < field.ny; ++y)
    for (int x = 0; x < field.nx; ++x) fill_cell(img, x, y, scale, level(field(x, y), r, 255));
  return img;
}

GrayImage render_vectors(const VectorField& field, int scale, int stride) {
  check_renderable(field.nx, field.ny, field.values.size());
  if (scale < 1 || stride < 1) throw IoError("scale and stride must be at least 1");
  const Range r = finite_range(field.values.size(), [&](std::size_t i) { return norm(field.values[i]); });
  GrayImage img{field.nx * scale, field.ny * scale, {}};
  img.pixels.assign(static_cast<std::size_t>(img.width) * img.height, 0);
  for (int y = 0; y < field.ny; ++y)
    for (int x = 0; x < field.nx; ++x) fill_cell(img, x, y, scale, level(norm(field.values[field.index(x, y)]), r, 191));
  if (!(r.hi > 0.0)) return img;
  const double max_len = 0.8 * stride * scale;  // strokes stay inside their own block
  for (int y = stride / 2; y < field.ny; y += stride) {
    for (int x = stride / 2; x < field.nx; x += stride) {
      const Vec2 v = field.values[field.index(x, y)];
      const double m = norm(v);
      if (!(m > 0.0)) continue;
      const double len = max_len * m / r.hi;
      // Anchor on a pixel centre so near-axis strokes do not straddle rows.
      const double cx = x * scale + scale / 2;
      const double cy = y * scale + scale / 2;
      const Vec2 d = (0.5 * len / m) * v;
      draw_line(img, cx - d.x, cy - d.y, cx + d.x, cy + d.y, 255);
    }
  }
  return img;
}

GrayImage render_on_maze(const ScalarField& field, const MazeSpec& maze, int scale) {
  check_renderable(field.nx, field.ny, field.values.size());
  if (maze.nx != field.nx || maze.ny != field.ny) throw DimensionError("maze does not match field");
  if (scale < 1) throw IoError("scale must be at least 1");
  Range r{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (std::size_t i = 0; i < field.values.size(); ++i) {
    if (maze.cells[i] != CellKind::Channel) continue;
    if (!std::isfinite(field.values[i])) throw IoError("cannot render a non-finite field value");
    r.lo = std::min(r.lo, field.values[i]);
    r.hi = std::max(r.hi, field.values[i]);
  }
  GrayImage img{field.nx * scale, field.ny * scale, {}};
  img.pixels.assign(static_cast<std::size_t>(img.width) * img.height, 0);
  for (int y = 0; y < field.ny; ++y) {
    for (int x = 0; x < field.nx; ++x) {
      std::uint8_t g = 0;
      switch (maze.at(x, y)) {
        case CellKind::Channel: g = static_cast<std::uint8_t>(32 + level(field(x, y), r, 223)); break;
        case CellKind::CoatedWall: g = 16; break;
        case CellKind::Wall: g = 0; break;
      }
      fill_cell(img, x, y, scale, g);
    }
  }
  return img;
}

GrayImage render_trace(const MazeSpec& maze, const Trajectory& traj, int scale, int every) {
  check_renderable(maze.nx, maze.ny, maze.cells.size());
  if (scale < 1 || every < 1) throw IoError("scale and sampling must be at least 1");
  GrayImage img{maze.nx * scale, maze.ny * scale, {}};
  img.pixels.assign(static_cast<std::size_t>(img.width) * img.height, 0);
  for (int y = 0; y < maze.ny; ++y) {
    for (int x = 0; x < maze.nx; ++x) {
      const CellKind k = maze.at(x, y);
      fill_cell(img, x, y, scale, k == CellKind::Channel ? 255 : k == CellKind::CoatedWall ? 96 : 0);
    }
  }
  const double px_per_mm = scale / maze.cell_size_mm;
  for (std::size_t i = 0; i < traj.samples.size(); i += static_cast<std::size_t>(every)) {
    const Vec2 p = traj.samples[i].position;
    const int cx = static_cast<int>(std::floor(p.x * px_per_mm));
    const int cy = static_cast<int>(std::floor(p.y * px_per_mm));
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx) {
        const int x = cx + dx;
        const int y = cy + dy;
        if (x >= 0 && y >= 0 && x < img.width && y < img.height) img.at(x, y) = 128;
      }
  }
  return img;
}

std::string encode_pgm(const GrayImage& image) {
  if (image.width <= 0 || image.height <= 0) throw IoError("cannot encode an empty image");
  std::string out = "P5\n" + std::to_string(image.width) + " " + std::to_string(image.height) + "\n255\n";
  out.append(reinterpret_cast<const char*>(image.pixels.data()), image.pixels.size());
  return out;
}

GrayImage decode_pgm(const std::string& bytes) {
  std::istringstream in(bytes);
  std::string magic;
  GrayImage img;
  int maxval = 0;
  in >> magic >> img.width >> img.height >> maxval;
  if (!in || magic != "P5" || maxval != 255 || img.width <= 0 || img.height <= 0) throw IoError("not an 8-bit P5 PGM");
  in.get();
  const auto offset = static_cast<std::size_t>(in.tellg());
  const std::size_t n = static_cast<std::size_t>(img.width) * img.height;
  if (bytes.size() != offset + n) throw IoError("PGM pixel data has the wrong size");
  img.pixels.assign(bytes.begin() + static_cast<std::ptrdiff_t>(offset), bytes.end());
  return img;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string() + ": cannot open for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(path.string() + ": cannot open for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw IoError(path.string() + ": write failed");
}

}  // namespace lmaze
