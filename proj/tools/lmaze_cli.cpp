#include <algorithm>
#include <atomic>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "lmaze/io.hpp"
#include "lmaze/scenario.hpp"

namespace fs = std::filesystem;
using namespace lmaze;

namespace {

struct Common {
  std::vector<std::string> configs;
  std::string out;
  std::optional<std::uint64_t> seed;
  int jobs = 1;
};

void add_common(CLI::App* cmd, Common& c, bool many) {
  if (many)
    cmd->add_option("--config", c.configs, "Scenario config file (repeat for a batch)")->required();
  else
    cmd->add_option("--config", c.configs, "Scenario config file")->required()->expected(1);
  cmd->add_option("--out", c.out, "Output directory (overrides the config's 'output')");
  cmd->add_option("--seed", c.seed, "Generator and noise seed (overrides the config)");
  if (many) cmd->add_option("--jobs", c.jobs, "Scenarios to run concurrently")->check(CLI::PositiveNumber);
}

// Maps an exception to its exit code and prints it.
int report_error(std::ostream& os, const std::string& where, std::exception_ptr e) {
  try {
    std::rethrow_exception(e);
  } catch (const ConfigError& x) {
    os << where << ": config error: " << x.what() << "\n";
    return kExitConfig;
  } catch (const MazeError& x) {
    os << where << ": maze error: " << x.what() << "\n";
    return kExitMaze;
  } catch (const DynamicsError& x) {
    os << where << ": maze error: " << x.what() << "\n";
    return kExitMaze;
  } catch (const UnreachableError& x) {
    os << where << ": maze error: " << x.what() << "\n";
    return kExitMaze;
  } catch (const SolverError& x) {
    os << where << ": solver error: " << x.what() << "\n";
    return kExitSolver;
  } catch (const IoError& x) {
    os << where << ": i/o error: " << x.what() << "\n";
    return kExitIo;
  } catch (const fs::filesystem_error& x) {
    os << where << ": i/o error: " << x.what() << "\n";
    return kExitIo;
  } catch (const std::exception& x) {
    os << where << ": error: " << x.what() << "\n";
    return kExitInternal;
  }
}

ScenarioConfig prepare(const std::string& path, const Common& c, bool batch) {
  ScenarioConfig cfg = load_config(path);
  if (c.seed) {
    cfg.seed = *c.seed;
    if (!cfg.noise_seed_set) cfg.dynamics.noise_seed = *c.seed;
  }
  if (!c.out.empty()) cfg.output_dir = batch ? fs::path(c.out) / fs::path(path).stem() : fs::path(c.out);
  if (cfg.output_dir.empty()) throw ConfigError(path + ": no output directory (set 'output' or pass --out)");
  return cfg;
}

std::string summary_line(const std::string& name, const ScenarioResult& r, Stage stage) {
  std::ostringstream s;
  s << name << ": solve " << r.solve.iterations << " it, I=" << format_number(r.solve.current_in) << " A/m";
  if (stage != Stage::Solve) s << "; path " << r.path.length_cells() << " cells";
  if (stage == Stage::Full) {
    s << "; " << to_string(r.trajectory.termination) << " after " << r.trajectory.samples.size() - 1 << " steps"
      << ", corridor sequence " << (r.comparison.corridor_sequence_equal ? "equal" : "differs");
    if (r.sensitivity.parameter_sensitive) s << " (parameter-sensitive)";
  }
  return s.str();
}

int run_batch(const Common& c, Stage stage, const std::set<std::string>& extra) {
  const bool batch = c.configs.size() > 1;
  const std::size_t n = c.configs.size();
  std::vector<int> codes(n, kExitInternal);
  std::vector<std::string> lines(n);
  std::vector<std::string> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      const std::string& path = c.configs[i];
      try {
        ScenarioConfig cfg = prepare(path, c, batch);
        cfg.artifacts.insert(extra.begin(), extra.end());
        const ScenarioResult r = run_scenario(cfg, stage);
        export_bundle(r, utc_timestamp(), stage);
        lines[i] = summary_line(path, r, stage);
        codes[i] = stage == Stage::Full ? r.exit_code : kExitReachedTarget;
      } catch (...) {
        std::ostringstream err;
        codes[i] = report_error(err, path, std::current_exception());
        errors[i] = err.str();
      }
    }
  };
  const int jobs = std::max(1, std::min<int>(c.jobs, static_cast<int>(n)));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  int code = kExitReachedTarget;
  for (std::size_t i = 0; i < n; ++i) {
    if (!lines[i].empty()) std::cout << lines[i] << "\n";
    if (!errors[i].empty()) std::cerr << errors[i];
    if (code == kExitReachedTarget) code = codes[i];
  }
  return code;
}

int cmd_compare(const std::string& a, const std::string& b, const std::string& out) {
  auto load = [](const std::string& dir) {
    const fs::path p = fs::path(dir) / "report.json";
    try {
      return nlohmann::ordered_json::parse(read_text(p));
    } catch (const nlohmann::json::exception& e) {
      throw IoError(p.string() + ": " + e.what());
    }
  };
  const auto ra = load(a);
  const auto rb = load(b);
  auto corner = [](const nlohmann::ordered_json& r, const char* key) {
    if (!r.contains("corner_force") || !r["corner_force"].contains(key))
      throw IoError(std::string("report has no corner_force.") + key);
    return r["corner_force"][key].get<double>();
  };
  nlohmann::ordered_json j;
  j["a"] = a;
  j["b"] = b;
  for (const char* key : {"max_force", "max_disk_mean_j", "max_disk_mean_grad_speed_j"}) {
    const double va = corner(ra, key);
    const double vb = corner(rb, key);
    j[key] = {{"a", va}, {"b", vb}, {"b_minus_a", vb - va}, {"b_over_a", va != 0.0 ? vb / va : 0.0}};
  }
  j["b_lower"] = corner(rb, "max_force") < corner(ra, "max_force");
  for (const auto* r : {&ra, &rb}) {
    if (r->contains("trajectory")) {
      j[r == &ra ? "a_termination" : "b_termination"] = (*r)["trajectory"]["termination"];
    }
  }
  const std::string text = j.dump(2) + "\n";
  if (out.empty()) {
    std::cout << text;
  } else {
    fs::create_directories(out);
    write_text(fs::path(out) / "edge_study.json", text);
    std::cout << "corner force " << format_number(corner(ra, "max_force")) << " -> "
              << format_number(corner(rb, "max_force")) << "\n";
  }
  return kExitReachedTarget;
}

int cmd_generate(const Common& c) {
  ScenarioConfig cfg = load_config(c.configs.front());
  if (c.seed) cfg.seed = *c.seed;
  const MazeSpec maze = build_maze(cfg);
  const std::string text = emit_maze(maze);
  if (c.out.empty()) {
    std::cout << text;
  } else {
    fs::create_directories(c.out);
    const fs::path p = fs::path(c.out) / "maze.txt";
    write_text(p, text);
    std::cout << p.string() << ": " << maze.nx << "x" << maze.ny << " cells\n";
  }
  return kExitReachedTarget;
}

int cmd_render(const std::string& input, const std::string& output, const std::string& style, int scale, int stride) {
  const CsvTable t = read_csv(input);
  const double h = csv_cell_size(t);
  GrayImage img;
  const bool vector = std::find(t.header.begin(), t.header.end(), "vx") != t.header.end();
  if (style == "arrows") {
    if (!vector) throw IoError(input + ": arrows need a vector field CSV");
    img = render_vectors(vector_field_from_csv(t, h, VectorQuantity::CurrentDensity), scale, stride);
  } else {
    img = render_gray(scalar_field_from_csv(t, h, ScalarQuantity::Potential), scale);
  }
  const fs::path out(output);
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  write_text(out, encode_pgm(img));
  std::cout << output << ": " << img.width << "x" << img.height << "\n";
  return kExitReachedTarget;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Liquid-metal droplet maze solver: fields, droplet dynamics and shortest-path oracles"};
  app.set_version_flag("--version", version_string());
  app.require_subcommand(1);

  Common solve_opts;
  Common sim_opts;
  Common oracle_opts;
  Common gen_opts;
  auto* solve = app.add_subcommand("solve", "Solve the potential and write field files");
  add_common(solve, solve_opts, true);
  auto* simulate = app.add_subcommand("simulate", "Full pipeline: fields, droplet, oracle, comparison");
  add_common(simulate, sim_opts, true);
  auto* oracle = app.add_subcommand("oracle", "Lee path and streamline only");
  add_common(oracle, oracle_opts, true);
  auto* generate = app.add_subcommand("generate", "Write the configured maze as a maze file");
  add_common(generate, gen_opts, false);

  std::string cmp_a;
  std::string cmp_b;
  std::string cmp_out;
  auto* compare = app.add_subcommand("compare", "Compare corner forces of two bundles (a = insulated, b = coated)");
  compare->add_option("bundle_a", cmp_a, "First bundle directory")->required();
  compare->add_option("bundle_b", cmp_b, "Second bundle directory")->required();
  compare->add_option("--out", cmp_out, "Directory for edge_study.json (stdout if omitted)");

  std::string r_in;
  std::string r_out;
  std::string r_style = "gray";
  int r_scale = 2;
  int r_stride = 4;
  auto* render = app.add_subcommand("render", "Render a field CSV to an 8-bit PGM");
  render->add_option("field", r_in, "potential.csv or current.csv")->required();
  render->add_option("--out", r_out, "Output .pgm file")->required();
  render->add_option("--style", r_style, "gray or arrows")->check(CLI::IsMember({"gray", "arrows"}));
  render->add_option("--scale", r_scale, "Pixels per cell")->check(CLI::PositiveNumber);
  render->add_option("--stride", r_stride, "Cells between arrows")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  try {
    if (*solve) return run_batch(solve_opts, Stage::Solve, {});
    if (*simulate) return run_batch(sim_opts, Stage::Full, {});
    if (*oracle) return run_batch(oracle_opts, Stage::Oracle, {"streamline"});
    if (*generate) return cmd_generate(gen_opts);
    if (*compare) return cmd_compare(cmp_a, cmp_b, cmp_out);
    if (*render) return cmd_render(r_in, r_out, r_style, r_scale, r_stride);
  } catch (...) {
    return report_error(std::cerr, "lmaze", std::current_exception());
  }
  return kExitInternal;
}
