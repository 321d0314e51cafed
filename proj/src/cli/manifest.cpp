#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>

#include <CLI11.hpp>
#include <fmt/core.h>

#include "nonclassical/cli.hpp"

namespace nonclassical::cli {

namespace {

std::string lowercase(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return out;
}

template <typename T>
T get_key(const nlohmann::json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(fmt::format("config key '{}': {}", key, e.what()));
  }
}

}  // namespace

std::string_view to_string(Command command) {
  switch (command) {
    case Command::Curves:
      return "curves";
    case Command::Simulate:
      return "simulate";
    case Command::Reference:
      return "reference";
    case Command::Compare:
      return "compare";
  }
  return "unknown";
}

Command parse_command(std::string_view name) {
  const std::string lower = lowercase(name);
  for (Command c : {Command::Curves, Command::Simulate, Command::Reference,
                    Command::Compare}) {
    if (lower == to_string(c)) return c;
  }
  throw ConfigError(fmt::format(
      "unknown command '{}' (expected curves, simulate, reference or compare)",
      name));
}

std::string_view to_string(OracleKind kind) {
  switch (kind) {
    case OracleKind::Auto:
      return "auto";
    case OracleKind::Diffusion:
      return "diffusion";
    case OracleKind::FirstFlight:
      return "first-flight";
    case OracleKind::Integral:
      return "integral";
  }
  return "unknown";
}

OracleKind parse_oracle_kind(std::string_view name) {
  const std::string lower = lowercase(name);
  for (OracleKind k : {OracleKind::Auto, OracleKind::Diffusion,
                       OracleKind::FirstFlight, OracleKind::Integral}) {
    if (lower == to_string(k)) return k;
  }
  throw ConfigError(fmt::format(
      "unknown oracle '{}' (expected auto, diffusion, first-flight or integral)",
      name));
}

void RunManifest::validate() const {
  problem.validate();
  if (command == Command::Curves) {
    if (curves.points < 2) {
      throw ConfigError(
          fmt::format("curve grid needs >= 2 points, got {}", curves.points));
    }
    if (!(curves.s_min >= 0.0) || !(curves.s_max > curves.s_min)) {
      throw ConfigError(fmt::format(
          "curve grid needs s_max > s_min >= 0, got [{}, {}]", curves.s_min,
          curves.s_max));
    }
  }
  if (grid_points < 256) {
    throw ConfigError(
        fmt::format("grid_points must be >= 256, got {}", grid_points));
  }
  if (!(grid_radius >= 12.0)) {
    throw ConfigError(fmt::format(
        "grid_radius must be >= 12 mean free paths, got {}", grid_radius));
  }
  if (!(tolerance > 0.0 && tolerance < 1.0)) {
    throw ConfigError(fmt::format("tolerance must be in (0, 1), got {}", tolerance));
  }

  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec || !std::filesystem::is_directory(out_dir)) {
    throw ConfigError(fmt::format("output directory '{}' cannot be created: {}",
                                  out_dir.string(), ec.message()));
  }
  const auto probe = out_dir / ".write_probe";
  {
    std::ofstream f(probe);
    if (!f) {
      throw ConfigError(fmt::format("output directory '{}' is not writable",
                                    out_dir.string()));
    }
  }
  std::filesystem::remove(probe, ec);
}

RunManifest apply_config(RunManifest m, const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  static const std::set<std::string> known{
      "command",     "model",       "sigma_t",     "sigma_s",  "histories",
      "batches",     "seed",        "rmax",        "shells",   "capture",
      "workers",     "out",         "oracle",      "oracle_model",
      "grid_points", "grid_radius", "tolerance",   "curves"};
  for (const auto& [key, value] : j.items()) {
    if (!known.contains(key)) {
      throw ConfigError(fmt::format("unknown config key '{}'", key));
    }
  }
  auto& p = m.problem;
  try {
    if (j.contains("command")) m.command = parse_command(get_key<std::string>(j, "command"));
    if (j.contains("model")) p.model = parse_model_kind(get_key<std::string>(j, "model"));
    if (j.contains("capture")) p.capture = parse_capture_mode(get_key<std::string>(j, "capture"));
    if (j.contains("oracle")) m.oracle = parse_oracle_kind(get_key<std::string>(j, "oracle"));
    if (j.contains("oracle_model")) {
      m.oracle_model = parse_model_kind(get_key<std::string>(j, "oracle_model"));
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (j.contains("sigma_t")) p.sigma_t = get_key<double>(j, "sigma_t");
  if (j.contains("sigma_s")) p.sigma_s = get_key<double>(j, "sigma_s");
  if (j.contains("histories")) p.histories = get_key<std::uint64_t>(j, "histories");
  if (j.contains("batches")) p.batches = get_key<std::uint64_t>(j, "batches");
  if (j.contains("seed")) p.seed = get_key<std::uint64_t>(j, "seed");
  if (j.contains("rmax")) p.r_max = get_key<double>(j, "rmax");
  if (j.contains("shells")) p.shells = get_key<std::size_t>(j, "shells");
  if (j.contains("workers")) p.workers = get_key<unsigned>(j, "workers");
  if (j.contains("out")) m.out_dir = get_key<std::string>(j, "out");
  if (j.contains("grid_points")) m.grid_points = get_key<std::size_t>(j, "grid_points");
  if (j.contains("grid_radius")) m.grid_radius = get_key<double>(j, "grid_radius");
  if (j.contains("tolerance")) m.tolerance = get_key<double>(j, "tolerance");
  if (j.contains("curves")) {
    const auto& c = j.at("curves");
    if (!c.is_object()) throw ConfigError("config key 'curves' must be an object");
    for (const auto& [key, value] : c.items()) {
      if (key != "s_min" && key != "s_max" && key != "points") {
        throw ConfigError(fmt::format("unknown config key 'curves.{}'", key));
      }
    }
    if (c.contains("s_min")) m.curves.s_min = get_key<double>(c, "s_min");
    if (c.contains("s_max")) m.curves.s_max = get_key<double>(c, "s_max");
    if (c.contains("points")) m.curves.points = get_key<std::size_t>(c, "points");
  }
  return m;
}

RunManifest load_config_file(RunManifest base,
                             const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError(fmt::format("cannot read config file '{}'", path.string()));
  }
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(
        fmt::format("config file '{}': {}", path.string(), e.what()));
  }
  return apply_config(std::move(base), j);
}

RunManifest parse_arguments(int argc, const char* const* argv) {
  CLI::App app{
      "Monte Carlo transport with non-exponential distance-to-collision laws",
      "nonclassical-mc"};
  std::string command;
  std::string config_path;
  std::string model, capture, oracle, oracle_model, out;
  double sigma_t = 0, sigma_s = 0, rmax = 0, s_min = 0, s_max = 0;
  double tolerance = 0, grid_radius = 0;
  std::uint64_t histories = 0, batches = 0, seed = 0;
  std::size_t shells = 0, points = 0, grid_points = 0;
  unsigned workers = 0;

  app.add_option("command", command, "curves | simulate | reference | compare")
      ->required();
  app.add_option("--config", config_path, "JSON run configuration");
  auto* o_model = app.add_option("--model", model, "classical | diffusion | sp2 | sp3");
  auto* o_st = app.add_option("--sigma-t", sigma_t, "total cross section");
  auto* o_ss = app.add_option("--sigma-s", sigma_s, "scattering cross section");
  auto* o_hist = app.add_option("--histories", histories, "number of histories");
  auto* o_batch = app.add_option("--batches", batches, "number of batches");
  auto* o_seed = app.add_option("--seed", seed, "random seed");
  auto* o_rmax = app.add_option("--rmax", rmax, "outer tally radius");
  auto* o_shells = app.add_option("--shells", shells, "number of radial shells");
  auto* o_out = app.add_option("--out", out, "output directory");
  auto* o_capture = app.add_option("--capture", capture, "analog | implicit");
  auto* o_workers = app.add_option("--workers", workers, "worker threads");
  auto* o_oracle = app.add_option("--oracle", oracle,
                                  "auto | diffusion | first-flight | integral");
  auto* o_omodel = app.add_option("--oracle-model", oracle_model,
                                  "model used by the oracle");
  auto* o_smin = app.add_option("--s-min", s_min, "curve grid start");
  auto* o_smax = app.add_option("--s-max", s_max, "curve grid end");
  auto* o_points = app.add_option("--points", points, "curve grid points");
  auto* o_gpts = app.add_option("--grid-points", grid_points, "oracle radial nodes");
  auto* o_grad = app.add_option("--grid-radius", grid_radius,
                                "oracle grid radius in mean free paths");
  auto* o_tol = app.add_option("--tolerance", tolerance, "oracle tolerance");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    throw HelpRequested(app.help());
  } catch (const CLI::ParseError& e) {
    throw ConfigError(e.what());
  }

  RunManifest m;
  if (!config_path.empty()) m = load_config_file(std::move(m), config_path);
  m.command = parse_command(command);

  auto& p = m.problem;
  try {
    if (o_model->count()) p.model = parse_model_kind(model);
    if (o_capture->count()) p.capture = parse_capture_mode(capture);
    if (o_omodel->count()) m.oracle_model = parse_model_kind(oracle_model);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (o_st->count()) p.sigma_t = sigma_t;
  if (o_ss->count()) p.sigma_s = sigma_s;
  if (o_hist->count()) p.histories = histories;
  if (o_batch->count()) p.batches = batches;
  if (o_seed->count()) p.seed = seed;
  if (o_rmax->count()) p.r_max = rmax;
  if (o_shells->count()) p.shells = shells;
  if (o_workers->count()) p.workers = workers;
  if (o_out->count()) m.out_dir = out;
  if (o_oracle->count()) m.oracle = parse_oracle_kind(oracle);
  if (o_smin->count()) m.curves.s_min = s_min;
  if (o_smax->count()) m.curves.s_max = s_max;
  if (o_points->count()) m.curves.points = points;
  if (o_gpts->count()) m.grid_points = grid_points;
  if (o_grad->count()) m.grid_radius = grid_radius;
  if (o_tol->count()) m.tolerance = tolerance;
  return m;
}

}  // namespace nonclassical::cli
