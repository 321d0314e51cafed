#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "nonclassical/engine.hpp"
#include "nonclassical/reference.hpp"

namespace nonclassical::cli {

enum class Command { Curves, Simulate, Reference, Compare };

std::string_view to_string(Command command);
Command parse_command(std::string_view name);

/// Which deterministic solution `compare` scores the tally against.
enum class OracleKind {
  Auto,         // diffusion closed form, first flight if c = 0, else solver
  Diffusion,    // closed-form diffusion point source
  FirstFlight,  // uncollided density; exact only for c = 0
  Integral,     // radial source iteration
};

std::string_view to_string(OracleKind kind);
OracleKind parse_oracle_kind(std::string_view name);

struct CurveGrid {
  double s_min = 0.0;
  double s_max = 6.0;
  std::size_t points = 601;
};

enum ExitCode : int {
  kExitOk = 0,
  kExitConfigError = 1,
  kExitCompareFail = 2,
  kExitInternalFault = 3,
};

struct RunManifest {
  Command command = Command::Simulate;
  ProblemConfig problem;
  std::filesystem::path out_dir = "out";
  CurveGrid curves;
  OracleKind oracle = OracleKind::Auto;
  /// Model used by the oracle; defaults to the simulated model. Setting a
  /// different one gives a negative control.
  std::optional<ModelKind> oracle_model;
  std::size_t grid_points = kDefaultGridPoints;
  double grid_radius = kDefaultGridRadius;  // mean free paths
  double tolerance = kDefaultSolverTolerance;

  /// Throws ConfigError. Creates out_dir if missing and checks it is
  /// writable.
  void validate() const;
};

/// Overlays keys present in `config` onto `base`. Unknown keys are rejected.
///
/// Keys: model, sigma_t, sigma_s, histories, batches, seed, rmax, shells,
/// capture, workers, out, oracle, oracle_model, grid_points, grid_radius,
/// tolerance, curves {s_min, s_max, points}.
RunManifest apply_config(RunManifest base, const nlohmann::json& config);

RunManifest load_config_file(RunManifest base,
                             const std::filesystem::path& path);

/// Thrown by parse_arguments for --help; carries the usage text.
class HelpRequested : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parses argv into a manifest: config file first, then flag overrides.
/// Throws ConfigError on bad usage.
RunManifest parse_arguments(int argc, const char* const* argv);

/// Comma-separated table with `#`-prefixed metadata lines and a header row.
struct CsvTable {
  std::vector<std::string> metadata;  // without the leading "# "
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

/// Numbers are written with 9 significant digits.
std::string format_number(double value);
void write_csv(const std::filesystem::path& path, const CsvTable& table);
CsvTable read_csv(const std::filesystem::path& path);

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CompareVerdict {
  std::size_t populated_shells = 0;  // n_scores >= kMinScores
  std::size_t over_3_sigma = 0;
  std::size_t over_5_sigma = 0;
  double max_abs_z = 0.0;
  bool pass = false;
};

inline constexpr std::uint64_t kMinScores = 100;

/// PASS iff at most 1% of populated shells have |z| > 3 and none has
/// |z| > 5.
CompareVerdict judge(const std::vector<ShellEstimate>& shells,
                     const std::vector<double>& oracle);

/// Volume-averaged oracle density for each shell of the tally grid.
std::vector<double> oracle_shell_averages(const RunManifest& manifest,
                                          const std::vector<double>& edges);

int cmd_curves(const RunManifest& manifest, std::ostream& log);
int cmd_simulate(const RunManifest& manifest, std::ostream& log);
int cmd_reference(const RunManifest& manifest, std::ostream& log);
int cmd_compare(const RunManifest& manifest, std::ostream& log);

/// Dispatches on manifest.command.
int run(const RunManifest& manifest, std::ostream& log);

/// Full entry point: parsing, dispatch and exit-code mapping.
int main_entry(int argc, const char* const* argv, std::ostream& out,
               std::ostream& err);

}  // namespace nonclassical::cli
