#include <chrono>
#include <cmath>
#include <fstream>
#include <ostream>

#include <fmt/core.h>
#include <fmt/ostream.h>

#include "nonclassical/cli.hpp"

namespace nonclassical::cli {

namespace {

std::vector<std::string> problem_metadata(const ProblemConfig& p) {
  return {
      fmt::format("model={}", to_string(p.model)),
      fmt::format("sigma_t={}", format_number(p.sigma_t)),
      fmt::format("sigma_s={}", format_number(p.sigma_s)),
      fmt::format("histories={}", p.histories),
      fmt::format("batches={}", p.batches),
      fmt::format("seed={}", p.seed),
      fmt::format("capture={}", to_string(p.capture)),
      fmt::format("rmax={}", format_number(p.r_max)),
      fmt::format("shells={}", p.shells),
  };
}

std::string estimate_text(const Estimate& e) {
  return fmt::format("{} +/- {}", format_number(e.value),
                     format_number(e.std_error));
}

ModelKind oracle_model_of(const RunManifest& m) {
  return m.oracle_model.value_or(m.problem.model);
}

OracleKind resolve_oracle(const RunManifest& m) {
  if (m.oracle != OracleKind::Auto) return m.oracle;
  if (oracle_model_of(m) == ModelKind::Diffusion) return OracleKind::Diffusion;
  if (m.problem.sigma_s == 0.0) return OracleKind::FirstFlight;
  return OracleKind::Integral;
}

RadialGrid oracle_grid(const RunManifest& m) {
  const double radius =
      std::max(m.grid_radius / m.problem.sigma_t, m.problem.r_max);
  return RadialGrid::uniform(radius, m.grid_points);
}

}  // namespace

int cmd_curves(const RunManifest& m, std::ostream& log) {
  const CrossSections xs(m.problem.sigma_t, m.problem.sigma_s);
  std::vector<PathLengthModel> models;
  for (ModelKind k : kAllModels) models.push_back(make_model(k, xs));

  const std::vector<std::string> header{"s", "classical", "diffusion", "sp2",
                                        "sp3"};
  struct Curve {
    const char* name;
    double (*eval)(const PathLengthModel&, double);
  };
  const Curve curves[] = {
      {"hazard",
       [](const PathLengthModel& p, double s) {
         return s > 0.0 ? p.hazard(s) : p.hazard_at_zero_limit();
       }},
      {"density", [](const PathLengthModel& p, double s) { return p.density(s); }},
      {"cdf", [](const PathLengthModel& p, double s) { return p.cdf(s); }},
  };

  const auto n = m.curves.points;
  for (const auto& curve : curves) {
    CsvTable table;
    table.metadata = {
        fmt::format("quantity={}", curve.name),
        fmt::format("sigma_t={}", format_number(xs.sigma_t())),
        fmt::format("sp2_atom_at_zero={}",
                    format_number(models[2].atom_at_zero())),
    };
    if (std::string_view(curve.name) == "hazard") {
      table.metadata.push_back("s=0 row holds the right limit of the continuous part");
    }
    table.header = header;
    for (std::size_t i = 0; i < n; ++i) {
      const double s = m.curves.s_min + (m.curves.s_max - m.curves.s_min) *
                                            static_cast<double>(i) /
                                            static_cast<double>(n - 1);
      std::vector<double> row{s};
      for (const auto& p : models) row.push_back(curve.eval(p, s));
      table.rows.push_back(std::move(row));
    }
    const auto path = m.out_dir / (std::string(curve.name) + ".csv");
    write_csv(path, table);
    fmt::print(log, "wrote {}\n", path.string());
  }
  return kExitOk;
}

int cmd_simulate(const RunManifest& m, std::ostream& log) {
  const auto start = std::chrono::steady_clock::now();
  const TallyResult result = simulate(m.problem);
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();

  CsvTable table;
  table.metadata = problem_metadata(m.problem);
  table.metadata.push_back(fmt::format("collisions_per_history={}",
                                       estimate_text(result.collisions_per_history)));
  table.header = {"r_lo", "r_hi", "f_mean", "f_stderr", "n_scores"};
  for (const auto& s : result.shells) {
    table.rows.push_back({s.r_lo, s.r_hi, s.mean, s.std_error,
                          static_cast<double>(s.n_scores)});
  }
  const auto path = m.out_dir / "tally.csv";
  write_csv(path, table);

  const std::string summary = fmt::format(
      "model: {}\n"
      "histories: {}\n"
      "batches: {}\n"
      "seed: {}\n"
      "collisions/history: {}\n"
      "absorbed weight/history: {}\n"
      "zero-length flight fraction: {}\n"
      "first-flight <s^2>: {}\n"
      "faults: {}\n"
      "capped histories: {}\n"
      "wall time [s]: {:.3f}\n",
      to_string(m.problem.model), m.problem.histories, m.problem.batches,
      m.problem.seed, estimate_text(result.collisions_per_history),
      estimate_text(result.absorbed_per_history),
      estimate_text(result.zero_length_fraction),
      estimate_text(result.first_flight_second_moment), result.faults,
      result.capped, seconds);
  {
    std::ofstream f(m.out_dir / "summary.txt");
    if (!(f << summary)) {
      throw IoError(fmt::format("cannot write '{}'",
                                (m.out_dir / "summary.txt").string()));
    }
  }
  fmt::print(log, "wrote {}\n{}", path.string(), summary);
  return result.faults == 0 ? kExitOk : kExitInternalFault;
}

int cmd_reference(const RunManifest& m, std::ostream& log) {
  const CrossSections xs(m.problem.sigma_t, m.problem.sigma_s);
  const PathLengthModel model = make_model(oracle_model_of(m), xs);
  const IntegralSolution sol =
      solve_integral_equation(model, oracle_grid(m), m.tolerance);
  const double residual = fixed_point_residual(sol, model);

  CsvTable nodes;
  nodes.metadata = {
      fmt::format("model={}", to_string(model.kind())),
      fmt::format("sigma_t={}", format_number(xs.sigma_t())),
      fmt::format("sigma_s={}", format_number(xs.sigma_s())),
      fmt::format("origin_mass={}", format_number(sol.origin_mass)),
      fmt::format("iterations={}", sol.iterations),
      fmt::format("relative_change={}", format_number(sol.last_change)),
      fmt::format("residual={}", format_number(residual)),
      fmt::format("total_collision_rate={}",
                  format_number(total_collision_rate(sol, model))),
  };
  nodes.header = {"r", "f", "f_first_flight", "f_scattered"};
  for (std::size_t j = 0; j < sol.grid.nodes.size(); ++j) {
    nodes.rows.push_back({sol.grid.nodes[j], sol.density(j),
                          sol.source_strength * sol.first_flight[j],
                          sol.scattered[j]});
  }
  const auto node_path = m.out_dir / "reference.csv";
  write_csv(node_path, nodes);

  const ShellTally shells =
      ShellTally::uniform(m.problem.r_max, m.problem.shells, 1);
  CsvTable shell_table;
  shell_table.metadata = nodes.metadata;
  shell_table.header = {"r_lo", "r_hi", "f_oracle"};
  for (std::size_t k = 0; k < shells.shells(); ++k) {
    const double lo = shells.edges()[k], hi = shells.edges()[k + 1];
    shell_table.rows.push_back({lo, hi, shell_average(sol, model, lo, hi)});
  }
  const auto shell_path = m.out_dir / "reference_shells.csv";
  write_csv(shell_path, shell_table);

  fmt::print(log,
             "wrote {} and {}\niterations: {}\nresidual: {}\n"
             "total collision rate: {}\n",
             node_path.string(), shell_path.string(), sol.iterations,
             format_number(residual),
             format_number(total_collision_rate(sol, model)));
  return kExitOk;
}

std::vector<double> oracle_shell_averages(const RunManifest& m,
                                          const std::vector<double>& edges) {
  const CrossSections xs(m.problem.sigma_t, m.problem.sigma_s);
  const PathLengthModel model = make_model(oracle_model_of(m), xs);
  std::vector<double> out(edges.size() - 1);
  switch (resolve_oracle(m)) {
    case OracleKind::Diffusion:
      for (std::size_t k = 0; k < out.size(); ++k) {
        out[k] = diffusion_shell_average(xs, edges[k], edges[k + 1]);
      }
      break;
    case OracleKind::FirstFlight:
      for (std::size_t k = 0; k < out.size(); ++k) {
        out[k] = first_flight_shell_average(model, edges[k], edges[k + 1]);
      }
      break;
    case OracleKind::Integral:
    case OracleKind::Auto: {
      const IntegralSolution sol =
          solve_integral_equation(model, oracle_grid(m), m.tolerance);
      for (std::size_t k = 0; k < out.size(); ++k) {
        out[k] = shell_average(sol, model, edges[k], edges[k + 1]);
      }
      break;
    }
  }
  return out;
}

CompareVerdict judge(const std::vector<ShellEstimate>& shells,
                     const std::vector<double>& oracle) {
  CompareVerdict v;
  for (std::size_t k = 0; k < shells.size(); ++k) {
    const auto& s = shells[k];
    if (s.n_scores < kMinScores || !(s.std_error > 0.0)) continue;
    ++v.populated_shells;
    const double z = std::abs(s.mean - oracle[k]) / s.std_error;
    v.max_abs_z = std::max(v.max_abs_z, z);
    if (z > 3.0) ++v.over_3_sigma;
    if (z > 5.0) ++v.over_5_sigma;
  }
  v.pass = v.populated_shells > 0 && v.over_5_sigma == 0 &&
           static_cast<double>(v.over_3_sigma) <=
               0.01 * static_cast<double>(v.populated_shells);
  return v;
}

int cmd_compare(const RunManifest& m, std::ostream& log) {
  const TallyResult result = simulate(m.problem);
  std::vector<double> edges;
  for (const auto& s : result.shells) edges.push_back(s.r_lo);
  edges.push_back(result.shells.back().r_hi);
  const std::vector<double> oracle = oracle_shell_averages(m, edges);
  const CompareVerdict verdict = judge(result.shells, oracle);

  CsvTable table;
  table.metadata = problem_metadata(m.problem);
  table.metadata.push_back(fmt::format("oracle={}", to_string(resolve_oracle(m))));
  table.metadata.push_back(
      fmt::format("oracle_model={}", to_string(oracle_model_of(m))));
  table.metadata.push_back(fmt::format(
      "verdict={} populated_shells={} over_3_sigma={} over_5_sigma={} "
      "max_abs_z={}",
      verdict.pass ? "PASS" : "FAIL", verdict.populated_shells,
      verdict.over_3_sigma, verdict.over_5_sigma,
      format_number(verdict.max_abs_z)));
  table.header = {"r_mid", "f_mc", "stderr", "f_oracle", "z_score"};
  for (std::size_t k = 0; k < result.shells.size(); ++k) {
    const auto& s = result.shells[k];
    const double z =
        s.std_error > 0.0 ? (s.mean - oracle[k]) / s.std_error : 0.0;
    table.rows.push_back(
        {0.5 * (s.r_lo + s.r_hi), s.mean, s.std_error, oracle[k], z});
  }
  const auto path = m.out_dir / "compare.csv";
  write_csv(path, table);

  fmt::print(log,
             "wrote {}\noracle: {} ({})\npopulated shells: {}\n|z|>3: {}\n"
             "|z|>5: {}\nmax |z|: {}\nverdict: {}\n",
             path.string(), to_string(resolve_oracle(m)),
             to_string(oracle_model_of(m)), verdict.populated_shells,
             verdict.over_3_sigma, verdict.over_5_sigma,
             format_number(verdict.max_abs_z), verdict.pass ? "PASS" : "FAIL");
  if (result.faults > 0) return kExitInternalFault;
  return verdict.pass ? kExitOk : kExitCompareFail;
}

int run(const RunManifest& m, std::ostream& log) {
  switch (m.command) {
    case Command::Curves:
      return cmd_curves(m, log);
    case Command::Simulate:
      return cmd_simulate(m, log);
    case Command::Reference:
      return cmd_reference(m, log);
    case Command::Compare:
      return cmd_compare(m, log);
  }
  return kExitInternalFault;
}

int main_entry(int argc, const char* const* argv, std::ostream& out,
               std::ostream& err) {
  RunManifest manifest;
  try {
    manifest = parse_arguments(argc, argv);
    manifest.validate();
  } catch (const HelpRequested& help) {
    out << help.what();
    return kExitOk;
  } catch (const std::invalid_argument& e) {
    fmt::print(err, "configuration error: {}\n", e.what());
    return kExitConfigError;
  }
  try {
    return run(manifest, out);
  } catch (const ConfigError& e) {
    fmt::print(err, "configuration error: {}\n", e.what());
    return kExitConfigError;
  } catch (const ConvergenceError& e) {
    fmt::print(err,
               "oracle failed: {} (iterations={}, relative change={:.3e})\n",
               e.what(), e.iterations(), e.change());
    return kExitInternalFault;
  } catch (const std::exception& e) {
    fmt::print(err, "internal fault: {}\n", e.what());
    return kExitInternalFault;
  }
}

}  // namespace nonclassical::cli
