// acdyn: command-line driver for scenario runs and verification harnesses.
//
// Exit codes: 0 success, 1 a harness check failed, 2 validation failure,
// 3 solver failure.

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "acdyn/density.hpp"
#include "acdyn/diagnostics.hpp"
#include "acdyn/io.hpp"
#include "acdyn/scenario.hpp"
#include "acdyn/stepper.hpp"

namespace fs = std::filesystem;
using namespace acdyn;

namespace {

constexpr int kOk = 0;
constexpr int kCheckFailed = 1;
constexpr int kInvalid = 2;
constexpr int kSolverFailed = 3;

fs::path output_dir(const Scenario& s, const std::string& override_dir) {
  fs::path dir = override_dir.empty() ? fs::path(s.output.dir) : fs::path(override_dir);
  fs::create_directories(dir);
  return dir;
}

int cmd_validate(const std::string& path) {
  const Scenario s = load_scenario(path);
  const auto issues = validate(s);
  for (const auto& i : issues) std::cerr << i.label << ": " << i.message << '\n';
  if (!issues.empty()) return kInvalid;
  std::cout << "valid\n";
  return kOk;
}

int cmd_run(const std::string& path, const std::string& out) {
  const Scenario s = load_scenario(path);
  const Built b = build_validated(s);
  const fs::path dir = output_dir(s, out);
  const Trajectory traj = run(b.problem, b.u0, b.f);
  io::write_series(dir / "series.csv", traj);
  const int every = s.output.snapshot_every;
  const int last = static_cast<int>(traj.size()) - 1;
  for (int n = 0; n <= last; ++n) {
    if (every > 0 && (n % every == 0 || n == last)) {
      const std::string name = io::snapshot_name(n);
      io::write_snapshot(dir / (name + ".csv"), dir / (name + "_gamma.csv"), b.problem.sys.domain, traj[n].u);
    }
  }
  std::cout << "steps " << last << ", final energy " << traj.back().energy << ", final mass " << traj.back().k
            << "\n";
  return kOk;
}

int cmd_sweep(const std::string& path, const std::vector<double>& eps, const std::string& out) {
  const Scenario s = load_scenario(path);
  const Built b = build_validated(s);
  const fs::path dir = output_dir(s, out);
  const EpsSweep sw = eps_sweep(b.problem, b.u0, b.f, eps);
  io::write_eps_table(dir / "eps_table.csv", sw);
  io::write_bounds(dir / "bounds.csv", sw.monitors);
  for (std::size_t j = 0; j < sw.d.size(); ++j)
    std::cout << "eps " << sw.eps[j] << " -> " << sw.eps[j + 1] << ": d = " << sw.d[j] << '\n';
  bool ok = sw.strictly_decreasing();
  for (const auto& v : check_bounded(sw.monitors)) {
    if (!v.pass) std::cout << "bound monitor " << v.column << " grows: max " << v.max << ", median " << v.median << '\n';
    ok = ok && v.pass;
  }
  std::cout << (ok ? "sweep checks pass" : "sweep checks FAIL") << '\n';
  return ok ? kOk : kCheckFailed;
}

int cmd_check_cd(const std::string& path1, const std::string& path2, const std::string& out) {
  const Scenario s1 = load_scenario(path1), s2 = load_scenario(path2);
  if (!same_except_data(s1, s2))
    throw ValidationError("config", "scenarios differ outside the data block");
  const Built b1 = build_validated(s1);
  const Built b2 = build_validated(s2);
  const fs::path dir = output_dir(s1, out);
  const DependenceReport rep = continuous_dependence(b1.problem, b1.u0, b1.f, b2.u0, b2.f);
  io::write_cd_report(dir / "cd_report.csv", rep);
  std::cout << "constant " << rep.constant << ", max ratio " << rep.max_ratio << "; per-step factor " << rep.q
            << ", max discrete ratio " << rep.max_ratio_discrete << '\n';
  return rep.max_ratio <= 1.0 ? kOk : kCheckFailed;
}

int cmd_density(const std::string& path, const std::vector<int>& n_list, const std::string& out) {
  const Scenario s = load_scenario(path);
  const Built b = build(s);
  const fs::path dir = output_dir(s, out);
  const DensityRun r = density_study(b.problem.sys, b.u0, n_list);
  io::write_density(dir / "density.csv", r);
  for (const auto& e : r.entries)
    std::cout << "n " << e.n << ": |v-u|_H " << e.err_bulk << ", |v_G-u_G| " << e.err_bnd << '\n';
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Allen-Cahn with dynamic boundary conditions and a mass constraint"};
  app.require_subcommand(1);
  std::string scenario, scenario2, out;
  std::vector<double> eps;
  std::vector<int> n_list{1, 4, 16, 64, 256};

  auto* validate_cmd = app.add_subcommand("validate", "Check a scenario against the model assumptions");
  validate_cmd->add_option("scenario", scenario, "Scenario JSON")->required()->check(CLI::ExistingFile);

  auto* run_cmd = app.add_subcommand("run", "Run a scenario; write series.csv and snapshots");
  run_cmd->add_option("scenario", scenario, "Scenario JSON")->required()->check(CLI::ExistingFile);
  run_cmd->add_option("--out", out, "Output directory (overrides the scenario)");

  auto* sweep_cmd = app.add_subcommand("sweep-eps", "Run an eps sweep; write eps_table.csv and bounds.csv");
  sweep_cmd->add_option("scenario", scenario, "Scenario JSON")->required()->check(CLI::ExistingFile);
  sweep_cmd->add_option("--eps", eps, "Strictly decreasing eps values")->required()->delimiter(',');
  sweep_cmd->add_option("--out", out, "Output directory (overrides the scenario)");

  auto* cd_cmd = app.add_subcommand("check-cd", "Continuous-dependence check; write cd_report.csv");
  cd_cmd->add_option("scenario1", scenario, "First scenario JSON")->required()->check(CLI::ExistingFile);
  cd_cmd->add_option("scenario2", scenario2, "Second scenario JSON")->required()->check(CLI::ExistingFile);
  cd_cmd->add_option("--out", out, "Output directory (overrides the first scenario)");

  auto* density_cmd = app.add_subcommand("density-demo", "Robin approximation study; write density.csv");
  density_cmd->add_option("scenario", scenario, "Scenario JSON (u0 and u0_gamma give the pair)")
      ->required()
      ->check(CLI::ExistingFile);
  density_cmd->add_option("--n", n_list, "Increasing list of n")->delimiter(',');
  density_cmd->add_option("--out", out, "Output directory (overrides the scenario)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kInvalid;
  }

  try {
    if (*validate_cmd) return cmd_validate(scenario);
    if (*run_cmd) return cmd_run(scenario, out);
    if (*sweep_cmd) return cmd_sweep(scenario, eps, out);
    if (*cd_cmd) return cmd_check_cd(scenario, scenario2, out);
    if (*density_cmd) return cmd_density(scenario, n_list, out);
  } catch (const ValidationError& e) {
    std::cerr << e.label() << ": " << e.what() << '\n';
    return kInvalid;
  } catch (const SolverError& e) {
    std::cerr << "solver failure: " << e.what() << '\n';
    return kSolverFailed;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config: " << e.what() << '\n';
    return kInvalid;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kSolverFailed;
  }
  return kOk;
}
