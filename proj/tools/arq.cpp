// Command-line runner: solve, sweep, verify, bounds.
#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "arq/errors.hpp"
#include "arq/harness.hpp"

namespace {

struct Flags {
  std::string problem, noise, eps, config, out, certificate, eps_grid;
  int dim = 0, p = 0, q = 0, jobs = 0, seeds = 0;
  long long seed = -1;
};

void add_common(CLI::App* cmd, Flags& f) {
  cmd->add_option("--problem", f.problem, "quadratic, rosenbrock, quartic or sine");
  cmd->add_option("--dim", f.dim, "problem dimension");
  cmd->add_option("--noise", f.noise, "exact, truncation or bounded_random");
  cmd->add_option("--seed", f.seed, "master seed");
  cmd->add_option("--eps", f.eps, "comma separated accuracy levels, one per order");
  cmd->add_option("--p", f.p, "model degree");
  cmd->add_option("--q", f.q, "optimality order");
  cmd->add_option("--config", f.config, "key = value settings file");
  cmd->add_option("--out", f.out, "output directory");
  cmd->add_option("--jobs", f.jobs, "concurrent runs in a sweep");
}

// File settings first, then flags on top.
arq::ExperimentSpec build_spec(const Flags& f) {
  arq::ExperimentSpec spec;
  if (!f.config.empty()) arq::apply_settings(arq::read_key_value_file(f.config), spec);
  std::map<std::string, std::string> kv;
  if (!f.problem.empty()) kv["problem"] = f.problem;
  if (f.dim) kv["dim"] = std::to_string(f.dim);
  if (!f.noise.empty()) kv["noise"] = f.noise;
  if (f.seed >= 0) kv["seed"] = std::to_string(f.seed);
  if (!f.eps.empty()) kv["eps"] = f.eps;
  if (!f.eps_grid.empty()) kv["eps_grid"] = f.eps_grid;
  if (f.p) kv["p"] = std::to_string(f.p);
  if (f.q) kv["q"] = std::to_string(f.q);
  if (!f.out.empty()) kv["out"] = f.out;
  if (f.jobs) kv["jobs"] = std::to_string(f.jobs);
  if (f.seeds) kv["seeds"] = std::to_string(f.seeds);
  arq::apply_settings(kv, spec);
  // a q change without explicit eps keeps the default level for every order
  if (static_cast<int>(spec.config.epsilons.size()) != spec.config.q && f.eps.empty())
    spec.config.epsilons.assign(spec.config.q, spec.config.epsilons.front());
  return spec;
}

int cmd_solve(const Flags& f, arq::LogLevel log) {
  const arq::ExperimentSpec spec = build_spec(f);
  const arq::SolveOutcome o = arq::run_solve(spec, log, std::cerr);
  if (o.exit_code == 0 && log != arq::LogLevel::quiet && o.run)
    arq::write_certificate(std::cout, spec.problem, spec.dim, *o.run->certificate);
  return o.exit_code;
}

int cmd_sweep(const Flags& f, arq::LogLevel log) {
  arq::ExperimentSpec spec = build_spec(f);
  if (spec.eps_grid.empty()) spec.eps_grid = spec.config.epsilons;
  const arq::SweepResult r = arq::run_sweep(spec);
  if (!spec.out_dir.empty()) {
    std::filesystem::create_directories(spec.out_dir);
    std::ofstream out(std::filesystem::path(spec.out_dir) / "sweep.csv");
    arq::write_sweep_csv(out, r);
    if (!out) throw std::runtime_error("failed writing sweep.csv");
  } else {
    arq::write_sweep_csv(std::cout, r);
  }
  if (log != arq::LogLevel::quiet) std::cerr << "slope of log(evals) on log(1/eps): " << r.slope << "\n";
  for (const auto& row : r.rows)
    if (row.status == "error") return 1;
  return 0;
}

int cmd_verify(const Flags& f, arq::LogLevel log) {
  std::string path = f.certificate;
  if (path.empty()) {
    if (f.out.empty()) throw arq::ConfigError("verify needs --certificate FILE or --out DIR");
    path = (std::filesystem::path(f.out) / "certificate.txt").string();
  }
  std::ifstream in(path);
  if (!in) throw arq::ConfigError("cannot open '" + path + "'");
  std::string name;
  int dim = 0;
  const arq::Certificate cert = arq::read_certificate(in, name, dim);
  const arq::Problem problem = arq::make_problem(f.problem.empty() ? name : f.problem, f.dim ? f.dim : dim);
  const arq::Verification v = arq::verify_certificate(problem, cert);
  for (std::size_t j = 0; j < v.passed.size(); ++j) {
    std::cout << "order " << j + 1 << ": ";
    if (!v.passed[j])
      std::cout << "unsupported\n";
    else
      std::cout << "phi = " << *v.phi_exact[j] << " threshold = "
                << cert.epsilons[j] * std::pow(cert.delta_eps[j], j + 1) / arq::factorial(static_cast<int>(j + 1))
                << (*v.passed[j] ? " pass" : " FAIL") << "\n";
  }
  if (log != arq::LogLevel::quiet) std::cerr << (v.all_passed() ? "certificate verified\n" : "certificate rejected\n");
  return v.all_passed() ? 0 : 4;
}

int cmd_bounds(const Flags& f, arq::LogLevel) {
  const arq::ExperimentSpec spec = build_spec(f);
  const arq::Problem problem = arq::make_problem(spec.problem, spec.dim);
  const double radius = std::max(1.0, problem.x0.norm());
  const auto pts = arq::ball_samples(problem.x0, radius, 2000, spec.seed);
  const arq::LipschitzEstimate l = arq::estimate_lipschitz(problem, pts, spec.config.p);
  const arq::BoundReport r =
      arq::compute_bounds(spec.config, l.L_f, std::max(0.0, problem.value(problem.x0) - problem.f_low), l.L_fp);
  const std::string text = arq::to_text(r);
  std::cout << text;
  if (!spec.out_dir.empty()) {
    std::filesystem::create_directories(spec.out_dir);
    std::ofstream(std::filesystem::path(spec.out_dir) / "bounds.txt") << text;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"adaptive regularization with explicitly controlled inexact evaluations"};
  app.require_subcommand(1);
  Flags f;
  auto* solve = app.add_subcommand("solve", "solve one instance");
  auto* sweep = app.add_subcommand("sweep", "run a grid of accuracy targets and seeds");
  auto* verify = app.add_subcommand("verify", "check a certificate with exact derivatives");
  auto* bounds = app.add_subcommand("bounds", "print the theoretical constants");
  for (auto* cmd : {solve, sweep, verify, bounds}) add_common(cmd, f);
  sweep->add_option("--grid", f.eps_grid, "comma separated eps grid (default: --eps)");
  sweep->add_option("--seeds", f.seeds, "runs per grid point");
  verify->add_option("--certificate", f.certificate, "certificate file (default: OUT/certificate.txt)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    const arq::LogLevel log = arq::log_level_from_env();
    if (solve->parsed()) return cmd_solve(f, log);
    if (sweep->parsed()) return cmd_sweep(f, log);
    if (verify->parsed()) return cmd_verify(f, log);
    return cmd_bounds(f, log);
  } catch (const arq::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
