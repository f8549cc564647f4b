#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "arq/audit.hpp"

namespace arq {

enum class LogLevel { quiet, info, trace };

/// Parses ARQ_LOG values; empty means info.
LogLevel parse_log_level(const std::string& s);
/// Reads ARQ_LOG from the environment.
LogLevel log_level_from_env();

struct ExperimentSpec {
  std::string problem = "quadratic";
  int dim = 4;
  NoiseKind noise = NoiseKind::exact;
  double fill_fraction = 0.9;
  std::uint64_t seed = 1;
  int seeds = 1;  // runs per grid point in a sweep
  SolverConfig config;
  std::vector<double> eps_grid;  // sweep targets, applied to every order
  std::string out_dir;
  int jobs = 1;
};

/// "key = value" lines, '#' starts a comment. Throws ConfigError on malformed lines.
std::map<std::string, std::string> parse_key_values(std::istream& in);
std::map<std::string, std::string> read_key_value_file(const std::string& path);

/// Applies known keys to `spec`; unknown keys throw ConfigError.
void apply_settings(const std::map<std::string, std::string>& kv, ExperimentSpec& spec);

std::vector<double> parse_double_list(const std::string& s);

/// splitmix64 step: advances `state` and returns the next output.
std::uint64_t splitmix64(std::uint64_t& state);
/// Seed of run `index` under `master`: the (index+1)-th splitmix64 output.
std::uint64_t derive_seed(std::uint64_t master, int index);

/// Exact recomputation of the optimality measures at a certificate.
struct Verification {
  std::vector<std::optional<double>> phi_exact;
  std::vector<std::optional<bool>> passed;  // nullopt: unsupported order/dimension

  bool all_passed() const;  // unsupported entries are not failures
};

/// Exact order-j measure over the ball of radius delta, or nullopt when the
/// order-3 brute-force search is unsupported (n > 3).
std::optional<double> exact_measure(const Problem& problem, const Vector& x, int j, double delta);

Verification verify_certificate(const Problem& problem, const Certificate& certificate);

void write_certificate(std::ostream& out, const std::string& problem, int dim, const Certificate& c);
/// Returns the certificate with the problem name and dimension it was written with.
Certificate read_certificate(std::istream& in, std::string& problem, int& dim);

/// Trace CSV with the fixed column order.
void write_trace_csv(std::ostream& out, const SolveResult& run);
std::string trace_csv_header();

struct SolveOutcome {
  int exit_code = 0;  // 0 certified, 2 budget exhausted, 1 configuration error, 3 other failure
  std::optional<SolveResult> run;
  std::optional<Verification> verification;
  std::optional<AuditReport> audit;
  std::string message;
};

/// Solves one instance; writes trace.csv, certificate.txt and bounds.txt to
/// spec.out_dir when set.
SolveOutcome run_solve(const ExperimentSpec& spec, LogLevel log, std::ostream& log_out);

struct SweepRow {
  double eps = 0.0;
  std::uint64_t seed = 0;
  std::string status;  // certified, budget, stall, error
  int successful = 0;
  int unsuccessful = 0;
  int accuracy_improving = 0;
  long value_evals = 0;
  long derivative_evals = 0;
  double N1 = 0.0;
  double N2 = 0.0;
  int k_acc_min = 0;
  bool value_bound_ok = false;
  bool derivative_bound_ok = false;
  bool step5_bound_ok = false;
  bool verified = false;
  int audit_violations = 0;
};

struct SweepResult {
  std::vector<SweepRow> rows;  // grid order, then seed order
  double slope = 0.0;          // least squares of log(total evals) on log(1/eps)
};

/// Runs every (eps, seed) pair with up to spec.jobs threads.
SweepResult run_sweep(const ExperimentSpec& spec);
void write_sweep_csv(std::ostream& out, const SweepResult& result);

/// Least-squares slope of ys on xs.
double least_squares_slope(const std::vector<double>& xs, const std::vector<double>& ys);

}  // namespace arq
