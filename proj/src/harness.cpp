#include "arq/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <thread>

#include "arq/errors.hpp"
#include "arq/trust_region.hpp"

namespace arq {

LogLevel parse_log_level(const std::string& s) {
  if (s.empty() || s == "info") return LogLevel::info;
  if (s == "quiet") return LogLevel::quiet;
  if (s == "trace") return LogLevel::trace;
  throw ConfigError("ARQ_LOG must be quiet, info or trace (got '" + s + "')");
}

LogLevel log_level_from_env() {
  const char* v = std::getenv("ARQ_LOG");
  return parse_log_level(v ? v : "");
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError("'" + key + "' expects a number, got '" + v + "'");
  }
}

int to_int(const std::string& key, const std::string& v) {
  const double d = to_double(key, v);
  if (d != std::floor(d) || std::abs(d) > 1e9) throw ConfigError("'" + key + "' expects an integer, got '" + v + "'");
  return static_cast<int>(d);
}

std::string fmt(double v) {
  std::ostringstream o;
  o << std::setprecision(17) << v;
  return o.str();
}

std::string fmt_list(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + fmt(v[i]);
  return s;
}

std::string fmt_vector(const Vector& v) {
  return fmt_list(std::vector<double>(v.data(), v.data() + v.size()));
}

}  // namespace

std::map<std::string, std::string> parse_key_values(std::istream& in) {
  std::map<std::string, std::string> kv;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty key");
    kv[key] = trim(line.substr(eq + 1));
  }
  return kv;
}

std::map<std::string, std::string> read_key_value_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  return parse_key_values(in);
}

std::vector<double> parse_double_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) throw ConfigError("empty entry in list '" + s + "'");
    out.push_back(to_double("list", item));
  }
  return out;
}

void apply_settings(const std::map<std::string, std::string>& kv, ExperimentSpec& spec) {
  SolverConfig& c = spec.config;
  for (const auto& [key, v] : kv) {
    if (key == "problem") spec.problem = v;
    else if (key == "dim") spec.dim = to_int(key, v);
    else if (key == "noise") {
      try {
        spec.noise = parse_noise_kind(v);
      } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
      }
    }
    else if (key == "fill_fraction") spec.fill_fraction = to_double(key, v);
    else if (key == "seed") spec.seed = static_cast<std::uint64_t>(to_double(key, v));
    else if (key == "seeds") spec.seeds = to_int(key, v);
    else if (key == "eps") c.epsilons = parse_double_list(v);
    else if (key == "eps_grid") spec.eps_grid = parse_double_list(v);
    else if (key == "jobs") spec.jobs = to_int(key, v);
    else if (key == "out") spec.out_dir = v;
    else if (key == "p") c.p = to_int(key, v);
    else if (key == "q") c.q = to_int(key, v);
    else if (key == "sigma0") c.sigma0 = to_double(key, v);
    else if (key == "sigma_min") c.sigma_min = to_double(key, v);
    else if (key == "eta1") c.eta1 = to_double(key, v);
    else if (key == "eta2") c.eta2 = to_double(key, v);
    else if (key == "gamma1") c.gamma1 = to_double(key, v);
    else if (key == "gamma2") c.gamma2 = to_double(key, v);
    else if (key == "gamma3") c.gamma3 = to_double(key, v);
    else if (key == "gamma_acc") c.gamma_acc = to_double(key, v);
    else if (key == "omega") c.omega = to_double(key, v);
    else if (key == "varsigma") c.varsigma = to_double(key, v);
    else if (key == "varsigma3") c.guarantees.order3 = to_double(key, v);
    else if (key == "theta") c.theta = to_double(key, v);
    else if (key == "delta0") c.delta0 = parse_double_list(v);
    else if (key == "acc0") c.acc0 = parse_double_list(v);
    else if (key == "acc_max") c.acc_max = to_double(key, v);
    else if (key == "max_iters") c.max_iters = to_int(key, v);
    else if (key == "inner_max_iters") c.inner.max_iters = to_int(key, v);
    else throw ConfigError("unknown setting '" + key + "'");
  }
}

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, int index) {
  std::uint64_t state = master;
  std::uint64_t out = 0;
  for (int i = 0; i <= index; ++i) out = splitmix64(state);
  return out;
}

bool Verification::all_passed() const {
  return std::all_of(passed.begin(), passed.end(), [](const std::optional<bool>& b) { return !b || *b; });
}

namespace {

// Largest order-3 Taylor decrement over a grid of the ball (n <= 3).
double grid_cubic_measure(const Bundle& b, double delta) {
  const int n = b.dim();
  const Vector g = b.derivative(1).as_vector();
  const Matrix h = b.derivative(2).as_matrix();
  const Tensor& t = b.derivative(3);
  auto dec = [&](const Vector& d) {
    double cubic = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) cubic += t({i, j, k}) * d[i] * d[j] * d[k];
    return -(g.dot(d) + 0.5 * d.dot(h * d) + cubic / 6.0);
  };
  double best = 0.0;
  const double pi = std::acos(-1.0);
  if (n == 1) {
    for (int i = -2000; i <= 2000; ++i) best = std::max(best, dec(Vector::Constant(1, delta * i / 2000.0)));
  } else if (n == 2) {
    for (int a = 0; a < 720; ++a)
      for (int r = 1; r <= 100; ++r) {
        const double ang = 2.0 * pi * a / 720.0, rad = delta * r / 100.0;
        best = std::max(best, dec(Vector{{rad * std::cos(ang), rad * std::sin(ang)}}));
      }
  } else {
    for (int a = 0; a <= 90; ++a)
      for (int z = 0; z < 180; ++z)
        for (int r = 1; r <= 40; ++r) {
          const double th = pi * a / 90.0, ph = 2.0 * pi * z / 180.0, rad = delta * r / 40.0;
          best = std::max(best, dec(Vector{{rad * std::sin(th) * std::cos(ph), rad * std::sin(th) * std::sin(ph),
                                            rad * std::cos(th)}}));
        }
  }
  return best;
}

}  // namespace

std::optional<double> exact_measure(const Problem& problem, const Vector& x, int j, double delta) {
  if (j < 1 || j > 3) throw std::invalid_argument("exact_measure: order must be 1..3");
  const Bundle b = problem.exact_bundle(x, j);
  if (j == 1) return delta * b.derivative(1).as_vector().norm();
  if (j == 2) {
    const TrustRegionSolution s =
        solve_trust_region(b.derivative(1).as_vector(), b.derivative(2).as_matrix(), delta);
    return std::max(0.0, -s.value);
  }
  if (problem.dim > 3) return std::nullopt;
  return std::max(grid_cubic_measure(b, delta), optimality_measure(b, 3, delta).phi_bar);
}

Verification verify_certificate(const Problem& problem, const Certificate& c) {
  Verification v;
  for (std::size_t j = 1; j <= c.epsilons.size(); ++j) {
    const double delta = c.delta_eps.at(j - 1);
    const std::optional<double> phi = exact_measure(problem, c.x_eps, static_cast<int>(j), delta);
    v.phi_exact.push_back(phi);
    if (phi)
      v.passed.push_back(*phi <= c.epsilons[j - 1] * std::pow(delta, j) / factorial(static_cast<int>(j)));
    else
      v.passed.push_back(std::nullopt);
  }
  return v;
}

void write_certificate(std::ostream& out, const std::string& problem, int dim, const Certificate& c) {
  out << "problem = " << problem << "\n"
      << "dim = " << dim << "\n"
      << "x_eps = " << fmt_vector(c.x_eps) << "\n"
      << "delta_eps = " << fmt_list(c.delta_eps) << "\n"
      << "eps = " << fmt_list(c.epsilons) << "\n"
      << "phi_bar = " << fmt_list(c.phi_bar) << "\n"
      << "threshold = " << fmt_list(c.threshold) << "\n";
  if (c.verified_exact) {
    out << "verified_exact = ";
    for (std::size_t i = 0; i < c.verified_exact->size(); ++i) {
      const auto& b = (*c.verified_exact)[i];
      out << (i ? "," : "") << (!b ? "unsupported" : *b ? "true" : "false");
    }
    out << "\n";
  }
}

Certificate read_certificate(std::istream& in, std::string& problem, int& dim) {
  const auto kv = parse_key_values(in);
  auto need = [&](const std::string& k) -> const std::string& {
    const auto it = kv.find(k);
    if (it == kv.end()) throw ConfigError("certificate is missing '" + k + "'");
    return it->second;
  };
  problem = need("problem");
  dim = to_int("dim", need("dim"));
  Certificate c;
  const std::vector<double> x = parse_double_list(need("x_eps"));
  c.x_eps = Eigen::Map<const Vector>(x.data(), static_cast<Eigen::Index>(x.size()));
  c.delta_eps = parse_double_list(need("delta_eps"));
  c.epsilons = parse_double_list(need("eps"));
  if (kv.count("phi_bar")) c.phi_bar = parse_double_list(kv.at("phi_bar"));
  if (kv.count("threshold")) c.threshold = parse_double_list(kv.at("threshold"));
  if (static_cast<int>(x.size()) != dim || c.delta_eps.size() != c.epsilons.size())
    throw ConfigError("certificate fields have inconsistent sizes");
  return c;
}

std::string trace_csv_header() {
  return "k,kind,j_k,sigma,rho,step_norm,delta_min_start,delta_min_end,acc_max,f_bar,value_evals_cum,"
         "deriv_evals_cum";
}

void write_trace_csv(std::ostream& out, const SolveResult& run) {
  out << trace_csv_header() << "\n";
  auto opt = [](const auto& o) { return o ? fmt(static_cast<double>(*o)) : std::string(); };
  auto vmin = [](const std::vector<double>& v) {
    return v.empty() ? std::string() : fmt(*std::min_element(v.begin(), v.end()));
  };
  auto vmax = [](const std::vector<double>& v) {
    return v.empty() ? std::string() : fmt(*std::max_element(v.begin(), v.end()));
  };
  for (const IterationRecord& r : run.trace) {
    out << r.k << "," << (r.kind ? to_string(*r.kind) : "") << "," << (r.j_k ? std::to_string(*r.j_k) : "")
        << "," << fmt(r.sigma) << "," << opt(r.rho) << "," << opt(r.step_norm) << "," << vmin(r.delta_start)
        << "," << vmin(r.delta_end) << "," << vmax(r.accuracy) << "," << opt(r.f_bar_before) << ","
        << r.value_evals_cum << "," << r.derivative_evals_cum << "\n";
  }
}

SolveOutcome run_solve(const ExperimentSpec& spec, LogLevel log, std::ostream& log_out) {
  SolveOutcome out;
  std::optional<Problem> problem;
  const NoiseModel noise{spec.noise, spec.fill_fraction, spec.seed};
  try {
    problem = make_problem(spec.problem, spec.dim);
    IterationObserver observer;
    if (log == LogLevel::trace) {
      observer = [&](const IterationRecord& r) {
        log_out << "k=" << r.k << " kind=" << (r.kind ? to_string(*r.kind) : "-") << " sigma=" << r.sigma
                << " rho=" << (r.rho ? fmt(*r.rho) : "-") << " |s|=" << (r.step_norm ? fmt(*r.step_norm) : "-")
                << " acc_max=" << *std::max_element(r.accuracy.begin(), r.accuracy.end()) << "\n";
      };
    }
    out.run = solve(*problem, noise, spec.config, Vector(), observer);
    out.verification = verify_certificate(*problem, *out.run->certificate);
    out.run->certificate->verified_exact = out.verification->passed;
    out.exit_code = 0;
    out.message = "certified";
  } catch (const ConfigError& e) {
    out.exit_code = 1;
    out.message = e.what();
  } catch (const BudgetExhausted& e) {
    out.run = e.partial();
    out.exit_code = 2;
    out.message = e.what();
  } catch (const std::invalid_argument& e) {
    out.exit_code = 1;
    out.message = e.what();
  } catch (const std::exception& e) {
    out.exit_code = 3;
    out.message = e.what();
  }
  if (out.run && problem) out.audit = audit_run(*problem, noise, *out.run);

  if (!out.run) {
    log_out << "error: " << out.message << "\n";
  } else if (log != LogLevel::quiet) {
    const SolveResult& r = *out.run;
    log_out << spec.problem << " n=" << spec.dim << " noise=" << to_string(spec.noise) << ": " << out.message
            << " after " << r.trace.size() << " iterations (S=" << r.count(IterationKind::successful)
            << " U=" << r.count(IterationKind::unsuccessful) << " A=" << r.count(IterationKind::accuracy_improving)
            << "), value evals " << r.counters.value_evals << ", derivative evals " << r.counters.derivative_evals
            << "\n";
    if (out.verification)
      log_out << "exact verification: " << (out.verification->all_passed() ? "passed" : "FAILED") << "\n";
  }

  if (!spec.out_dir.empty() && out.run) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(spec.out_dir, ec);
    if (ec) {
      out.exit_code = 3;
      out.message = "cannot create '" + spec.out_dir + "': " + ec.message();
      return out;
    }
    const fs::path dir(spec.out_dir);
    std::ofstream trace(dir / "trace.csv");
    write_trace_csv(trace, *out.run);
    if (out.run->certificate) {
      std::ofstream cert(dir / "certificate.txt");
      write_certificate(cert, spec.problem, spec.dim, *out.run->certificate);
    }
    if (out.audit) {
      std::ofstream bounds(dir / "bounds.txt");
      bounds << to_text(out.audit->bounds);
    }
    if (!trace) {
      out.exit_code = 3;
      out.message = "failed writing to '" + spec.out_dir + "'";
    }
  }
  return out;
}

double least_squares_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size() || xs.size() < 2) throw std::invalid_argument("least_squares_slope: need >= 2 points");
  const double n = static_cast<double>(xs.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i] / n;
    my += ys[i] / n;
  }
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  if (sxx == 0.0) throw std::invalid_argument("least_squares_slope: degenerate abscissae");
  return sxy / sxx;
}

SweepResult run_sweep(const ExperimentSpec& spec) {
  if (spec.eps_grid.size() < 3) throw std::invalid_argument("run_sweep: the eps grid needs at least 3 points");
  for (double e : spec.eps_grid)
    if (!(e > 0.0 && e < 1.0)) throw std::invalid_argument("run_sweep: eps grid entries must lie in (0,1)");
  if (spec.seeds < 1) throw std::invalid_argument("run_sweep: seeds must be >= 1");

  struct Job {
    double eps;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  for (double e : spec.eps_grid)
    for (int s = 0; s < spec.seeds; ++s) jobs.push_back({e, derive_seed(spec.seed, s)});

  SweepResult result;
  result.rows.resize(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      ExperimentSpec one = spec;
      one.out_dir.clear();
      one.seed = jobs[i].seed;
      one.config.epsilons.assign(spec.config.q, jobs[i].eps);
      std::ostringstream sink;
      const SolveOutcome o = run_solve(one, LogLevel::quiet, sink);
      SweepRow& row = result.rows[i];
      row.eps = jobs[i].eps;
      row.seed = jobs[i].seed;
      row.status = o.exit_code == 0 ? "certified" : o.exit_code == 2 ? "budget" : o.exit_code == 1 ? "error" : "stall";
      if (o.run) {
        row.successful = o.run->count(IterationKind::successful);
        row.unsuccessful = o.run->count(IterationKind::unsuccessful);
        row.accuracy_improving = o.run->count(IterationKind::accuracy_improving);
        row.value_evals = o.run->counters.value_evals;
        row.derivative_evals = o.run->counters.derivative_evals;
      }
      if (o.audit) {
        row.N1 = o.audit->bounds.N1;
        row.N2 = o.audit->bounds.N2;
        row.k_acc_min = o.audit->bounds.k_acc_min;
        row.value_bound_ok = row.value_evals <= row.N1;
        row.derivative_bound_ok = row.derivative_evals <= row.N2;
        row.step5_bound_ok = row.accuracy_improving <= row.k_acc_min;
        row.audit_violations = o.audit->total_violations();
      }
      row.verified = o.verification && o.verification->all_passed();
    }
  };
  const int threads = std::max(1, std::min<int>(spec.jobs, static_cast<int>(jobs.size())));
  std::vector<std::thread> pool;
  for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  std::vector<double> xs, ys;
  for (const SweepRow& r : result.rows) {
    if (r.status != "certified") continue;
    xs.push_back(std::log(1.0 / r.eps));
    ys.push_back(std::log(static_cast<double>(r.value_evals + r.derivative_evals)));
  }
  result.slope = xs.size() >= 2 ? least_squares_slope(xs, ys) : std::numeric_limits<double>::quiet_NaN();
  return result;
}

void write_sweep_csv(std::ostream& out, const SweepResult& result) {
  out << "eps,seed,status,successful,unsuccessful,accuracy_improving,value_evals,deriv_evals,N1,N2,k_acc_min,"
         "value_bound_ok,deriv_bound_ok,step5_bound_ok,verified,audit_violations\n";
  for (const SweepRow& r : result.rows) {
    out << fmt(r.eps) << "," << r.seed << "," << r.status << "," << r.successful << "," << r.unsuccessful << ","
        << r.accuracy_improving << "," << r.value_evals << "," << r.derivative_evals << "," << fmt(r.N1) << ","
        << fmt(r.N2) << "," << r.k_acc_min << "," << r.value_bound_ok << "," << r.derivative_bound_ok << ","
        << r.step5_bound_ok << "," << r.verified << "," << r.audit_violations << "\n";
  }
}

}  // namespace arq
