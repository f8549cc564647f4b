#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "arq/errors.hpp"
#include "arq/harness.hpp"
#include "arq/solver.hpp"
#include "oracles.hpp"

using namespace arq;

namespace {

// f(x) = 1 - x_1 / 2 near the origin; values only, derivatives are unused here.
Problem table_problem() {
  Problem p;
  p.name = "table";
  p.dim = 1;
  p.max_order = 2;
  p.value = [](const Vector& x) { return 1.0 - 0.5 * x[0]; };
  p.derivative = [](const Vector&, int i) { return Tensor(i, 1); };
  p.x0 = Vector::Zero(1);
  return p;
}

Step2Outcome unit_step(double norm = 1.0) {
  Step2Outcome s;
  s.step.step = Vector::Constant(1, norm);
  s.step.long_step = norm >= 1.0;
  if (!s.step.long_step) s.step.radii = std::vector<double>{1.0};
  s.taylor_decrement = 1.0;
  return s;
}

}  // namespace

TEST_CASE("configuration validation") {
  SolverConfig c;
  CHECK_NOTHROW(c.validate());
  auto bad = [](auto mutate) {
    SolverConfig c;
    mutate(c);
    CHECK_THROWS_AS(c.validate(), ConfigError);
  };
  bad([](SolverConfig& c) { c.eta2 = 1.0; });
  bad([](SolverConfig& c) { c.eta1 = 0.95; });
  bad([](SolverConfig& c) { c.q = 4; });
  bad([](SolverConfig& c) { c.p = 1; c.q = 2; c.epsilons = {1e-3, 1e-3}; });
  bad([](SolverConfig& c) { c.epsilons = {1.0}; });
  bad([](SolverConfig& c) { c.epsilons = {1e-3, 1e-3}; });
  bad([](SolverConfig& c) { c.sigma_min = 2.0; });
  bad([](SolverConfig& c) { c.gamma3 = 1.5; });
  bad([](SolverConfig& c) { c.gamma1 = 1.0; });
  bad([](SolverConfig& c) { c.gamma_acc = 1.0; });
  bad([](SolverConfig& c) { c.omega = 0.025; });
  bad([](SolverConfig& c) { c.varsigma = 1.5; });
  bad([](SolverConfig& c) { c.q = 2; c.epsilons = {1e-3, 1e-3}; c.varsigma = 1.0; });
  bad([](SolverConfig& c) { c.theta = 0.0; });
  bad([](SolverConfig& c) { c.delta0 = {1e-3}; });
  bad([](SolverConfig& c) { c.acc0 = {0.1, 2.0}; });
  bad([](SolverConfig& c) { c.acc_max = -1.0; });
  bad([](SolverConfig& c) { c.max_iters = 0; });
}

TEST_CASE("defaults") {
  const SolverConfig c = SolverConfig{}.resolved();
  CHECK(c.delta0 == std::vector<double>{1.0});
  CHECK(c.acc0 == std::vector<double>{0.1, 0.1});
  CHECK(*c.varsigma == 1.0);
  CHECK(c.omega < std::min(c.eta1 / 2.0, (1.0 - c.eta2) / 4.0));
  SolverConfig q3;
  q3.p = 3;
  q3.q = 3;
  q3.epsilons = {1e-2, 1e-2, 1e-2};
  CHECK(q3.effective_varsigma() == 0.5);
}

TEST_CASE("sigma update uses the lower interval endpoints") {
  const SolverConfig c;
  CHECK(update_sigma(c, 2.0, 0.95) == doctest::Approx(1.0));
  CHECK(update_sigma(c, 2.0, 0.5) == 2.0);
  CHECK(update_sigma(c, 2.0, -0.2) == doctest::Approx(4.0));
  CHECK(update_sigma(c, 1e-8, 0.99) == 1e-8);
}

TEST_CASE("step3_step4 examples") {
  const Problem p = table_problem();
  const SolverConfig c = SolverConfig{}.resolved();

  SUBCASE("successful but not very successful") {
    // f(0) = 1, f(1) = 0.5, decrement 1
    Oracle o(p, {});
    SolverState st = initial_state(c, Vector::Zero(1));
    st.sigma = 2.0;
    IterationRecord rec;
    step3_step4(st, o, c, unit_step(), rec);
    CHECK(*rec.rho == doctest::Approx(0.5));
    CHECK(rec.kind == IterationKind::successful);
    CHECK(st.sigma == 2.0);
    CHECK(st.x[0] == 1.0);
    CHECK(rec.value_evals == 0);  // only counted by the solve loop
    CHECK(o.counters().value_evals == 2);
  }
  SUBCASE("very successful") {
    Problem steep = p;
    steep.value = [](const Vector& x) { return 1.0 - 0.95 * x[0]; };
    Oracle o(steep, {});
    SolverState st = initial_state(c, Vector::Zero(1));
    st.sigma = 2.0;
    IterationRecord rec;
    step3_step4(st, o, c, unit_step(), rec);
    CHECK(*rec.rho >= c.eta2);
    CHECK(st.sigma == doctest::Approx(1.0));
  }
  SUBCASE("unsuccessful") {
    Problem up = p;
    up.value = [](const Vector& x) { return 1.0 + 0.2 * x[0]; };
    Oracle o(up, {});
    SolverState st = initial_state(c, Vector::Zero(1));
    st.sigma = 2.0;
    st.delta_end = {0.25};
    IterationRecord rec;
    step3_step4(st, o, c, unit_step(0.5), rec);
    CHECK(*rec.rho == doctest::Approx(-0.2 * 0.5));
    CHECK(rec.kind == IterationKind::unsuccessful);
    CHECK(st.sigma == doctest::Approx(4.0));
    CHECK(st.x[0] == 0.0);
    CHECK(st.delta == std::vector<double>{0.25});
  }
  SUBCASE("short accepted step takes the step radii") {
    Oracle o(p, {});
    SolverState st = initial_state(c, Vector::Zero(1));
    st.delta_end = {0.25};
    Step2Outcome s = unit_step(0.5);
    s.step.radii = std::vector<double>{0.75};
    s.taylor_decrement = 0.25;
    IterationRecord rec;
    step3_step4(st, o, c, s, rec);
    CHECK(rec.kind == IterationKind::successful);
    CHECK(st.delta == std::vector<double>{0.75});
  }
  SUBCASE("long accepted step keeps the Step-1 radii") {
    Oracle o(p, {});
    SolverState st = initial_state(c, Vector::Zero(1));
    st.delta_end = {0.25};
    IterationRecord rec;
    step3_step4(st, o, c, unit_step(), rec);
    CHECK(st.delta == std::vector<double>{0.25});
  }
  SUBCASE("f_bar reuse") {
    Oracle o(p, {});
    SolverState st = initial_state(c, Vector::Zero(1));
    st.f_bar = 1.0;
    st.f_bar_bound = 0.001;
    IterationRecord rec;
    step3_step4(st, o, c, unit_step(), rec);  // bound = omega * 1 = 0.02 >= 0.001
    CHECK(rec.f_bar_reused);
    CHECK(o.counters().value_evals == 1);

    SolverState tight = initial_state(c, Vector::Zero(1));
    tight.f_bar = 1.0;
    tight.f_bar_bound = 0.5;
    IterationRecord rec2;
    step3_step4(tight, o, c, unit_step(), rec2);
    CHECK_FALSE(rec2.f_bar_reused);
  }
}

TEST_CASE("step5 examples") {
  SolverConfig c = SolverConfig{}.resolved();
  SolverState st = initial_state(c, Vector::Zero(2));
  st.sigma = 3.0;
  st.delta_start = {1.0};
  st.delta = {0.125};
  st.delta_end = {0.125};
  step5(st, c);
  CHECK(st.accuracy.bounds[0] == doctest::Approx(0.025));
  CHECK(st.accuracy.bounds[1] == doctest::Approx(0.025));
  CHECK(st.accuracy.improvements == 1);
  CHECK(st.delta == std::vector<double>{1.0});
  CHECK(st.sigma == 3.0);
}

TEST_CASE("step1 outcomes") {
  SolverConfig exact;
  exact.acc0 = {0.0, 0.0};
  const SolverConfig c = exact.resolved();
  SUBCASE("immediate termination") {
    Bundle b;
    b.tensors = {Tensor::from_vector(Vector::Constant(1, 1e-6)), Tensor::from_matrix(Matrix::Identity(1, 1))};
    b.accuracy = {0.0, 0.0};
    SolverState st = initial_state(c, Vector::Zero(1));
    IterationRecord rec;
    const Step1Outcome o = step1(st, b, c, rec);
    CHECK(o.next == Step1Outcome::Next::terminate);
    REQUIRE(o.certificate);
    CHECK(o.certificate->phi_bar[0] <= o.certificate->threshold[0]);
  }
  SUBCASE("to Step 2 without halving") {
    // g = 1, eps = 0.1: the measure delta |g| exceeds the hand-off threshold at delta = 1
    SolverConfig c1 = c;
    c1.epsilons = {0.1};
    Bundle b;
    b.tensors = {Tensor::from_vector(Vector::Constant(1, 1.0)), Tensor::from_matrix(Matrix::Zero(1, 1))};
    b.accuracy = {0.0, 0.0};
    SolverState st = initial_state(c1, Vector::Zero(1));
    IterationRecord rec;
    const Step1Outcome o = step1(st, b, c1, rec);
    CHECK(o.next == Step1Outcome::Next::step2);
    CHECK(o.j_k == 1);
    CHECK(st.delta_end[0] == 1.0);
    // hand-off arithmetic: model decrement 1 - sigma / 6 against varsigma eps / (2 (1 + omega))
    const double dm = 1.0 - 1.0 / 6.0;
    CHECK(dm >= 0.1 / (2.0 * 1.02));
    CHECK(model_decrement(Model{b, st.sigma}, o.d_k) == doctest::Approx(dm));
  }
  SUBCASE("insufficient accuracy goes to Step 5") {
    Bundle b;
    b.tensors = {Tensor::from_vector(Vector::Constant(1, 1e-6)), Tensor::from_matrix(Matrix::Identity(1, 1))};
    b.accuracy = {1.0, 1.0};
    SolverState st = initial_state(c, Vector::Zero(1));
    st.accuracy.bounds = b.accuracy;
    IterationRecord rec;
    const Step1Outcome o = step1(st, b, c, rec);
    CHECK(o.next == Step1Outcome::Next::step5);
    CHECK(rec.checks.size() == 1);
    CHECK(rec.checks[0].verdict == Verdict::insufficient);
  }
  SUBCASE("radius halving") {
    // a tiny gradient with strong negative curvature: the radius shrinks before a decision
    Bundle b;
    b.tensors = {Tensor::from_vector(Vector::Constant(1, 1e-5)), Tensor::from_matrix(Matrix::Constant(1, 1, -1e-2))};
    b.accuracy = {0.0, 0.0};
    SolverConfig c2 = c;
    c2.sigma0 = 10.0;
    SolverState st = initial_state(c2, Vector::Zero(1));
    st.sigma = 10.0;
    IterationRecord rec;
    step1(st, b, c2, rec);
    CHECK(st.delta_end[0] <= st.delta_start[0]);
  }
}

TEST_CASE("check thresholds") {
  SolverConfig c = SolverConfig{}.resolved();
  c.p = 2;
  const double xi = step_check_xi(c, 1, 0.5, 2.0);
  CHECK(xi == doctest::Approx(1.0 * 1e-3 / (2.0 * 1.02) * 2.0 * 0.5 / 4.0));
  CHECK(model_check_xi(c, 1) == doctest::Approx(0.5 * 0.98 * 1e-3 / (2.0 * 1.02 * 1.02)));
}

TEST_CASE("solve: quadratic with an exact oracle") {
  const Problem p = make_quadratic(Matrix::Identity(2, 2));
  SolverConfig c;
  c.acc0 = {0.0, 0.0};
  const SolveResult r = solve(p, {}, c, Vector{{1.0, 1.0}});
  REQUIRE(r.certificate);
  CHECK(r.certificate->x_eps.norm() <= 1e-3);
  CHECK(r.trace.size() < 30);
  CHECK(r.count(IterationKind::accuracy_improving) == 0);
  CHECK(!r.trace.back().kind);
  for (const IterationRecord& rec : r.trace)
    for (const CheckRecord& ch : rec.checks)
      if (ch.decrement > 0.0) CHECK(ch.verdict == Verdict::relative);
}

TEST_CASE("solve: start at the minimizer") {
  const Problem p = make_quadratic(Matrix::Identity(3, 3));
  SolverConfig c;
  c.acc0 = {0.0, 0.0};
  const SolveResult r = solve(p, {}, c, Vector::Zero(3));
  REQUIRE(r.certificate);
  CHECK(r.trace.size() == 1);
  CHECK(r.count(IterationKind::successful) == 0);
  CHECK(r.trace[0].k == 0);
}

TEST_CASE("solve: noisy Rosenbrock") {
  const Problem p = make_rosenbrock(2);
  SolverConfig c;
  c.epsilons = {1e-4};
  const SolveResult r = solve(p, {NoiseKind::bounded_random, 0.9, 7}, c);
  REQUIRE(r.certificate);
  const Verification v = verify_certificate(p, *r.certificate);
  CHECK(v.all_passed());
  const double phi = *exact_measure(p, r.certificate->x_eps, 1, r.certificate->delta_eps[0]);
  CHECK(phi <= 1e-4 * r.certificate->delta_eps[0]);
}

TEST_CASE("solve: the first Step-2 check is never absolute") {
  int first_checks = 0;
  for (const std::string& name : benchmark_names())
    for (NoiseKind kind : {NoiseKind::truncation, NoiseKind::bounded_random})
      for (int seed = 1; seed <= 3; ++seed)
        for (int q = 1; q <= 2; ++q) {
          SolverConfig c;
          c.q = q;
          c.epsilons.assign(q, 1e-3);
          const SolveResult r = solve(make_problem(name, 3), {kind, 0.9, std::uint64_t(seed)}, c);
          for (const IterationRecord& rec : r.trace)
            for (const CheckRecord& ch : rec.checks)
              if (ch.stage == CheckStage::step2_first) {
                ++first_checks;
                CHECK(ch.verdict != Verdict::absolute);
              }
          // second batch only after short steps
          for (const IterationRecord& rec : r.trace)
            if (rec.step_norm && *rec.step_norm >= 1.0)
              for (const CheckRecord& ch : rec.checks) CHECK(ch.stage != CheckStage::step2_model);
        }
  CHECK(first_checks > 0);
}

TEST_CASE("solve: third-order runs") {
  for (const std::string& name : {"quartic", "sine"}) {
    SolverConfig c;
    c.p = 3;
    c.q = 3;
    c.epsilons = {1e-2, 1e-2, 1e-2};
    const Problem p = make_problem(name, 2);
    const SolveResult r = solve(p, {NoiseKind::bounded_random, 0.9, 3}, c);
    REQUIRE(r.certificate);
    CHECK(verify_certificate(p, *r.certificate).all_passed());
  }
}

TEST_CASE("solve: budget and trace bookkeeping") {
  SolverConfig c;
  c.max_iters = 3;
  try {
    solve(make_rosenbrock(2), {}, c);
    FAIL("expected the budget to run out");
  } catch (const BudgetExhausted& e) {
    CHECK(e.partial().trace.size() == 3);
    CHECK_FALSE(e.partial().certificate);
  }

  int observed = 0;
  const SolveResult r = solve(make_double_well(3), {NoiseKind::bounded_random, 0.9, 1}, SolverConfig{}, Vector(),
                              [&](const IterationRecord&) { ++observed; });
  CHECK(observed == static_cast<int>(r.trace.size()));
  long values = 0, derivs = 0;
  for (const IterationRecord& rec : r.trace) {
    values += rec.value_evals;
    derivs += rec.derivative_evals;
    CHECK(rec.value_evals_cum == values);
    if (rec.kind == IterationKind::accuracy_improving) CHECK(!rec.rho);
    if (rec.kind == IterationKind::accuracy_improving) CHECK(rec.sigma_next == rec.sigma);
    for (std::size_t j = 0; j < rec.delta_end.size(); ++j) CHECK(rec.delta_end[j] <= rec.delta_start[j]);
  }
  CHECK(values == r.counters.value_evals);
  CHECK(derivs == r.counters.derivative_evals);
  CHECK(r.count(IterationKind::successful) + r.count(IterationKind::unsuccessful) +
            r.count(IterationKind::accuracy_improving) + 1 ==
        static_cast<int>(r.trace.size()));
  CHECK_THROWS_AS(solve(make_rosenbrock(2), {}, c, Vector::Zero(3)), std::invalid_argument);
}
