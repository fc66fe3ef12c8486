#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "polynewt/bench.hpp"
#include "polynewt/diagnostics.hpp"
#include "polynewt/losses.hpp"
#include "polynewt/regularizers.hpp"
#include "polynewt/rng.hpp"

using namespace polynewt;

namespace {
Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Index>(v.size()));
  Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

ProblemInstance remark34() {
  return ProblemInstance(
      std::make_shared<LeastSquaresLoss>(Matrix::Identity(2, 2), vec({2, -1})),
      std::make_shared<L1Reg>(1.0), "remark34");
}

/// f(x) = 0.5 (x1 + x2 - 2)^2: rank-one hessian with kernel span{(1,-1)};
/// at (1,0) the dual point (1,1) activates the full l1 subspace, so the
/// kernel direction lies inside it and tilt stability fails.
ProblemInstance rank_deficient() {
  Matrix a(1, 2);
  a << 1, 1;
  return ProblemInstance(std::make_shared<LeastSquaresLoss>(a, Vector::Constant(1, 2.0)),
                         std::make_shared<L1Reg>(1.0), "rank_deficient");
}

SolverTrace synthetic_newton_trace(const std::vector<double>& dists) {
  SolverTrace tr;
  int k = 0;
  for (double e : dists) {
    IterationRecord r;
    r.k = ++k;
    r.x = vec({e, 0});
    r.step_kind = StepKind::newton;
    r.newton = NewtonStepReport{};
    tr.records.push_back(std::move(r));
  }
  tr.status = TerminalStatus::converged;
  return tr;
}
}  // namespace

TEST_CASE("tilt stability: Remark 3.4 is stable with the full-plane subspace") {
  const auto rep = check_tilt_stability(remark34(), vec({1, 0}));
  CHECK(rep.tilt_stable);
  CHECK(rep.ker_dim == 0);
  CHECK(rep.subspace_dim == 2);
  CHECK_FALSE(rep.candidate_warning);
}

TEST_CASE("tilt stability: zero hessian with zero dual point is stable (trivial subspace)") {
  ProblemInstance prob(
      std::make_shared<LeastSquaresLoss>(Matrix::Zero(2, 2), Vector::Zero(2)),
      std::make_shared<L1Reg>(1.0), "flat");
  const auto rep = check_tilt_stability(prob, Vector::Zero(2));
  CHECK(rep.ker_dim == 2);
  CHECK(rep.subspace_dim == 0);
  CHECK(rep.tilt_stable);
}

TEST_CASE("tilt stability: constructed rank-deficient fixture fails the test") {
  const auto prob = rank_deficient();
  REQUIRE(kkt_residual(prob, vec({1, 0}), 1.0) <= 1e-12);  // stationary candidate
  const auto rep = check_tilt_stability(prob, vec({1, 0}));
  CHECK_FALSE(rep.tilt_stable);
  CHECK(rep.ker_dim == 1);
  CHECK(rep.subspace_dim == 2);
  CHECK(rep.max_principal_cosine == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("tilt stability: verdict invariant under joint positive rescaling of f and g") {
  const double c = 2.5;
  {
    ProblemInstance scaled(
        std::make_shared<LeastSquaresLoss>(std::sqrt(c) * Matrix::Identity(2, 2),
                                           std::sqrt(c) * vec({2, -1})),
        std::make_shared<L1Reg>(c), "remark34_scaled");
    const auto rep = check_tilt_stability(scaled, vec({1, 0}));
    CHECK(rep.tilt_stable);
    CHECK(rep.subspace_dim == 2);
  }
  {
    Matrix a(1, 2);
    a << std::sqrt(c), std::sqrt(c);
    ProblemInstance scaled(
        std::make_shared<LeastSquaresLoss>(a, Vector::Constant(1, 2.0 * std::sqrt(c))),
        std::make_shared<L1Reg>(c), "rank_deficient_scaled");
    CHECK_FALSE(check_tilt_stability(scaled, vec({1, 0})).tilt_stable);
  }
}

TEST_CASE("tilt stability: strongly convex losses are stable for every regularizer") {
  CounterRng rng(1, "tiltsc");
  const Index n = 5;
  Matrix a(n, n);
  for (Index i = 0; i < n; ++i) a.row(i) = rng.gauss_vector(n).transpose();
  a += 3.0 * Matrix::Identity(n, n);
  const Vector b = rng.gauss_vector(n);
  Vector w = vec({2, 1.5, 1, 0.5, 0.2});
  std::vector<std::shared_ptr<const RegularizerOracle>> regs = {
      std::make_shared<L1Reg>(0.7), std::make_shared<LInfReg>(0.7),
      std::make_shared<SortedL1Reg>(w, 0.7), std::make_shared<TV1DReg>(n, 0.7),
      std::make_shared<ZeroReg>()};
  for (const auto& reg : regs) {
    ProblemInstance prob(std::make_shared<LeastSquaresLoss>(a, b), reg, "sc");
    const Vector x = reference_solution(prob, 1e-11);
    const auto rep = check_tilt_stability(prob, x);
    CHECK(rep.tilt_stable);
    CHECK(rep.ker_dim == 0);
  }
}

TEST_CASE("tilt stability: far-from-stationary candidate is rejected") {
  const auto prob = remark34();
  // -grad f(5, 5) = (-3, -6), far outside the dual box
  CHECK_THROWS_AS(check_tilt_stability(prob, vec({5, 5})), std::invalid_argument);
}

TEST_CASE("convergence_order: exact quadratic and linear synthetic sequences") {
  // e_{k+1} = e_k^2 from 5e-3
  std::vector<double> quad;
  double e = 5e-3;
  for (int i = 0; i < 4; ++i) {
    quad.push_back(e);
    e = e * e;
  }
  const auto tq = synthetic_newton_trace(quad);
  const auto oq = convergence_order(tq, Vector::Zero(2));
  REQUIRE(oq.order.has_value());
  CHECK(*oq.order == doctest::Approx(2.0).epsilon(0.05));

  // e_k = 0.5^k
  std::vector<double> lin;
  for (int k = 7; k <= 40; ++k) lin.push_back(std::pow(0.5, k));
  const auto tl = synthetic_newton_trace(lin);
  const auto ol = convergence_order(tl, Vector::Zero(2));
  REQUIRE(ol.order.has_value());
  CHECK(*ol.order == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("convergence_order: insufficient tail reported distinctly") {
  const auto t = synthetic_newton_trace({1e-3, 1e-6});
  const auto o = convergence_order(t, Vector::Zero(2));
  CHECK_FALSE(o.order.has_value());
  CHECK(o.tail_len == 2);
}

TEST_CASE("identification_report: Remark 3.4 ends on the full-plane subspace") {
  const auto prob = remark34();
  SolverConfig cfg;
  cfg.method = Method::newton_ista;
  cfg.step_mode = StepMode::fixed;
  cfg.alpha = 0.5;
  cfg.switch_tol = 0.1;
  cfg.kkt_tol = 1e-12;
  const auto tr = solve(prob, cfg, vec({0.8, 0.3}));
  REQUIRE(tr.status == TerminalStatus::converged);
  const auto rep = identification_report(tr);
  CHECK(rep.terminal_dim == 2);
  CHECK(rep.identified_at.has_value());
}

TEST_CASE("identification_report: pure first-order trace has no identification point") {
  const auto prob = remark34();
  SolverConfig cfg;
  cfg.method = Method::ista;
  cfg.step_mode = StepMode::fixed;
  cfg.alpha = 0.5;
  const auto tr = solve(prob, cfg, vec({0, 0}));
  const auto rep = identification_report(tr);
  CHECK_FALSE(rep.identified_at.has_value());
  CHECK(rep.dim_history.empty());
}

TEST_CASE("identification_report: desk lasso identifies the reference support") {
  auto gen = bench::gen_lasso(bench::ExperimentSpec::lasso(7));
  const Vector x_ref = reference_solution(gen.prob, 1e-12);
  SolverConfig cfg;
  cfg.method = Method::newton_fista;
  cfg.kkt_tol = 1e-8;
  const auto tr = solve(gen.prob, cfg, gen.x0);
  REQUIRE(tr.status == TerminalStatus::converged);
  const auto rep = identification_report(tr);
  REQUIRE(rep.identified_at.has_value());
  REQUIRE(rep.terminal_subspace.has_value());
  for (Index i = 0; i < gen.prob.n; ++i)
    if (std::abs(x_ref[i]) > 1e-6)
      CHECK(rep.terminal_subspace->contains(Vector::Unit(gen.prob.n, i)));
}
