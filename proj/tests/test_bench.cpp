#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>

#include "polynewt/bench.hpp"
#include "polynewt/diagnostics.hpp"
#include "polynewt/io.hpp"
#include "polynewt/losses.hpp"
#include "polynewt/regularizers.hpp"

using namespace polynewt;
namespace fs = std::filesystem;

TEST_CASE("gen_lasso: paper shape, sparsity, penalty rule, determinism") {
  const auto spec = bench::ExperimentSpec::lasso(7);
  const auto g1 = bench::gen_lasso(spec);
  const auto* ls = dynamic_cast<const LeastSquaresLoss*>(g1.prob.loss.get());
  REQUIRE(ls != nullptr);
  CHECK(ls->A().rows() == 48);
  CHECK(ls->A().cols() == 128);
  CHECK((g1.x_star.array() != 0.0).count() == 8);
  const double lam = 0.1 * (ls->A().transpose() * ls->b()).lpNorm<Eigen::Infinity>();
  CHECK(g1.lambda == doctest::Approx(lam).epsilon(1e-15));
  CHECK(g1.prob.reg->scale() == doctest::Approx(lam).epsilon(1e-15));
  CHECK(g1.x0.norm() == 0.0);

  const auto g2 = bench::gen_lasso(spec);
  CHECK(g1.data_hash == g2.data_hash);
  const auto* ls2 = dynamic_cast<const LeastSquaresLoss*>(g2.prob.loss.get());
  CHECK((ls->A() - ls2->A()).norm() == 0.0);
  CHECK((ls->b() - ls2->b()).norm() == 0.0);

  auto other = spec;
  other.seed = 8;
  CHECK(bench::gen_lasso(other).data_hash != g1.data_hash);
}

TEST_CASE("gen_lasso: noiseless overdetermined variant recovers the support") {
  bench::ExperimentSpec spec = bench::ExperimentSpec::lasso(11);
  spec.m = 30;
  spec.n = 10;
  spec.sparsity = 3;
  spec.noise_var = 0.0;
  spec.lambda_c = 1e-8;
  const auto g = bench::gen_lasso(spec);
  const Vector ref = reference_solution(g.prob, 1e-12);
  for (Index i = 0; i < g.prob.n; ++i)
    if (g.x_star[i] != 0.0) CHECK(std::abs(ref[i]) > 1e-3 * std::abs(g.x_star[i]));
}

TEST_CASE("gen_linf: exactly eight coordinates at the shared maximal magnitude") {
  const auto g = bench::gen_linf(bench::ExperimentSpec::linf(7));
  const double mx = g.x_star.lpNorm<Eigen::Infinity>();
  CHECK(mx == 1.0);
  int at_max = 0;
  for (Index i = 0; i < g.x_star.size(); ++i)
    if (std::abs(g.x_star[i]) == mx) ++at_max;
  CHECK(at_max == 8);
  CHECK(g.prob.n == 64);
  CHECK(dynamic_cast<const LInfReg*>(g.prob.reg.get()) != nullptr);
}

TEST_CASE("gen_tv: the verbatim block signal and its TV value") {
  const auto g = bench::gen_tv(bench::ExperimentSpec::tv(7));
  CHECK(g.prob.n == 90);
  CHECK(g.x_star[0] == 0.5);
  CHECK(g.x_star[30] == -0.3);
  CHECK(g.x_star[60] == 0.8);
  CHECK(g.x_star[89] == 0.8);
  // g(x*) = lambda * (|0.5 - (-0.3)| + |-0.3 - 0.8|) = lambda * 1.9
  CHECK(g.prob.reg->value(g.x_star) ==
        doctest::Approx(g.lambda * 1.9).epsilon(1e-12));
}

TEST_CASE("gen_oscar: standardized columns and OSCAR weights") {
  const auto g = bench::gen_oscar(bench::ExperimentSpec::oscar(7));
  const auto* ls = dynamic_cast<const LeastSquaresLoss*>(g.prob.loss.get());
  REQUIRE(ls != nullptr);
  const Index m = ls->A().rows(), n = ls->A().cols();
  CHECK(m == 300);
  CHECK(n == 300);
  for (Index j = 0; j < n; j += 37) {
    CHECK(std::abs(ls->A().col(j).mean()) <= 1e-12);
    const double var = ls->A().col(j).squaredNorm() / static_cast<double>(m - 1);
    CHECK(var == doctest::Approx(1.0).epsilon(1e-12));
  }
  const auto* reg = dynamic_cast<const SortedL1Reg*>(g.prob.reg.get());
  REQUIRE(reg != nullptr);
  const Vector& w = reg->base_weights();
  // w_i = lambda1 + lambda2 (n - i), lambda2 = lambda1
  CHECK(w[n - 1] == doctest::Approx(g.lambda).epsilon(1e-12));
  CHECK(w[0] == doctest::Approx(g.lambda * static_cast<double>(n)).epsilon(1e-12));
  for (Index i = 0; i + 1 < n; ++i) CHECK(w[i] >= w[i + 1]);
  // block layout: 45 zeros, 15 at 3.0, 75 zeros, 15 at -4.0, 60 zeros,
  // 15 at 6.0, 75 zeros
  CHECK(g.x_star[44] == 0.0);
  CHECK(g.x_star[45] == 3.0);
  CHECK(g.x_star[59] == 3.0);
  CHECK(g.x_star[60] == 0.0);
  CHECK(g.x_star[135] == -4.0);
  CHECK(g.x_star[149] == -4.0);
  CHECK(g.x_star[210] == 6.0);
  CHECK(g.x_star[224] == 6.0);
  CHECK(g.x_star[225] == 0.0);
  CHECK(g.x_star.cwiseAbs().maxCoeff() == 6.0);
}

TEST_CASE("gen_poisson_sr: penalty rule, initialization, determinism") {
  const auto spec = bench::ExperimentSpec::poisson_sr(7);
  const auto g1 = bench::gen_poisson_sr(spec);
  const auto* kl = dynamic_cast<const PoissonKLLoss*>(g1.prob.loss.get());
  REQUIRE(kl != nullptr);
  CHECK(g1.prob.n == 256);
  CHECK(kl->counts().size() == 64);
  // lambda = 0.5 |max(grad f(0), 0)|_inf, recomputed directly
  const Vector g0 = kl->gradient(Vector::Zero(256));
  CHECK(g1.lambda == doctest::Approx(0.5 * g0.cwiseMax(0.0).lpNorm<Eigen::Infinity>()));
  CHECK(g1.lambda > 0.0);
  // x0 = H^T M^T y
  CHECK((g1.x0 - kl->model().apply_adjoint(kl->counts())).norm() == 0.0);

  const auto g2 = bench::gen_poisson_sr(spec);
  CHECK(g1.data_hash == g2.data_hash);
  CHECK((kl->counts() - dynamic_cast<const PoissonKLLoss*>(g2.prob.loss.get())->counts())
            .norm() == 0.0);
}

TEST_CASE("gen_poisson_sr: background-only field has mean counts near the background") {
  auto spec = bench::ExperimentSpec::poisson_sr(5);
  spec.n_sources = 0;
  const auto g = bench::gen_poisson_sr(spec);
  const auto* kl = dynamic_cast<const PoissonKLLoss*>(g.prob.loss.get());
  CHECK(g.x_star.norm() == 0.0);
  CHECK(kl->counts().mean() == doctest::Approx(1.0).epsilon(0.5));
}

TEST_CASE("run_suite: toy suite converges with tiny distance to the exact minimizer") {
  const auto result = bench::run_suite(bench::suite_specs("toy", 0), "");
  CHECK(result.all_converged);
  REQUIRE(result.records.size() == 4);
  for (const auto& r : result.records) {
    CHECK(r.converged);
    CHECK(r.dist_to_ref <= 1e-10);
    if (r.method.rfind("newton", 0) == 0) CHECK(r.newton_steps_accepted >= 1);
  }
}

TEST_CASE("run_suite: empty spec list is an empty success") {
  const auto result = bench::run_suite({}, "");
  CHECK(result.all_converged);
  CHECK(result.records.empty());
}

TEST_CASE("run_suite: determinism of the wall-free content hash") {
  const auto a = bench::run_suite(bench::suite_specs("toy", 0), "");
  const auto b = bench::run_suite(bench::suite_specs("toy", 0), "");
  CHECK(a.content_hash == b.content_hash);
}

TEST_CASE("run_suite: unknown suite is rejected") {
  CHECK_THROWS_AS(bench::suite_specs("nope", 7), std::invalid_argument);
}

TEST_CASE("tv experiment: reference is piecewise constant on the identified groups") {
  auto spec = bench::ExperimentSpec::tv(7);
  const auto gen = bench::generate(spec);
  const Vector x_ref = reference_solution(gen.prob, 1e-12);
  SolverConfig cfg;
  cfg.method = Method::newton_fista;
  cfg.kkt_tol = 1e-8;
  const auto tr = solve(gen.prob, cfg, gen.x0);
  REQUIRE(tr.status == TerminalStatus::converged);
  const auto ident = identification_report(tr);
  REQUIRE(ident.terminal_subspace.has_value());
  CHECK(ident.terminal_dim <= gen.prob.n);
  // group structure: the terminal basis columns are block indicators; within
  // each block the reference varies by no more than 1e-6
  const auto& basis = ident.terminal_subspace->basis;
  for (Index j = 0; j < basis.cols(); ++j) {
    double lo = kInf, hi = -kInf;
    for (Index i = 0; i < basis.rows(); ++i) {
      if (basis(i, j) == 0.0) continue;
      lo = std::min(lo, x_ref[i]);
      hi = std::max(hi, x_ref[i]);
    }
    CHECK(hi - lo <= 1e-6);
  }
}

TEST_CASE("run_suite writes traces, manifests and a summary") {
  const fs::path dir = fs::temp_directory_path() / "polynewt_toy_suite";
  fs::remove_all(dir);
  const auto result = bench::run_suite(bench::suite_specs("toy", 0), dir);
  CHECK(result.all_converged);
  CHECK(fs::exists(dir / "summary.csv"));
  CHECK(fs::exists(dir / "summary.hash"));
  CHECK(fs::exists(dir / "remark34_seed0_manifest.json"));
  CHECK(fs::exists(dir / "remark34_seed0_newton_ista_trace.csv"));
  fs::remove_all(dir);
}
