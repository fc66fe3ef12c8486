#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracle_helpers.hpp"
#include "polynewt/regularizers.hpp"
#include "polynewt/rng.hpp"

using namespace polynewt;
using namespace polynewt::testing;

namespace {
Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Index>(v.size()));
  Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

bool same_subspace(const SubspaceBasis& a, const SubspaceBasis& b, double tol = 1e-8) {
  return a.rank == b.rank && projector_distance(a, b) <= tol;
}
}  // namespace

TEST_CASE("SubspaceBasis: orthonormality and rank from redundant spanning sets") {
  CounterRng rng(1, "subspace");
  for (int trial = 0; trial < 50; ++trial) {
    const Index n = 2 + static_cast<Index>(rng.below(6));
    const Index r = static_cast<Index>(rng.below(n + 1));
    Matrix gen(n, 2 * r + 1);
    Matrix base(n, std::max<Index>(r, 1));
    for (Index j = 0; j < base.cols(); ++j) base.col(j) = rng.gauss_vector(n);
    for (Index j = 0; j < gen.cols(); ++j) {
      gen.col(j).setZero();
      for (Index l = 0; l < r; ++l) gen.col(j) += rng.gauss() * base.col(l);
    }
    const auto sb = SubspaceBasis::from_span(gen);
    CHECK(sb.rank == r);
    if (sb.rank > 0) {
      const Matrix gram = sb.basis.transpose() * sb.basis;
      CHECK((gram - Matrix::Identity(sb.rank, sb.rank)).lpNorm<Eigen::Infinity>() <= 1e-10);
    }
    for (Index j = 0; j < gen.cols(); ++j) CHECK(sb.contains(gen.col(j), 1e-8));
  }
}

TEST_CASE("SubspaceBasis: zero and full") {
  const auto z = SubspaceBasis::zero(4);
  CHECK(z.rank == 0);
  CHECK(z.project(vec({1, 2, 3, 4})).norm() == 0.0);
  const auto f = SubspaceBasis::full(4);
  CHECK(f.rank == 4);
  CHECK(f.contains(vec({1, 2, 3, 4})));
}

TEST_CASE("l1 effective subspace: worked examples") {
  auto s = l1_effective_subspace(vec({1.0, 0.2, -1.0}), 1.0);
  CHECK(s.rank == 2);
  CHECK(s.contains(Vector::Unit(3, 0)));
  CHECK(s.contains(Vector::Unit(3, 2)));
  CHECK_FALSE(s.contains(Vector::Unit(3, 1)));

  CHECK(l1_effective_subspace(Vector::Zero(3), 1.0).rank == 0);
  CHECK(l1_effective_subspace(vec({2, 2, 2}), 2.0).rank == 3);
  CHECK_THROWS_AS(l1_effective_subspace(vec({1.5, 0, 0}), 1.0), std::invalid_argument);
}

TEST_CASE("linf effective subspace: worked examples") {
  auto s = linf_effective_subspace(vec({0.5, -0.5, 0.0}), 1.0);
  CHECK(s.rank == 2);
  CHECK(s.contains(Vector::Unit(3, 2)));
  Vector diag = vec({1, -1, 0});
  CHECK(s.contains(diag / diag.norm()));
  CHECK_FALSE(s.contains(vec({1, 1, 0})));

  // all-zero dual point: I(z) is everything, the whole space by the formula
  CHECK(linf_effective_subspace(Vector::Zero(4), 1.0).rank == 4);
  CHECK_THROWS_AS(linf_effective_subspace(vec({0.8, 0.4, 0.0}), 1.0), std::invalid_argument);
}

TEST_CASE("sorted l1 effective subspace: worked examples") {
  const Vector w = vec({2, 1});
  auto s = sorted_l1_effective_subspace(vec({1.5, 1.5}), w);
  CHECK(s.rank == 2);  // spanning set {(1,1), e1-e2}

  CHECK(sorted_l1_effective_subspace(vec({0.5, 0.5}), w).rank == 0);
  CHECK_THROWS_AS(sorted_l1_effective_subspace(vec({2.5, 0.0}), w), std::invalid_argument);
}

TEST_CASE("tv1d effective subspace: worked examples") {
  auto s = tv1d_effective_subspace(vec({1, 0, -1, 0}), 1.0);
  CHECK(s.rank == 3);
  // {x | x3 = x4}
  CHECK(s.contains(vec({1, 0, 0, 0})));
  CHECK(s.contains(vec({0, 1, 0, 0})));
  CHECK(s.contains(vec({0, 0, 1, 1})));
  CHECK_FALSE(s.contains(vec({0, 0, 1, -1})));

  auto all = tv1d_effective_subspace(Vector::Zero(5), 1.0);
  CHECK(all.rank == 1);
  CHECK(all.contains(Vector::Ones(5) / std::sqrt(5.0)));
  CHECK_THROWS_AS(tv1d_effective_subspace(vec({1, 1, 1, 1}), 1.0), std::invalid_argument);
}

TEST_CASE("tv1d shift invariance: the constant vector lies in every subspace") {
  TV1DReg reg(6, 0.7);
  CounterRng rng(3, "tvshift");
  for (int t = 0; t < 100; ++t) {
    const Vector z = random_dual_point(reg, rng, 6);
    CHECK(reg.effective_subspace(z).contains(Vector::Ones(6) / std::sqrt(6.0)));
  }
}

TEST_CASE("nonneg l1 effective subspace: worked examples") {
  auto s = nonneg_l1_effective_subspace(vec({1, 0, -3}), 1.0);
  CHECK(s.rank == 1);
  CHECK(s.contains(Vector::Unit(3, 0)));
  CHECK(nonneg_l1_effective_subspace(vec({0.2, -5, 0}), 1.0).rank == 0);
  CHECK_THROWS_AS(nonneg_l1_effective_subspace(vec({1.5, 0, 0}), 1.0), std::invalid_argument);
}

TEST_CASE("composite rule: identity operator reduces to the inner subspace") {
  L1Reg inner(1.0);
  CounterRng rng(5, "compid");
  for (int t = 0; t < 25; ++t) {
    const Vector z = random_dual_point(inner, rng, 4);
    const auto direct = inner.effective_subspace(z);
    const auto comp = composite_effective_subspace(Matrix::Identity(4, 4), inner, z);
    CHECK(same_subspace(direct, comp));
  }
}

TEST_CASE("composite rule: difference operator reproduces the TV subspace") {
  const Index n = 6;
  const Matrix d = TV1DReg::difference_matrix(n);
  const double lambda = 0.8;
  L1Reg inner(lambda);
  TV1DReg tv(n, lambda);
  CounterRng rng(6, "compd");
  for (int t = 0; t < 40; ++t) {
    const Vector z = random_dual_point(tv, rng, n);
    const auto specialized = tv.effective_subspace(z);
    const auto comp = composite_effective_subspace(d, inner, z);
    CHECK(same_subspace(specialized, comp));
  }
}

TEST_CASE("composite rule: kernel always survives at z = 0") {
  // K with a nontrivial kernel; dh*(0) = {0}, so the preimage is exactly Ker K
  Matrix k(2, 3);
  k << 1, 0, 1,
       0, 1, 1;
  L1Reg inner(1.0);
  const auto s = composite_effective_subspace(k, inner, Vector::Zero(3));
  CHECK(s.rank == 1);
  Vector kern = vec({1, 1, -1});
  CHECK(s.contains(kern / kern.norm()));
}

TEST_CASE("composite rule: infeasible z rejected") {
  // Im D^T excludes vectors with nonzero sum
  const Matrix d = TV1DReg::difference_matrix(4);
  L1Reg inner(1.0);
  CHECK_THROWS_AS(composite_effective_subspace(d, inner, vec({1, 1, 1, 1})),
                  std::invalid_argument);
}

TEST_CASE("brute-force equivalence on small dimensions, all five families") {
  CounterRng rng(11, "bf");
  for (Index n = 2; n <= 6; ++n) {
    const double lambda = 0.5 + rng.uniform();
    L1Reg l1(lambda);
    LInfReg linf(lambda);
    NonnegL1Reg nneg(lambda);
    TV1DReg tv(n, lambda);
    Vector w(n);
    double acc = 1.0 + rng.uniform();
    for (Index i = 0; i < n; ++i) {
      w[i] = acc;
      acc *= 0.5 + 0.5 * rng.uniform();
    }
    SortedL1Reg slope(w, lambda);

    for (int t = 0; t < 25; ++t) {
      {
        const Vector z = random_dual_point(l1, rng, n);
        CHECK(same_subspace(l1.effective_subspace(z), bf_l1_subspace(z, lambda)));
      }
      {
        const Vector z = random_dual_point(linf, rng, n);
        CHECK(same_subspace(linf.effective_subspace(z), bf_linf_subspace(z, lambda)));
      }
      {
        const Vector z = random_dual_point(nneg, rng, n);
        CHECK(same_subspace(nneg.effective_subspace(z), bf_nonneg_l1_subspace(z, lambda)));
      }
      {
        const Vector z = random_dual_point(tv, rng, n);
        CHECK(same_subspace(tv.effective_subspace(z), bf_tv1d_subspace(z, lambda)));
      }
      {
        const Vector z = random_dual_point(slope, rng, n);
        CHECK(same_subspace(slope.effective_subspace(z),
                            bf_sorted_l1_subspace(z / lambda, w)));
      }
    }
  }
}

TEST_CASE("monotone activity: pushing |z_i| to the boundary only grows the l1 subspace") {
  CounterRng rng(13, "mono");
  const double lambda = 1.3;
  L1Reg reg(lambda);
  for (int t = 0; t < 60; ++t) {
    const Index n = 3 + static_cast<Index>(rng.below(4));
    Vector z = random_dual_point(reg, rng, n);
    const auto before = reg.effective_subspace(z);
    Vector z2 = z;
    for (Index i = 0; i < n; ++i)
      if (rng.uniform() < 0.4) z2[i] = (z2[i] >= 0 ? lambda : -lambda);
    const auto after = reg.effective_subspace(z2);
    CHECK(after.rank >= before.rank);
    for (Index j = 0; j < before.rank; ++j) CHECK(after.contains(before.basis.col(j)));
  }
}

TEST_CASE("scale law: scaled-family subspace matches the base family at z/lambda") {
  CounterRng rng(17, "scale");
  const double lambda = 2.75;
  const Index n = 5;
  L1Reg l1(lambda), l1_base(1.0);
  LInfReg li(lambda), li_base(1.0);
  NonnegL1Reg nn(lambda), nn_base(1.0);
  TV1DReg tv(n, lambda), tv_base(n, 1.0);
  Vector w = vec({3, 2, 1.5, 1, 1});
  SortedL1Reg sl(w, lambda), sl_base(w, 1.0);
  auto pairs = [&](const RegularizerOracle& scaled, const RegularizerOracle& base) {
    for (int t = 0; t < 30; ++t) {
      const Vector z = random_dual_point(scaled, rng, n);
      CHECK(same_subspace(scaled.effective_subspace(z), base.effective_subspace(z / lambda)));
    }
  };
  pairs(l1, l1_base);
  pairs(li, li_base);
  pairs(nn, nn_base);
  pairs(tv, tv_base);
  pairs(sl, sl_base);
}
