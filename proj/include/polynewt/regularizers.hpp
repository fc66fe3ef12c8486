#pragma once

#include <memory>
#include <optional>

#include "polynewt/oracles.hpp"
#include "polynewt/prox.hpp"

namespace polynewt {

// Relative activity band for every strict-inequality test against the dual
// polyhedron (|z_i| < lambda, s_k < Lambda_k, |prefix| < lambda).
inline constexpr double kActTol = 1e-8;

// Dual-domain membership slack, absolute: 1e-9 * (1 + lambda).
inline double dual_feas_slack(double lambda) { return 1e-9 * (1.0 + lambda); }

// ---------------------------------------------------------------------------
// Effective subspaces par dg*(z), one formula per family. All comparisons
// are relative, so scaling (z, params) jointly leaves the result unchanged.

/// span{e_i : |z_i| >= lambda(1 - act_tol)} for g = lambda*|.|_1.
SubspaceBasis l1_effective_subspace(const Vector& z, double lambda);

/// span({e_i : |z_i| <= act_tol*lambda} + the sign vector of the remaining
/// coordinates) for g = lambda*|.|_inf; the whole space when z ~ 0.
SubspaceBasis linf_effective_subspace(const Vector& z, double lambda);

/// Sorted-l1 subspace: union of span(ds_k(z)) spanning sets over the active
/// partial-sum constraints, orthonormalized. weights are the final
/// (scaled) nonincreasing weights.
SubspaceBasis sorted_l1_effective_subspace(const Vector& z, const Vector& weights);

/// 1D TV subspace: block-indicator basis, consecutive coordinates joined
/// where the prefix sum is strictly inside [-lambda, lambda].
SubspaceBasis tv1d_effective_subspace(const Vector& z, double lambda);

/// span{e_i : z_i >= lambda(1 - act_tol)} for g = lambda*sum + indicator(>=0).
SubspaceBasis nonneg_l1_effective_subspace(const Vector& z, double lambda);

/// par dg*(z) for the composition g(x) = h(Kx): preimage under K of
/// S = par(dh*(y) ∩ Im K), with K* y = z and h*(y) = g*(z). When y is not
/// supplied it is taken as the minimum-norm solution of K* y = z, which
/// must land in dom h*. Exact in the cases this library needs (K
/// surjective; dh*(y) a single point; span dh*(y) inside or transversal to
/// Im K); other intersections are rejected rather than approximated.
SubspaceBasis composite_effective_subspace(const Matrix& K, const RegularizerOracle& inner,
                                           const Vector& z,
                                           const std::optional<Vector>& y = std::nullopt);

// ---------------------------------------------------------------------------
// Families

class L1Reg final : public RegularizerOracle {
 public:
  explicit L1Reg(double lambda);
  std::string kind() const override { return "l1"; }
  double scale() const override { return lambda_; }
  double value(const Vector& x) const override;
  Vector prox(const Vector& v, double alpha) const override;
  SubspaceBasis effective_subspace(const Vector& z) const override;
  bool dual_domain_check(const Vector& z) const override;

 private:
  double lambda_;
};

class LInfReg final : public RegularizerOracle {
 public:
  explicit LInfReg(double lambda);
  std::string kind() const override { return "linf"; }
  double scale() const override { return lambda_; }
  double value(const Vector& x) const override;
  Vector prox(const Vector& v, double alpha) const override;
  SubspaceBasis effective_subspace(const Vector& z) const override;
  bool dual_domain_check(const Vector& z) const override;

 private:
  double lambda_;
};

/// Sorted l1 norm (SLOPE): lambda * sum_i w_i |x|_(i) with base weights
/// w_1 >= ... >= w_n >= 0, w_1 > 0. OSCAR is w_i = w1 + w2*(n-i).
class SortedL1Reg final : public RegularizerOracle {
 public:
  SortedL1Reg(Vector base_weights, double lambda = 1.0);
  static SortedL1Reg oscar(Index n, double w1, double w2);

  std::string kind() const override { return "slope"; }
  double scale() const override { return lambda_; }
  Index dim() const override { return weights_.size(); }
  double value(const Vector& x) const override;
  Vector prox(const Vector& v, double alpha) const override;
  SubspaceBasis effective_subspace(const Vector& z) const override;
  bool dual_domain_check(const Vector& z) const override;
  const Vector& base_weights() const { return weights_; }

 private:
  Vector weights_;
  double lambda_;
};

class TV1DReg final : public RegularizerOracle {
 public:
  TV1DReg(Index n, double lambda);
  std::string kind() const override { return "tv1d"; }
  double scale() const override { return lambda_; }
  Index dim() const override { return n_; }
  double value(const Vector& x) const override;
  Vector prox(const Vector& v, double alpha) const override;
  SubspaceBasis effective_subspace(const Vector& z) const override;
  bool dual_domain_check(const Vector& z) const override;

  /// The (n-1) x n first-difference matrix.
  static Matrix difference_matrix(Index n);

 private:
  Index n_;
  double lambda_;
};

class NonnegL1Reg final : public RegularizerOracle {
 public:
  explicit NonnegL1Reg(double lambda);
  std::string kind() const override { return "nonneg_l1"; }
  double scale() const override { return lambda_; }
  double value(const Vector& x) const override;
  Vector prox(const Vector& v, double alpha) const override;
  SubspaceBasis effective_subspace(const Vector& z) const override;
  bool dual_domain_check(const Vector& z) const override;

 private:
  double lambda_;
};

/// g == 0; dom g* = {0} and par dg*(0) is the whole space. Used by tests
/// and as the smooth-only solver configuration.
class ZeroReg final : public RegularizerOracle {
 public:
  ZeroReg() = default;
  std::string kind() const override { return "zero"; }
  double scale() const override { return 1.0; }
  double value(const Vector&) const override { return 0.0; }
  Vector prox(const Vector& v, double) const override { return v; }
  SubspaceBasis effective_subspace(const Vector& z) const override;
  bool dual_domain_check(const Vector& z) const override;
};

}  // namespace polynewt
