#pragma once

#include <memory>
#include <optional>
#include <string>
#include <utility>

#include "polynewt/subspace.hpp"
#include "polynewt/types.hpp"

namespace polynewt {

/// Twice continuously differentiable convex fidelity term. Implementations
/// are immutable after construction and safe to share across solver runs.
class SmoothLossOracle {
 public:
  virtual ~SmoothLossOracle() = default;

  virtual Index dim() const = 0;
  virtual double value(const Vector& x) const = 0;
  virtual Vector gradient(const Vector& x) const = 0;
  virtual std::pair<double, Vector> value_and_gradient(const Vector& x) const {
    return {value(x), gradient(x)};
  }
  virtual Matrix hessian(const Vector& x) const = 0;
  virtual Vector hess_vec(const Vector& x, const Vector& v) const {
    return hessian(x) * v;
  }
  /// Upper bound on the gradient Lipschitz constant, when known.
  virtual std::optional<double> lipschitz_grad_hint() const { return std::nullopt; }
  /// True when x lies in the (open) domain of the loss.
  virtual bool domain_check(const Vector& x) const { return x.allFinite(); }
};

/// Polyhedral regularizer lambda * g0. The conjugate of every family in
/// this library is the indicator of an explicit polyhedron, so conjugate
/// values are 0 on the dual domain and +inf outside.
class RegularizerOracle {
 public:
  static constexpr Index kAnyDim = -1;

  virtual ~RegularizerOracle() = default;

  virtual std::string kind() const = 0;
  /// Multiplicative scale lambda applied to the base regularizer.
  virtual double scale() const = 0;
  /// Required ambient dimension, or kAnyDim when the family is dimension-free.
  virtual Index dim() const { return kAnyDim; }

  /// Extended-real value; +inf outside dom g.
  virtual double value(const Vector& x) const = 0;
  /// prox of alpha*g at v, alpha > 0.
  virtual Vector prox(const Vector& v, double alpha) const = 0;
  /// Orthonormal basis of par dg*(z); throws on dual-infeasible z.
  virtual SubspaceBasis effective_subspace(const Vector& z) const = 0;
  /// z in dom g* up to the membership tolerance 1e-9*(1+lambda).
  virtual bool dual_domain_check(const Vector& z) const = 0;
};

struct ProblemInstance {
  Index n = 0;
  std::shared_ptr<const SmoothLossOracle> loss;
  std::shared_ptr<const RegularizerOracle> reg;
  std::string name;

  ProblemInstance() = default;
  ProblemInstance(std::shared_ptr<const SmoothLossOracle> loss_in,
                  std::shared_ptr<const RegularizerOracle> reg_in, std::string name_in);
};

}  // namespace polynewt
