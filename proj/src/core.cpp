#include "polynewt/core.hpp"

#include <cmath>
#include <stdexcept>

#include "polynewt/losses.hpp"

namespace polynewt {

bool fenchel_young_check(const RegularizerOracle& reg, const Vector& y, const Vector& u) {
  if (!y.allFinite() || !u.allFinite())
    throw std::invalid_argument("fenchel_young_check: non-finite input");
  const double gy = reg.value(y);
  if (!std::isfinite(gy)) return false;
  if (!reg.dual_domain_check(u)) return false;  // g*(u) = +inf
  const double uy = u.dot(y);
  return std::abs(gy - uy) <= 1e-8 * (1.0 + std::abs(uy));
}

double objective(const ProblemInstance& prob, const Vector& x) {
  if (!prob.loss->domain_check(x)) return kInf;
  const double g = prob.reg->value(x);
  if (!std::isfinite(g)) return kInf;
  return prob.loss->value(x) + g;
}

double kkt_residual(const ProblemInstance& prob, const Vector& x, double alpha) {
  if (alpha <= 0) throw std::invalid_argument("kkt_residual: alpha must be positive");
  if (!prob.loss->domain_check(x)) return kInf;
  const Vector grad = prob.loss->gradient(x);
  const Vector step = prob.reg->prox(x - alpha * grad, alpha);
  return (x - step).norm() / (1.0 + x.norm() + grad.norm());
}

double kkt_residual_ls_paper(const LeastSquaresLoss& loss, const RegularizerOracle& reg,
                             const Vector& x, double alpha) {
  if (alpha <= 0) throw std::invalid_argument("kkt_residual_ls_paper: alpha must be positive");
  const Vector r = loss.residual(x);
  const Vector step = reg.prox(x - loss.A().transpose() * r, alpha);
  return (x - step).norm() / (1.0 + x.norm() + r.norm());
}

}  // namespace polynewt
