#include "polynewt/diagnostics.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <cmath>
#include <stdexcept>

namespace polynewt {

TiltReport check_tilt_stability(const ProblemInstance& prob, const Vector& x_candidate) {
  if (!prob.loss->domain_check(x_candidate))
    throw std::invalid_argument("check_tilt_stability: candidate outside dom f");
  TiltReport rep;
  rep.kkt_at_candidate = kkt_residual(prob, x_candidate, 1.0);
  rep.candidate_warning = rep.kkt_at_candidate > 1e-6;

  // kernel of the Hessian
  const Matrix hess = prob.loss->hessian(x_candidate);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(hess);
  if (eig.info() != Eigen::Success)
    throw std::runtime_error("check_tilt_stability: eigendecomposition failed");
  const Vector& ev = eig.eigenvalues();
  const double lam_max = std::max(ev[ev.size() - 1], 0.0);
  Index ker_dim = 0;
  for (Index i = 0; i < ev.size(); ++i)
    if (ev[i] < rep.kernel_tol * lam_max || lam_max == 0.0) ++ker_dim;
  rep.ker_dim = ker_dim;
  const Matrix kernel_basis = eig.eigenvectors().leftCols(ker_dim);

  // dual point, projected onto dom g* when slightly outside. prox of g at
  // step 1 gives the Moreau decomposition z - prox_g(z) = P_{dom g*}(z)
  // because g* is an indicator for every family here.
  Vector zbar = -prob.loss->gradient(x_candidate);
  if (!prob.reg->dual_domain_check(zbar)) {
    const Vector projected = zbar - prob.reg->prox(zbar, 1.0);
    rep.dual_projection_dist = (zbar - projected).norm();
    if (rep.dual_projection_dist > 1e-6 * (1.0 + zbar.norm()))
      throw std::invalid_argument(
          "check_tilt_stability: -grad f(x) is far from dom g*; candidate is not stationary");
    rep.candidate_warning = rep.candidate_warning || rep.dual_projection_dist > 1e-8;
    zbar = projected;
  }

  const SubspaceBasis L = prob.reg->effective_subspace(zbar);
  rep.subspace_dim = L.rank;

  if (ker_dim == 0 || L.rank == 0) {
    rep.max_principal_cosine = 0.0;
    rep.tilt_stable = true;
    return rep;
  }
  Eigen::JacobiSVD<Matrix> svd(kernel_basis.transpose() * L.basis);
  rep.max_principal_cosine = svd.singularValues()[0];
  rep.tilt_stable = rep.max_principal_cosine <= 1.0 - rep.transversality_tol;
  return rep;
}

ConvergenceOrder convergence_order(const SolverTrace& trace, const Vector& x_ref) {
  ConvergenceOrder out;
  std::vector<double> log_e;
  for (const auto& r : trace.records) {
    if (r.step_kind != StepKind::newton) continue;
    if (r.x.size() == 0)
      throw std::invalid_argument("convergence_order: trace lacks recorded iterates");
    const double e = (r.x - x_ref).norm();
    if (e > 1e-13 && e < 1e-2) log_e.push_back(std::log(e));
  }
  out.tail_len = static_cast<int>(log_e.size());
  if (out.tail_len < 3) return out;

  // slope of log e_{k+1} vs log e_k
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const int m = out.tail_len - 1;
  for (int i = 0; i < m; ++i) {
    sx += log_e[i];
    sy += log_e[i + 1];
    sxx += log_e[i] * log_e[i];
    sxy += log_e[i] * log_e[i + 1];
  }
  const double denom = m * sxx - sx * sx;
  if (std::abs(denom) < 1e-12) return out;  // degenerate abscissae
  out.order = (m * sxy - sx * sy) / denom;
  return out;
}

IdentificationReport identification_report(const SolverTrace& trace) {
  IdentificationReport rep;
  std::vector<std::pair<int, const SubspaceBasis*>> subspaces;
  for (const auto& r : trace.records) {
    if (!r.newton) continue;
    rep.dim_history.emplace_back(r.k, r.newton->reduced_dim);
    subspaces.emplace_back(r.k, &r.newton->subspace);
  }
  if (subspaces.empty()) return rep;

  const SubspaceBasis& terminal = *subspaces.back().second;
  rep.terminal_subspace = terminal;
  rep.terminal_dim = terminal.rank;
  std::optional<int> first;
  for (const auto& [k, s] : subspaces) {
    if (projector_distance(*s, terminal) <= 1e-8) {
      if (!first) first = k;
    } else {
      first.reset();  // must remain equal through the end
    }
  }
  rep.identified_at = first;
  return rep;
}

}  // namespace polynewt
