#include "polynewt/newton_step.hpp"

#include <Eigen/Eigenvalues>
#include <stdexcept>

namespace polynewt {

NewtonStepReport newton_direction(const HessOp& hess_vec, const Vector& rhs,
                                  const SubspaceBasis& L) {
  const Index n = rhs.size();
  if (L.ambient_dim() != n)
    throw std::invalid_argument("newton_direction: subspace/rhs dimension mismatch");
  NewtonStepReport rep;
  rep.reduced_dim = L.rank;
  rep.subspace = L;
  if (L.rank == 0) {
    rep.direction = Vector::Zero(n);
    return rep;
  }

  const Index r = L.rank;
  Matrix hb(n, r);
  for (Index j = 0; j < r; ++j) hb.col(j) = hess_vec(L.basis.col(j));
  Matrix hr = L.basis.transpose() * hb;
  const Vector gr = L.basis.transpose() * rhs;

  const double scale = hr.lpNorm<Eigen::Infinity>();
  if ((hr - hr.transpose()).lpNorm<Eigen::Infinity>() > 1e-8 * (1.0 + scale))
    throw std::invalid_argument("newton_direction: reduced Hessian is not symmetric");
  hr = 0.5 * (hr + hr.transpose());

  auto solve = [&](const Matrix& h) -> std::pair<bool, Vector> {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(h);
    if (eig.info() != Eigen::Success) return {false, Vector()};
    const Vector& ev = eig.eigenvalues();
    const double lam_max = ev[r - 1];
    const double lam_min = ev[0];
    if (!(lam_max > 0.0) || lam_min < 1e-12 * lam_max) return {false, Vector()};
    rep.reduced_condition = lam_max / lam_min;
    Vector c = eig.eigenvectors().transpose() * gr;
    c.array() /= ev.array();
    return {true, eig.eigenvectors() * c};
  };

  auto [ok, coeff] = solve(hr);
  if (!ok) {
    const double mu = 1e-10 * hr.trace() / static_cast<double>(r);
    auto [ok2, coeff2] = solve(hr + mu * Matrix::Identity(r, r));
    if (ok2) {
      rep.fallback = NewtonFallback::tikhonov;
      coeff = coeff2;
      ok = true;
    }
  }
  if (!ok) {
    rep.fallback = NewtonFallback::skipped;
    rep.direction = Vector::Zero(n);
    return rep;
  }

  rep.direction = L.basis * coeff;
  rep.residual_in_L = (L.basis.transpose() * (rhs - hess_vec(rep.direction))).norm();
  return rep;
}

NewtonStepReport newton_direction(const Matrix& hess, const Vector& rhs, const SubspaceBasis& L) {
  return newton_direction([&](const Vector& v) { return Vector(hess * v); }, rhs, L);
}

bool certify_optimality_system(const HessOp& hess_vec, const Vector& rhs, const SubspaceBasis& L,
                               const Vector& d) {
  if (!L.contains(d, 1e-8)) return false;
  if (L.rank == 0) return d.norm() <= 1e-12 * (1.0 + rhs.norm());
  const Vector res = L.basis.transpose() * (rhs - hess_vec(d));
  return res.norm() <= 1e-8 * (1.0 + rhs.norm());
}

bool certify_optimality_system(const Matrix& hess, const Vector& rhs, const SubspaceBasis& L,
                               const Vector& d) {
  return certify_optimality_system([&](const Vector& v) { return Vector(hess * v); }, rhs, L, d);
}

}  // namespace polynewt
