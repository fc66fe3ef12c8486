#include "polynewt/subspace.hpp"

#include <Eigen/QR>
#include <stdexcept>

namespace polynewt {

Matrix SubspaceBasis::projector() const {
  if (rank == 0) return Matrix::Zero(basis.rows(), basis.rows());
  return basis * basis.transpose();
}

Vector SubspaceBasis::project(const Vector& v) const {
  if (rank == 0) return Vector::Zero(v.size());
  return basis * (basis.transpose() * v);
}

bool SubspaceBasis::contains(const Vector& v, double tol) const {
  return (v - project(v)).norm() <= tol * (1.0 + v.norm());
}

SubspaceBasis SubspaceBasis::zero(Index n, double build_tol) {
  return {Matrix::Zero(n, 0), 0, build_tol};
}

SubspaceBasis SubspaceBasis::full(Index n, double build_tol) {
  return {Matrix::Identity(n, n), n, build_tol};
}

SubspaceBasis SubspaceBasis::from_span(const Matrix& spanning, double build_tol) {
  const Index n = spanning.rows();
  if (spanning.cols() == 0 || spanning.lpNorm<Eigen::Infinity>() == 0.0)
    return zero(n, build_tol);
  Eigen::ColPivHouseholderQR<Matrix> qr(spanning);
  qr.setThreshold(build_tol);
  const Index r = qr.rank();
  if (r == 0) return zero(n, build_tol);
  Matrix q = qr.householderQ() * Matrix::Identity(n, r);
  return {std::move(q), r, build_tol};
}

double projector_distance(const SubspaceBasis& a, const SubspaceBasis& b) {
  if (a.ambient_dim() != b.ambient_dim())
    throw std::invalid_argument("projector_distance: ambient dimensions differ");
  return (a.projector() - b.projector()).norm();
}

}  // namespace polynewt
