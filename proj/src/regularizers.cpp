#include "polynewt/regularizers.hpp"

#include <Eigen/LU>
#include <Eigen/QR>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <stdexcept>
#include <vector>

namespace polynewt {

namespace {

void require_finite(const Vector& z, const char* who) {
  if (!z.allFinite()) throw std::invalid_argument(std::string(who) + ": non-finite input");
}

void require_dual_feasible(bool ok, const char* who) {
  if (!ok) throw std::invalid_argument(std::string(who) + ": z outside dom g*");
}

SubspaceBasis coordinate_span(Index n, const std::vector<Index>& idx) {
  Matrix b = Matrix::Zero(n, static_cast<Index>(idx.size()));
  for (Index j = 0; j < static_cast<Index>(idx.size()); ++j) b(idx[j], j) = 1.0;
  return {std::move(b), static_cast<Index>(idx.size()), 1e-10};
}

double sign_of(double v) { return v > 0 ? 1.0 : (v < 0 ? -1.0 : 0.0); }

}  // namespace

// ---------------------------------------------------------------------------
// l1

SubspaceBasis l1_effective_subspace(const Vector& z, double lambda) {
  require_finite(z, "l1_effective_subspace");
  const double slack = dual_feas_slack(lambda);
  require_dual_feasible(z.lpNorm<Eigen::Infinity>() <= lambda + slack, "l1_effective_subspace");
  std::vector<Index> active;
  for (Index i = 0; i < z.size(); ++i)
    if (std::abs(z[i]) >= lambda * (1.0 - kActTol)) active.push_back(i);
  return coordinate_span(z.size(), active);
}

L1Reg::L1Reg(double lambda) : lambda_(lambda) {
  if (lambda <= 0) throw std::invalid_argument("L1Reg: lambda must be positive");
}

double L1Reg::value(const Vector& x) const { return lambda_ * x.lpNorm<1>(); }

Vector L1Reg::prox(const Vector& v, double alpha) const { return l1_prox(v, alpha, lambda_); }

SubspaceBasis L1Reg::effective_subspace(const Vector& z) const {
  return l1_effective_subspace(z / lambda_, 1.0);
}

bool L1Reg::dual_domain_check(const Vector& z) const {
  return z.allFinite() && z.lpNorm<Eigen::Infinity>() <= lambda_ + dual_feas_slack(lambda_);
}

// ---------------------------------------------------------------------------
// l_inf

SubspaceBasis linf_effective_subspace(const Vector& z, double lambda) {
  require_finite(z, "linf_effective_subspace");
  const Index n = z.size();
  require_dual_feasible(z.lpNorm<1>() <= lambda + dual_feas_slack(lambda),
                        "linf_effective_subspace");
  std::vector<Index> zero_set;
  for (Index i = 0; i < n; ++i)
    if (std::abs(z[i]) <= kActTol * lambda) zero_set.push_back(i);
  if (static_cast<Index>(zero_set.size()) == n) return SubspaceBasis::full(n);

  Matrix b = Matrix::Zero(n, static_cast<Index>(zero_set.size()) + 1);
  for (Index j = 0; j < static_cast<Index>(zero_set.size()); ++j) b(zero_set[j], j) = 1.0;
  Vector s = Vector::Zero(n);
  for (Index i = 0; i < n; ++i)
    if (std::abs(z[i]) > kActTol * lambda) s[i] = sign_of(z[i]);
  b.col(b.cols() - 1) = s / s.norm();
  const Index r = b.cols();
  return {std::move(b), r, 1e-10};
}

LInfReg::LInfReg(double lambda) : lambda_(lambda) {
  if (lambda <= 0) throw std::invalid_argument("LInfReg: lambda must be positive");
}

double LInfReg::value(const Vector& x) const { return lambda_ * x.lpNorm<Eigen::Infinity>(); }

Vector LInfReg::prox(const Vector& v, double alpha) const { return linf_prox(v, alpha, lambda_); }

SubspaceBasis LInfReg::effective_subspace(const Vector& z) const {
  return linf_effective_subspace(z / lambda_, 1.0);
}

bool LInfReg::dual_domain_check(const Vector& z) const {
  return z.allFinite() && z.lpNorm<1>() <= lambda_ + dual_feas_slack(lambda_);
}

// ---------------------------------------------------------------------------
// sorted l1

SubspaceBasis sorted_l1_effective_subspace(const Vector& z, const Vector& weights) {
  require_finite(z, "sorted_l1_effective_subspace");
  const Index n = z.size();
  if (weights.size() != n)
    throw std::invalid_argument("sorted_l1_effective_subspace: weights length mismatch");

  std::vector<Index> order(n);
  std::iota(order.begin(), order.end(), Index{0});
  std::sort(order.begin(), order.end(),
            [&](Index i, Index j) { return std::abs(z[i]) > std::abs(z[j]); });

  const double slack = dual_feas_slack(weights[0]);
  double s = 0.0, cap = 0.0;
  std::vector<Index> active_k;
  for (Index k = 0; k < n; ++k) {
    s += std::abs(z[order[k]]);
    cap += weights[k];
    require_dual_feasible(s <= cap + slack, "sorted_l1_effective_subspace");
    if (s >= cap * (1.0 - kActTol)) active_k.push_back(k + 1);  // 1-based k
  }
  if (active_k.empty()) return SubspaceBasis::zero(n);

  std::vector<Vector> span;
  std::set<Index> diff_classes_done;  // keyed by the smallest index of E_k
  for (Index k : active_k) {
    const double pivot = std::abs(z[order[k - 1]]);
    const double band = kActTol * (1.0 + pivot);
    std::vector<Index> tight, equal_set;
    for (Index i = 0; i < n; ++i) {
      const double a = std::abs(z[i]);
      if (std::abs(a - pivot) <= band)
        equal_set.push_back(i);
      else if (a > pivot)
        tight.push_back(i);
    }
    Vector vk = Vector::Zero(n);
    for (Index i : tight) vk[i] = sign_of(z[i]);
    if (pivot <= kActTol) {
      // |z|_(k) = 0: one interior subgradient plus the coordinate axes of E_k
      span.push_back(vk);
      if (diff_classes_done.insert(equal_set.front()).second)
        for (Index j : equal_set) span.push_back(Vector::Unit(n, j));
    } else {
      const double mass =
          static_cast<double>(k - static_cast<Index>(tight.size())) / equal_set.size();
      for (Index i : equal_set) vk[i] = mass * sign_of(z[i]);
      span.push_back(vk);
      const Index mk = equal_set.back();  // largest index in E_k, ties by index order
      if (diff_classes_done.insert(equal_set.front()).second) {
        for (Index j : equal_set) {
          if (j == mk) continue;
          Vector d = Vector::Unit(n, j);
          d[mk] -= sign_of(z[j]) / sign_of(z[mk]);
          span.push_back(std::move(d));
        }
      }
    }
  }
  Matrix m(n, static_cast<Index>(span.size()));
  for (Index j = 0; j < m.cols(); ++j) m.col(j) = span[j];
  return SubspaceBasis::from_span(m);
}

SortedL1Reg::SortedL1Reg(Vector base_weights, double lambda)
    : weights_(std::move(base_weights)), lambda_(lambda) {
  if (lambda_ <= 0) throw std::invalid_argument("SortedL1Reg: lambda must be positive");
  if (weights_.size() == 0 || weights_[0] <= 0)
    throw std::invalid_argument("SortedL1Reg: first weight must be positive");
  for (Index i = 0; i + 1 < weights_.size(); ++i)
    if (weights_[i] < weights_[i + 1])
      throw std::invalid_argument("SortedL1Reg: weights must be nonincreasing");
  if (weights_.minCoeff() < 0) throw std::invalid_argument("SortedL1Reg: negative weight");
}

SortedL1Reg SortedL1Reg::oscar(Index n, double w1, double w2) {
  Vector w(n);
  for (Index i = 0; i < n; ++i) w[i] = w1 + w2 * static_cast<double>(n - 1 - i);
  return SortedL1Reg(std::move(w), 1.0);
}

double SortedL1Reg::value(const Vector& x) const {
  std::vector<double> a(x.size());
  for (Index i = 0; i < x.size(); ++i) a[i] = std::abs(x[i]);
  std::sort(a.begin(), a.end(), std::greater<double>());
  double v = 0.0;
  for (Index i = 0; i < x.size(); ++i) v += weights_[i] * a[i];
  return lambda_ * v;
}

Vector SortedL1Reg::prox(const Vector& v, double alpha) const {
  return sorted_l1_prox(v, alpha * lambda_, weights_);
}

SubspaceBasis SortedL1Reg::effective_subspace(const Vector& z) const {
  return sorted_l1_effective_subspace(z / lambda_, weights_);
}

bool SortedL1Reg::dual_domain_check(const Vector& z) const {
  if (!z.allFinite() || z.size() != weights_.size()) return false;
  std::vector<double> a(z.size());
  for (Index i = 0; i < z.size(); ++i) a[i] = std::abs(z[i]);
  std::sort(a.begin(), a.end(), std::greater<double>());
  const double slack = dual_feas_slack(lambda_ * weights_[0]);
  double s = 0.0, cap = 0.0;
  for (Index k = 0; k < z.size(); ++k) {
    s += a[k];
    cap += lambda_ * weights_[k];
    if (s > cap + slack) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// 1D total variation

Matrix TV1DReg::difference_matrix(Index n) {
  Matrix d = Matrix::Zero(n - 1, n);
  for (Index i = 0; i + 1 < n; ++i) {
    d(i, i) = 1.0;
    d(i, i + 1) = -1.0;
  }
  return d;
}

SubspaceBasis tv1d_effective_subspace(const Vector& z, double lambda) {
  require_finite(z, "tv1d_effective_subspace");
  const Index n = z.size();
  if (n < 2) throw std::invalid_argument("tv1d_effective_subspace: n must be >= 2");
  const double slack = dual_feas_slack(lambda);
  require_dual_feasible(std::abs(z.sum()) <= slack, "tv1d_effective_subspace");
  double prefix = 0.0;
  std::vector<Index> group_of(n);
  Index group = 0;
  group_of[0] = 0;
  for (Index i = 0; i + 1 < n; ++i) {
    prefix += z[i];
    require_dual_feasible(std::abs(prefix) <= lambda + slack, "tv1d_effective_subspace");
    if (std::abs(prefix) >= lambda * (1.0 - kActTol)) ++group;  // x_i, x_{i+1} unlinked
    group_of[i + 1] = group;
  }
  const Index r = group + 1;
  Matrix b = Matrix::Zero(n, r);
  for (Index i = 0; i < n; ++i) b(i, group_of[i]) = 1.0;
  for (Index j = 0; j < r; ++j) b.col(j) /= b.col(j).norm();
  return {std::move(b), r, 1e-10};
}

TV1DReg::TV1DReg(Index n, double lambda) : n_(n), lambda_(lambda) {
  if (n < 2) throw std::invalid_argument("TV1DReg: signal length must be >= 2");
  if (lambda <= 0) throw std::invalid_argument("TV1DReg: lambda must be positive");
}

double TV1DReg::value(const Vector& x) const {
  double v = 0.0;
  for (Index i = 0; i + 1 < x.size(); ++i) v += std::abs(x[i] - x[i + 1]);
  return lambda_ * v;
}

Vector TV1DReg::prox(const Vector& v, double alpha) const { return tv1d_prox(v, alpha, lambda_); }

SubspaceBasis TV1DReg::effective_subspace(const Vector& z) const {
  return tv1d_effective_subspace(z / lambda_, 1.0);
}

bool TV1DReg::dual_domain_check(const Vector& z) const {
  if (!z.allFinite() || z.size() != n_) return false;
  const double slack = dual_feas_slack(lambda_);
  if (std::abs(z.sum()) > slack) return false;
  double prefix = 0.0;
  for (Index i = 0; i + 1 < n_; ++i) {
    prefix += z[i];
    if (std::abs(prefix) > lambda_ + slack) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// nonnegative l1

SubspaceBasis nonneg_l1_effective_subspace(const Vector& z, double lambda) {
  require_finite(z, "nonneg_l1_effective_subspace");
  require_dual_feasible(z.maxCoeff() <= lambda + dual_feas_slack(lambda),
                        "nonneg_l1_effective_subspace");
  std::vector<Index> active;
  for (Index i = 0; i < z.size(); ++i)
    if (z[i] >= lambda * (1.0 - kActTol)) active.push_back(i);
  return coordinate_span(z.size(), active);
}

NonnegL1Reg::NonnegL1Reg(double lambda) : lambda_(lambda) {
  if (lambda <= 0) throw std::invalid_argument("NonnegL1Reg: lambda must be positive");
}

double NonnegL1Reg::value(const Vector& x) const {
  if (x.minCoeff() < 0.0) return kInf;
  return lambda_ * x.sum();
}

Vector NonnegL1Reg::prox(const Vector& v, double alpha) const {
  return nonneg_l1_prox(v, alpha, lambda_);
}

SubspaceBasis NonnegL1Reg::effective_subspace(const Vector& z) const {
  return nonneg_l1_effective_subspace(z / lambda_, 1.0);
}

bool NonnegL1Reg::dual_domain_check(const Vector& z) const {
  return z.allFinite() && z.maxCoeff() <= lambda_ + dual_feas_slack(lambda_);
}

// ---------------------------------------------------------------------------
// zero regularizer

SubspaceBasis ZeroReg::effective_subspace(const Vector& z) const {
  require_finite(z, "ZeroReg::effective_subspace");
  require_dual_feasible(dual_domain_check(z), "ZeroReg::effective_subspace");
  return SubspaceBasis::full(z.size());
}

bool ZeroReg::dual_domain_check(const Vector& z) const {
  return z.allFinite() && z.lpNorm<Eigen::Infinity>() <= dual_feas_slack(1.0);
}

// ---------------------------------------------------------------------------
// composite rule

SubspaceBasis composite_effective_subspace(const Matrix& K, const RegularizerOracle& inner,
                                           const Vector& z, const std::optional<Vector>& y_in) {
  const Index n = K.cols();
  const Index m = K.rows();
  if (z.size() != n) throw std::invalid_argument("composite_effective_subspace: z size");
  require_finite(z, "composite_effective_subspace");

  Eigen::CompleteOrthogonalDecomposition<Matrix> codKT(K.transpose());
  Vector y;
  if (y_in) {
    y = *y_in;
    if (y.size() != m) throw std::invalid_argument("composite_effective_subspace: y size");
  } else {
    y = codKT.solve(z);
  }
  const double res = (K.transpose() * y - z).norm();
  if (res > 1e-8 * (1.0 + z.norm()))
    throw std::invalid_argument("composite_effective_subspace: z not in Im K*");
  if (!inner.dual_domain_check(y))
    throw std::invalid_argument(
        "composite_effective_subspace: selected y lies outside dom h*; supply the attainment "
        "certificate explicitly");

  const SubspaceBasis im_k = SubspaceBasis::from_span(K);
  const SubspaceBasis inner_par = inner.effective_subspace(y);

  // S = par(dh*(y) ∩ Im K). dh*(y) is a polyhedral cone for every family
  // here, which makes four cases exact; anything else is rejected.
  SubspaceBasis s;
  if (im_k.rank == m) {
    s = inner_par;
  } else if (inner_par.rank == 0) {
    s = SubspaceBasis::zero(m);
  } else {
    const Matrix proj_onto_im = im_k.projector();
    const double outside =
        (inner_par.basis - proj_onto_im * inner_par.basis).lpNorm<Eigen::Infinity>();
    if (outside <= 1e-10) {
      s = inner_par;  // span dh*(y) inside Im K: intersection is dh*(y) itself
    } else {
      Eigen::JacobiSVD<Matrix> svd(im_k.basis.transpose() * inner_par.basis);
      const double max_cos = svd.singularValues().size() ? svd.singularValues()[0] : 0.0;
      if (max_cos <= 1.0 - 1e-8) {
        s = SubspaceBasis::zero(m);  // transversal: cone meets Im K only at 0
      } else {
        throw std::invalid_argument(
            "composite_effective_subspace: par dh*(y) meets Im K only partially; this "
            "intersection needs a specialized routine");
      }
    }
  }

  // Preimage K^{-1}(S) = Ker K + minimum-norm lifts of a basis of S.
  Eigen::FullPivLU<Matrix> lu(K);
  lu.setThreshold(1e-10);
  const Matrix kernel = lu.kernel();  // n x max(1, dim Ker K); a zero column when trivial
  Eigen::CompleteOrthogonalDecomposition<Matrix> codK(K);
  Matrix span(n, kernel.cols() + s.rank);
  span.leftCols(kernel.cols()) = kernel;
  for (Index j = 0; j < s.rank; ++j) span.col(kernel.cols() + j) = codK.solve(s.basis.col(j));
  return SubspaceBasis::from_span(span);
}

// ---------------------------------------------------------------------------

ProblemInstance::ProblemInstance(std::shared_ptr<const SmoothLossOracle> loss_in,
                                 std::shared_ptr<const RegularizerOracle> reg_in,
                                 std::string name_in)
    : n(loss_in->dim()), loss(std::move(loss_in)), reg(std::move(reg_in)), name(std::move(name_in)) {
  if (reg->dim() != RegularizerOracle::kAnyDim && reg->dim() != n)
    throw std::invalid_argument("ProblemInstance: loss and regularizer dimensions differ");
}

}  // namespace polynewt
