#include "polynewt/losses.hpp"

#include <cmath>
#include <stdexcept>

namespace polynewt {

// ---------------------------------------------------------------------------
// least squares

LeastSquaresLoss::LeastSquaresLoss(Matrix A, Vector b) : A_(std::move(A)), b_(std::move(b)) {
  if (A_.rows() != b_.size()) throw std::invalid_argument("LeastSquaresLoss: A rows != b size");
  AtA_ = A_.transpose() * A_;
  Atb_ = A_.transpose() * b_;
}

double LeastSquaresLoss::value(const Vector& x) const { return 0.5 * (A_ * x - b_).squaredNorm(); }

Vector LeastSquaresLoss::gradient(const Vector& x) const { return AtA_ * x - Atb_; }

std::optional<double> LeastSquaresLoss::lipschitz_grad_hint() const {
  if (!lipschitz_) {
    // power iteration on A^T A, 1e-10 relative tolerance
    Vector v = Vector::Ones(AtA_.cols()).normalized();
    double lam = 0.0;
    for (int it = 0; it < 20000; ++it) {
      Vector w = AtA_ * v;
      const double next = w.norm();
      if (next == 0.0) {
        lam = 0.0;
        break;
      }
      v = w / next;
      if (std::abs(next - lam) <= 1e-10 * next && it > 2) {
        lam = next;
        break;
      }
      lam = next;
    }
    lipschitz_ = lam;
  }
  return lipschitz_;
}

// ---------------------------------------------------------------------------
// Gaussian blur

GaussianBlur::GaussianBlur(Index side, double fwhm) : side_(side), fwhm_(fwhm) {
  if (side < 1) throw std::invalid_argument("GaussianBlur: side must be positive");
  const double sigma = fwhm / (2.0 * std::sqrt(2.0 * std::log(2.0)));
  if (sigma <= 1e-12) {
    kernel_ = Vector::Ones(1);  // delta PSF
    return;
  }
  const Index radius = static_cast<Index>(std::ceil(3.0 * sigma));
  kernel_ = Vector(2 * radius + 1);
  for (Index k = -radius; k <= radius; ++k)
    kernel_[k + radius] = std::exp(-0.5 * static_cast<double>(k * k) / (sigma * sigma));
  kernel_ /= kernel_.sum();
}

Vector GaussianBlur::convolve_1d(const Vector& line) const {
  const Index n = line.size();
  const Index radius = (kernel_.size() - 1) / 2;
  Vector out = Vector::Zero(n);
  for (Index i = 0; i < n; ++i) {
    double acc = 0.0;
    for (Index k = -radius; k <= radius; ++k) {
      Index j = i + k;
      // half-sample reflection: ... x1 x0 | x0 x1 ... xn-1 | xn-1 xn-2 ...
      while (j < 0 || j >= n) {
        if (j < 0) j = -j - 1;
        if (j >= n) j = 2 * n - 1 - j;
      }
      acc += kernel_[k + radius] * line[j];
    }
    out[i] = acc;
  }
  return out;
}

Vector GaussianBlur::apply(const Vector& x) const {
  if (x.size() != side_ * side_) throw std::invalid_argument("GaussianBlur: size mismatch");
  if (kernel_.size() == 1) return x;
  Eigen::Map<const Matrix> img(x.data(), side_, side_);
  Matrix tmp(side_, side_);
  for (Index r = 0; r < side_; ++r) tmp.row(r) = convolve_1d(img.row(r).transpose()).transpose();
  Matrix out(side_, side_);
  for (Index c = 0; c < side_; ++c) out.col(c) = convolve_1d(tmp.col(c));
  return Eigen::Map<Vector>(out.data(), side_ * side_);
}

Matrix GaussianBlur::dense() const {
  const Index n = side_ * side_;
  Matrix h(n, n);
  for (Index j = 0; j < n; ++j) h.col(j) = apply(Vector::Unit(n, j));
  return h;
}

// ---------------------------------------------------------------------------
// block downsampler

BlockDownsample::BlockDownsample(Index side, Index q) : side_(side), q_(q) {
  if (q < 1 || side % q != 0) throw std::invalid_argument("BlockDownsample: q must divide side");
}

Vector BlockDownsample::apply(const Vector& x) const {
  const Index so = side_ / q_;
  Vector y = Vector::Zero(so * so);
  for (Index r = 0; r < side_; ++r)
    for (Index c = 0; c < side_; ++c) y[(r / q_) * so + (c / q_)] += x[r * side_ + c];
  return y;
}

Vector BlockDownsample::apply_adjoint(const Vector& y) const {
  const Index so = side_ / q_;
  Vector x(side_ * side_);
  for (Index r = 0; r < side_; ++r)
    for (Index c = 0; c < side_; ++c) x[r * side_ + c] = y[(r / q_) * so + (c / q_)];
  return x;
}

Matrix BlockDownsample::dense() const {
  const Index so = side_ / q_;
  Matrix m = Matrix::Zero(so * so, side_ * side_);
  for (Index r = 0; r < side_; ++r)
    for (Index c = 0; c < side_; ++c) m((r / q_) * so + (c / q_), r * side_ + c) = 1.0;
  return m;
}

ForwardModel build_forward_model(Index n_side, Index q, double fwhm) {
  return ForwardModel{GaussianBlur(n_side, fwhm), BlockDownsample(n_side, q)};
}

// ---------------------------------------------------------------------------
// Poisson KL

PoissonKLLoss::PoissonKLLoss(ForwardModel model, Vector background, Vector counts)
    : model_(std::move(model)),
      background_(std::move(background)),
      counts_(std::move(counts)),
      n_(model_.H.side() * model_.H.side()),
      m_(model_.M.side_out() * model_.M.side_out()) {
  if (background_.size() != m_ || counts_.size() != m_)
    throw std::invalid_argument("PoissonKLLoss: background/counts size mismatch");
  if (background_.minCoeff() <= 0.0)
    throw std::invalid_argument("PoissonKLLoss: background must be positive");
  if (counts_.minCoeff() < 0.0) throw std::invalid_argument("PoissonKLLoss: negative counts");
}

bool PoissonKLLoss::domain_check(const Vector& x) const {
  if (x.size() != n_ || !x.allFinite()) return false;
  return intensities(x).minCoeff() > kDomainMargin;
}

double PoissonKLLoss::value(const Vector& x) const {
  const Vector w = intensities(x);
  if (w.minCoeff() <= kDomainMargin) return kInf;
  double v = 0.0;
  for (Index i = 0; i < m_; ++i) {
    const double yi = counts_[i];
    v += (yi > 0.0 ? yi * std::log(yi / w[i]) : 0.0) - yi + w[i];
  }
  return v;
}

Vector PoissonKLLoss::gradient(const Vector& x) const {
  const Vector w = intensities(x);
  if (w.minCoeff() <= kDomainMargin)
    throw std::domain_error("PoissonKLLoss::gradient: x outside the open domain");
  const Vector s = Vector::Ones(m_) - counts_.cwiseQuotient(w);
  return model_.apply_adjoint(s);
}

std::pair<double, Vector> PoissonKLLoss::value_and_gradient(const Vector& x) const {
  const Vector w = intensities(x);
  if (w.minCoeff() <= kDomainMargin)
    return {kInf, Vector::Constant(n_, std::numeric_limits<double>::quiet_NaN())};
  double v = 0.0;
  for (Index i = 0; i < m_; ++i) {
    const double yi = counts_[i];
    v += (yi > 0.0 ? yi * std::log(yi / w[i]) : 0.0) - yi + w[i];
  }
  const Vector s = Vector::Ones(m_) - counts_.cwiseQuotient(w);
  return {v, model_.apply_adjoint(s)};
}

Vector PoissonKLLoss::hess_vec(const Vector& x, const Vector& v) const {
  const Vector w = intensities(x);
  if (w.minCoeff() <= kDomainMargin)
    throw std::domain_error("PoissonKLLoss::hess_vec: x outside the open domain");
  const Vector d = counts_.array() / (w.array() * w.array());
  return model_.apply_adjoint(d.cwiseProduct(model_.apply(v)));
}

Matrix PoissonKLLoss::hessian(const Vector& x) const {
  const Vector w = intensities(x);
  if (w.minCoeff() <= kDomainMargin)
    throw std::domain_error("PoissonKLLoss::hessian: x outside the open domain");
  const Matrix mh = model_.dense();
  const Vector d = counts_.array() / (w.array() * w.array());
  return mh.transpose() * d.asDiagonal() * mh;
}

}  // namespace polynewt
