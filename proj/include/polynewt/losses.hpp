#pragma once

#include <memory>

#include "polynewt/oracles.hpp"

namespace polynewt {

/// f(x) = 0.5 * |Ax - b|^2 with cached A^T A and A^T b.
class LeastSquaresLoss final : public SmoothLossOracle {
 public:
  LeastSquaresLoss(Matrix A, Vector b);

  Index dim() const override { return A_.cols(); }
  double value(const Vector& x) const override;
  Vector gradient(const Vector& x) const override;
  Matrix hessian(const Vector&) const override { return AtA_; }
  Vector hess_vec(const Vector&, const Vector& v) const override { return AtA_ * v; }
  std::optional<double> lipschitz_grad_hint() const override;

  const Matrix& A() const { return A_; }
  const Vector& b() const { return b_; }
  Vector residual(const Vector& x) const { return A_ * x - b_; }

 private:
  Matrix A_;
  Vector b_;
  Matrix AtA_;
  Vector Atb_;
  mutable std::optional<double> lipschitz_;
};

/// Separable symmetric image operator: Gaussian blur with reflective
/// boundary applied along rows and columns of a side x side image stored
/// row-major, followed by nothing. Symmetric with unit row sums.
class GaussianBlur {
 public:
  GaussianBlur(Index side, double fwhm);

  Index side() const { return side_; }
  double fwhm() const { return fwhm_; }
  Vector apply(const Vector& x) const;   // adjoint equals apply (symmetric)
  Matrix dense() const;

 private:
  Vector convolve_1d(const Vector& line) const;
  Index side_;
  double fwhm_;
  Vector kernel_;  // normalized, odd length
};

/// q x q block-sum downsampler (photon-count preserving).
class BlockDownsample {
 public:
  BlockDownsample(Index side, Index q);

  Index side_in() const { return side_; }
  Index side_out() const { return side_ / q_; }
  Index q() const { return q_; }
  Vector apply(const Vector& x) const;
  Vector apply_adjoint(const Vector& y) const;
  Matrix dense() const;

 private:
  Index side_, q_;
};

struct ForwardModel {
  GaussianBlur H;
  BlockDownsample M;

  Vector apply(const Vector& x) const { return M.apply(H.apply(x)); }
  Vector apply_adjoint(const Vector& y) const { return H.apply(M.apply_adjoint(y)); }
  Matrix dense() const { return M.dense() * H.dense(); }
};

/// Gaussian PSF (std dev = fwhm / (2 sqrt(2 ln 2)) in high-res pixels)
/// followed by q x q block summation. q must divide n_side.
ForwardModel build_forward_model(Index n_side, Index q, double fwhm);

/// Poisson negative log-likelihood f(x) = sum_i [y_i log(y_i / (MHx+b)_i)
/// - y_i + (MHx)_i + b_i] with the 0 log 0 = 0 convention. Open domain
/// {x : MHx + b > 0}, guarded by a small feasibility margin.
class PoissonKLLoss final : public SmoothLossOracle {
 public:
  PoissonKLLoss(ForwardModel model, Vector background, Vector counts);

  Index dim() const override { return n_; }
  double value(const Vector& x) const override;
  Vector gradient(const Vector& x) const override;
  std::pair<double, Vector> value_and_gradient(const Vector& x) const override;
  Matrix hessian(const Vector& x) const override;
  Vector hess_vec(const Vector& x, const Vector& v) const override;
  bool domain_check(const Vector& x) const override;

  const ForwardModel& model() const { return model_; }
  const Vector& counts() const { return counts_; }
  const Vector& background() const { return background_; }

  static constexpr double kDomainMargin = 1e-12;

 private:
  Vector intensities(const Vector& x) const { return model_.apply(x) + background_; }

  ForwardModel model_;
  Vector background_;
  Vector counts_;
  Index n_, m_;
};

}  // namespace polynewt
