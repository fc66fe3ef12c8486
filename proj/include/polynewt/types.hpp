#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <limits>

namespace polynewt {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

inline bool is_finite(double v) { return std::isfinite(v); }

/// Componentwise soft threshold, usable on any dense expression.
template <typename Derived>
auto soft_threshold(const Eigen::MatrixBase<Derived>& v, double t) {
  return (v.array().abs() - t).max(0.0) * v.array().sign();
}

}  // namespace polynewt
