#pragma once

#include "polynewt/types.hpp"

namespace polynewt {

/// Orthonormal basis of a subspace of R^n. An empty basis (rank 0) is the
/// zero subspace; rank n is the whole space.
struct SubspaceBasis {
  Matrix basis;      // n x r, orthonormal columns
  Index rank = 0;    // r
  double build_tol = 1e-10;

  Index ambient_dim() const { return basis.rows(); }

  /// Orthogonal projector B B^T (n x n).
  Matrix projector() const;

  /// Projection of v onto the subspace.
  Vector project(const Vector& v) const;

  /// True when v lies in the subspace up to tol*(1+|v|).
  bool contains(const Vector& v, double tol = 1e-8) const;

  static SubspaceBasis zero(Index n, double build_tol = 1e-10);
  static SubspaceBasis full(Index n, double build_tol = 1e-10);

  /// Orthonormal basis of the column span of a (possibly redundant)
  /// spanning set, rank decided by column-pivoted QR at
  /// build_tol * (largest column norm).
  static SubspaceBasis from_span(const Matrix& spanning, double build_tol = 1e-10);
};

/// Frobenius distance between the orthogonal projectors of two subspaces.
double projector_distance(const SubspaceBasis& a, const SubspaceBasis& b);

}  // namespace polynewt
