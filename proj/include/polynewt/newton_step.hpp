#pragma once

#include <functional>

#include "polynewt/subspace.hpp"

namespace polynewt {

using HessOp = std::function<Vector(const Vector&)>;

enum class NewtonFallback { none, tikhonov, skipped };

struct NewtonStepReport {
  Vector direction;             // d, lies in span(basis)
  Index reduced_dim = 0;        // r
  double reduced_condition = 1.0;
  double residual_in_L = 0.0;   // |P_L(rhs - H d)|, ~0 when the reduced solve succeeded
  NewtonFallback fallback = NewtonFallback::none;
  SubspaceBasis subspace;       // the L the step was restricted to
};

/// Solves min_{d in L} 0.5 <H d, d> - <rhs, d> through the reduced system
/// B^T H B c = B^T rhs. A numerically singular reduced matrix (smallest
/// eigenvalue < 1e-12 * largest) gets a Tikhonov shift 1e-10 * tr / r; if
/// that still fails the step degenerates to d = 0 and is flagged.
NewtonStepReport newton_direction(const HessOp& hess_vec, const Vector& rhs,
                                  const SubspaceBasis& L);
NewtonStepReport newton_direction(const Matrix& hess, const Vector& rhs, const SubspaceBasis& L);

/// True when d in span(L) and B^T (rhs - H d) vanishes to 1e-8*(1+|rhs|),
/// i.e. the optimality system -H d + rhs in L-perp, d in L holds.
bool certify_optimality_system(const HessOp& hess_vec, const Vector& rhs, const SubspaceBasis& L,
                               const Vector& d);
bool certify_optimality_system(const Matrix& hess, const Vector& rhs, const SubspaceBasis& L,
                               const Vector& d);

}  // namespace polynewt
