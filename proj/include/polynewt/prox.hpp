#pragma once

#include "polynewt/types.hpp"

namespace polynewt {

/// prox of t*lambda*|.|_1: componentwise soft threshold.
Vector l1_prox(const Vector& v, double t, double lambda);

/// Euclidean projection onto the l1 ball of the given radius.
Vector project_l1_ball(const Vector& v, double radius);

/// prox of t*lambda*|.|_inf via Moreau decomposition.
Vector linf_prox(const Vector& v, double t, double lambda);

/// prox of t * sum_i weights_i |y|_(i) (sorted l1 / SLOPE), weights
/// nonincreasing and nonnegative. Stack-based pool-adjacent-violators on
/// the sorted absolute values; signs and permutation restored afterward.
Vector sorted_l1_prox(const Vector& v, double t, const Vector& weights);

/// prox of t*lambda*|Dy|_1 (1D total variation), taut-string dynamic
/// program over the knots of the dual derivative, O(n) typical.
Vector tv1d_prox(const Vector& v, double t, double lambda);

/// prox of t*lambda*sum(y) + indicator(y >= 0): max(0, v - t*lambda).
Vector nonneg_l1_prox(const Vector& v, double t, double lambda);

}  // namespace polynewt
