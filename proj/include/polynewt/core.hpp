#pragma once

#include "polynewt/oracles.hpp"

namespace polynewt {

class LeastSquaresLoss;

/// Certifies u in dg(y) through the Fenchel-Young identity
/// g(y) + g*(u) = <u, y>. Every conjugate here is a polyhedral indicator,
/// so the test is dual-domain membership of u plus |g(y) - <u,y>| small.
bool fenchel_young_check(const RegularizerOracle& reg, const Vector& y, const Vector& u);

/// f(x) + g(x), extended-real: +inf outside either domain.
double objective(const ProblemInstance& prob, const Vector& x);

/// Relative KKT residual |x - prox_{ag}(x - a grad f(x))| / (1 + |x| + |grad f(x)|).
/// This generalized form (with the step inside the gradient term) is the
/// canonical stopping metric for every loss; +inf when x is infeasible.
double kkt_residual(const ProblemInstance& prob, const Vector& x, double alpha);

/// The least-squares-specific residual
/// |x - prox_{ag}(x - A^T(Ax-b))| / (1 + |x| + |Ax-b|), reported alongside
/// the canonical one for reproduction purposes.
double kkt_residual_ls_paper(const LeastSquaresLoss& loss, const RegularizerOracle& reg,
                             const Vector& x, double alpha);

}  // namespace polynewt
