#pragma once

#include <optional>

#include "polynewt/solvers.hpp"

namespace polynewt {

struct TiltReport {
  Index ker_dim = 0;        // dim Ker grad^2 f(x)
  Index subspace_dim = 0;   // dim par dg*(-grad f(x))
  double max_principal_cosine = 0.0;
  bool tilt_stable = false;
  double kernel_tol = 1e-10;        // eigenvalue cut relative to the largest
  double transversality_tol = 1e-8; // margin on the principal cosine
  double kkt_at_candidate = 0.0;
  double dual_projection_dist = 0.0;  // how far -grad f was from dom g*
  bool candidate_warning = false;     // stationarity looked poor
};

/// Checks Ker grad^2 f(x) ∩ par dg*(-grad f(x)) = {0} at an (approximately)
/// stationary candidate. -grad f is projected onto dom g* when it is within
/// 1e-8; a violation beyond 1e-6 signals a non-stationary candidate.
TiltReport check_tilt_stability(const ProblemInstance& prob, const Vector& x_candidate);

struct ConvergenceOrder {
  std::optional<double> order;  // absent when the tail is too short
  int tail_len = 0;             // points used for the fit
};

/// Empirical order: least-squares slope of log e_{k+1} against log e_k over
/// the accepted-Newton tail, using distances in (1e-13, 1e-2). Needs at
/// least three qualifying points.
ConvergenceOrder convergence_order(const SolverTrace& trace, const Vector& x_ref);

struct IdentificationReport {
  std::optional<int> identified_at;   // first k with L_k equal to the terminal subspace
  Index terminal_dim = 0;
  std::optional<SubspaceBasis> terminal_subspace;
  std::vector<std::pair<int, Index>> dim_history;  // (k, reduced_dim) of Newton attempts
};

/// Observes when the effective subspace settles: the first iteration whose
/// recorded subspace matches the terminal one (projector distance <= 1e-8)
/// and stays equal afterwards.
IdentificationReport identification_report(const SolverTrace& trace);

}  // namespace polynewt
