#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "polynewt/core.hpp"
#include "polynewt/newton_step.hpp"

namespace polynewt {

enum class Method { ista, fista, newton_ista, newton_fista };
enum class StepMode { fixed, backtracking };
enum class ExtrapolationRule { original_fista, chambolle_dossal, liang_luo_tao };
enum class StepKind { prox_only, newton, newton_rejected };
enum class TerminalStatus { converged, max_iters, domain_failure };

std::string to_string(Method m);
std::string to_string(StepKind k);
std::string to_string(TerminalStatus s);
std::optional<Method> method_from_string(const std::string& s);

struct SolverConfig {
  Method method = Method::fista;
  StepMode step_mode = StepMode::fixed;
  double alpha = 0.0;        // fixed step; 0 derives 1/L from the loss hint
  double bt_alpha0 = 1.0;    // backtracking initial step
  double bt_shrink = 0.5;    // in (0,1)
  double bt_growth = 1.0;    // >= 1; per-iteration recovery, capped at bt_alpha0
  ExtrapolationRule extrapolation = ExtrapolationRule::original_fista;
  double cd_d = 3.0;         // chambolle_dossal: beta_k = (k-1)/(k+d), d > 2
  double llt_p = 0.5;        // liang_luo_tao: p in (0,1)
  double llt_q = 0.25;       // liang_luo_tao: q in [p^2, (2-p)^2]
  double switch_tol = 1e-3;  // tau on |x_k - y_k| deciding Newton attempts
  double kkt_tol = 1e-8;
  int max_iters = 10000;
  bool safeguard = true;      // accept Newton only on KKT-residual decrease
  bool newton_momentum_reset = true;  // restart the extrapolation after accepted Newton steps
  bool record_iterates = true;
  bool record_history = true; // false keeps only the terminal record
  bool certify_steps = false; // Fenchel-Young check on every (y_k, z_k)

  void validate() const;
  bool is_newton() const {
    return method == Method::newton_ista || method == Method::newton_fista;
  }
  bool is_accelerated() const {
    return method == Method::fista || method == Method::newton_fista;
  }
};

struct IterationRecord {
  int k = 0;
  Vector x;  // filled when record_iterates
  double objective = 0.0;
  double kkt = 0.0;
  StepKind step_kind = StepKind::prox_only;
  double dist_xy = 0.0;  // |x_{k-1} - y_{k-1}|, the switch quantity
  double alpha = 0.0;
  std::optional<NewtonStepReport> newton;
  std::int64_t wall_ns = 0;  // cumulative since solve entry
};

struct SolverTrace {
  std::vector<IterationRecord> records;
  TerminalStatus status = TerminalStatus::max_iters;
  Vector final_x;
  std::string message;

  int iterations() const { return records.empty() ? 0 : records.back().k; }
  double terminal_kkt() const { return records.empty() ? kInf : records.back().kkt; }
  double terminal_objective() const { return records.empty() ? kInf : records.back().objective; }
  int newton_steps_accepted() const;
};

struct ExtrapolationState {
  double t_prev = 1.0;
};

/// One proximal-gradient step: y = prox_{ag}(x - a grad f(x)) and
/// z = (x - y)/a - grad f(x), so that z in dg(y) by the resolvent identity.
std::pair<Vector, Vector> ista_step(const ProblemInstance& prob, const Vector& x, double alpha);

/// Largest alpha0 * rho^j (j >= 0) whose prox-gradient step stays feasible
/// and satisfies f(y) <= f(x) + <grad f(x), y-x> + |y-x|^2 / (2 alpha).
/// Throws after 60 shrinks.
double backtracking_alpha(const ProblemInstance& prob, const Vector& base_point, double alpha0,
                          double rho);

/// Extrapolation factor beta_k in [0,1] for iteration k >= 1.
double extrapolation_beta(ExtrapolationRule rule, int k, ExtrapolationState& state,
                          const SolverConfig& cfg);

/// Runs the configured method from x0 until kkt_residual <= kkt_tol or
/// max_iters. Newton variants attempt the effective-subspace step whenever
/// |x_k - y_k| <= switch_tol; with the safeguard on, a candidate is
/// accepted only if it strictly decreases the KKT residual.
SolverTrace solve(const ProblemInstance& prob, const SolverConfig& config, const Vector& x0);

/// High-accuracy minimizer oracle: FISTA with backtracking to the given
/// KKT tolerance. Throws when the budget is exhausted.
Vector reference_solution(const ProblemInstance& prob, double tol = 1e-12,
                          int max_iters = 1000000);

}  // namespace polynewt
