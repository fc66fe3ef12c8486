#include "polynewt/solvers.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

namespace polynewt {

std::string to_string(Method m) {
  switch (m) {
    case Method::ista: return "ista";
    case Method::fista: return "fista";
    case Method::newton_ista: return "newton_ista";
    case Method::newton_fista: return "newton_fista";
  }
  return "?";
}

std::string to_string(StepKind k) {
  switch (k) {
    case StepKind::prox_only: return "prox_only";
    case StepKind::newton: return "newton";
    case StepKind::newton_rejected: return "newton_rejected";
  }
  return "?";
}

std::string to_string(TerminalStatus s) {
  switch (s) {
    case TerminalStatus::converged: return "converged";
    case TerminalStatus::max_iters: return "max_iters";
    case TerminalStatus::domain_failure: return "domain_failure";
  }
  return "?";
}

std::optional<Method> method_from_string(const std::string& s) {
  if (s == "ista") return Method::ista;
  if (s == "fista") return Method::fista;
  if (s == "newton_ista" || s == "newton-ista") return Method::newton_ista;
  if (s == "newton_fista" || s == "newton-fista") return Method::newton_fista;
  return std::nullopt;
}

void SolverConfig::validate() const {
  if (step_mode == StepMode::fixed && alpha < 0)
    throw std::invalid_argument("SolverConfig: fixed step alpha must be positive");
  if (bt_alpha0 <= 0) throw std::invalid_argument("SolverConfig: bt_alpha0 must be positive");
  if (!(bt_shrink > 0 && bt_shrink < 1))
    throw std::invalid_argument("SolverConfig: bt_shrink must be in (0,1)");
  if (bt_growth < 1) throw std::invalid_argument("SolverConfig: bt_growth must be >= 1");
  if (extrapolation == ExtrapolationRule::chambolle_dossal && !(cd_d > 2))
    throw std::invalid_argument("SolverConfig: chambolle_dossal requires d > 2");
  if (extrapolation == ExtrapolationRule::liang_luo_tao) {
    if (!(llt_p > 0 && llt_p < 1))
      throw std::invalid_argument("SolverConfig: liang_luo_tao requires p in (0,1)");
    if (llt_q < llt_p * llt_p || llt_q > (2 - llt_p) * (2 - llt_p))
      throw std::invalid_argument("SolverConfig: liang_luo_tao requires q in [p^2, (2-p)^2]");
  }
  if (switch_tol <= 0) throw std::invalid_argument("SolverConfig: switch_tol must be positive");
  if (kkt_tol <= 0) throw std::invalid_argument("SolverConfig: kkt_tol must be positive");
  if (max_iters < 1) throw std::invalid_argument("SolverConfig: max_iters must be >= 1");
}

int SolverTrace::newton_steps_accepted() const {
  int c = 0;
  for (const auto& r : records) c += (r.step_kind == StepKind::newton);
  return c;
}

std::pair<Vector, Vector> ista_step(const ProblemInstance& prob, const Vector& x, double alpha) {
  if (alpha <= 0) throw std::invalid_argument("ista_step: alpha must be positive");
  if (!prob.loss->domain_check(x)) throw std::domain_error("ista_step: x outside dom f");
  const Vector grad = prob.loss->gradient(x);
  Vector y = prob.reg->prox(x - alpha * grad, alpha);
  Vector z = (x - y) / alpha - grad;
  return {std::move(y), std::move(z)};
}

namespace {

struct BtResult {
  double alpha = 0.0;
  Vector y;
};

BtResult backtrack(const ProblemInstance& prob, const Vector& x, double fx, const Vector& gx,
                   double alpha_start, double rho) {
  double a = alpha_start;
  for (int j = 0; j <= 60; ++j) {
    Vector y = prob.reg->prox(x - a * gx, a);
    if (prob.loss->domain_check(y)) {
      const double fy = prob.loss->value(y);
      const Vector dy = y - x;
      if (fy <= fx + gx.dot(dy) + dy.squaredNorm() / (2.0 * a) + 1e-12 * (1.0 + std::abs(fx)))
        return {a, std::move(y)};
    }
    a *= rho;
  }
  throw std::runtime_error("backtracking_alpha: step-size search failed after 60 shrinks");
}

}  // namespace

double backtracking_alpha(const ProblemInstance& prob, const Vector& base_point, double alpha0,
                          double rho) {
  if (alpha0 <= 0 || rho <= 0 || rho >= 1)
    throw std::invalid_argument("backtracking_alpha: bad parameters");
  if (!prob.loss->domain_check(base_point))
    throw std::domain_error("backtracking_alpha: base point outside dom f");
  const auto [fx, gx] = prob.loss->value_and_gradient(base_point);
  return backtrack(prob, base_point, fx, gx, alpha0, rho).alpha;
}

double extrapolation_beta(ExtrapolationRule rule, int k, ExtrapolationState& state,
                          const SolverConfig& cfg) {
  if (k < 1) throw std::invalid_argument("extrapolation_beta: k must be >= 1");
  if (rule == ExtrapolationRule::chambolle_dossal)
    return static_cast<double>(k - 1) / (static_cast<double>(k) + cfg.cd_d);
  const double p = rule == ExtrapolationRule::original_fista ? 1.0 : cfg.llt_p;
  const double q = rule == ExtrapolationRule::original_fista ? 1.0 : cfg.llt_q;
  const double t_prev = state.t_prev;
  const double t = 0.5 * (p + std::sqrt(q + 4.0 * t_prev * t_prev));
  state.t_prev = t;
  return (t_prev - 1.0) / t;
}

SolverTrace solve(const ProblemInstance& prob, const SolverConfig& cfg, const Vector& x0) {
  cfg.validate();
  const auto& loss = *prob.loss;
  const auto& reg = *prob.reg;
  const auto t_start = std::chrono::steady_clock::now();
  auto elapsed_ns = [&] {
    return std::chrono::duration_cast<std::chrono::nanoseconds>(std::chrono::steady_clock::now() -
                                                                t_start)
        .count();
  };

  SolverTrace trace;
  trace.final_x = x0;
  if (!loss.domain_check(x0)) {
    trace.status = TerminalStatus::domain_failure;
    trace.message = "x0 outside dom f";
    return trace;
  }

  double alpha_fixed = cfg.alpha;
  if (cfg.step_mode == StepMode::fixed && alpha_fixed <= 0) {
    const auto hint = loss.lipschitz_grad_hint();
    if (!hint || *hint <= 0)
      throw std::invalid_argument(
          "solve: fixed step needs alpha or a Lipschitz hint; use backtracking");
    alpha_fixed = 1.0 / *hint;
  }

  Vector x = x0, x_prev = x0;
  ExtrapolationState es;
  double alpha_bt = cfg.bt_alpha0;
  double best_newton_kkt = kInf;  // safeguard: accepted-iterate KKT must be nonincreasing

  // gradient cache: consecutive iterations often re-evaluate at the same point
  Vector cache_pt, cache_grad;
  bool cache_valid = false;
  auto grad_at = [&](const Vector& p) -> Vector {
    if (cache_valid && cache_pt.size() == p.size() && cache_pt == p) return cache_grad;
    cache_pt = p;
    cache_grad = loss.gradient(p);
    cache_valid = true;
    return cache_grad;
  };

  auto push_record = [&](IterationRecord&& rec) {
    if (!cfg.record_history && !trace.records.empty())
      trace.records.back() = std::move(rec);
    else
      trace.records.push_back(std::move(rec));
  };

  trace.status = TerminalStatus::max_iters;
  for (int k = 1; k <= cfg.max_iters; ++k) {
    if (!loss.domain_check(x)) {  // an unsafeguarded Newton step may leave dom f
      trace.status = TerminalStatus::domain_failure;
      trace.message = "iterate left dom f at iteration " + std::to_string(k);
      break;
    }

    Vector u;
    if (cfg.is_accelerated()) {
      const double beta = extrapolation_beta(cfg.extrapolation, k, es, cfg);
      u = x + beta * (x - x_prev);
      if (!loss.domain_check(u)) {
        u = x;  // recovery: drop the momentum and restart the sequence
        es = ExtrapolationState{};
      }
    } else {
      u = x;
    }

    double a;
    Vector y, gu;
    if (cfg.step_mode == StepMode::backtracking) {
      double fu;
      std::tie(fu, gu) = loss.value_and_gradient(u);
      BtResult bt;
      try {
        bt = backtrack(prob, u, fu, gu, std::min(cfg.bt_alpha0, alpha_bt * cfg.bt_growth),
                       cfg.bt_shrink);
      } catch (const std::runtime_error& e) {
        trace.status = TerminalStatus::domain_failure;
        trace.message = e.what();
        break;
      }
      a = alpha_bt = bt.alpha;
      y = std::move(bt.y);
    } else {
      a = alpha_fixed;
      gu = grad_at(u);
      y = reg.prox(u - a * gu, a);
      if (!loss.domain_check(y)) {
        trace.status = TerminalStatus::domain_failure;
        trace.message = "prox step left dom f; fixed step too large";
        break;
      }
    }
    const Vector z = (u - y) / a - gu;
    if (cfg.certify_steps && !fenchel_young_check(reg, y, z))
      throw std::logic_error("solve: (y_k, z_k) failed the Fenchel-Young certificate");

    const double kkt_y = kkt_residual(prob, y, a);
    const double dist_xy = (x - y).norm();

    StepKind kind = StepKind::prox_only;
    std::optional<NewtonStepReport> rep;
    Vector next = y;
    double kkt_next = kkt_y;
    if (cfg.is_newton() && dist_xy <= cfg.switch_tol && kkt_y > cfg.kkt_tol) {
      SubspaceBasis L = reg.effective_subspace(z);
      const Vector gy = grad_at(y);
      NewtonStepReport r = newton_direction(
          [&](const Vector& v) { return loss.hess_vec(y, v); }, z + gy, L);
      Vector cand = y - r.direction;
      const double kkt_cand = kkt_residual(prob, cand, a);  // +inf when infeasible
      const bool accept =
          cfg.safeguard ? (kkt_cand < kkt_y && kkt_cand < best_newton_kkt) : true;
      rep = std::move(r);
      if (accept) {
        best_newton_kkt = kkt_cand;
        kind = StepKind::newton;
        next = std::move(cand);
        kkt_next = kkt_cand;
      } else {
        kind = StepKind::newton_rejected;
      }
    }

    x_prev = x;
    x = next;
    if (kind == StepKind::newton && cfg.newton_momentum_reset) {
      x_prev = x;  // drop the Newton jump from the extrapolation difference
      es = ExtrapolationState{};
    }

    IterationRecord rec;
    rec.k = k;
    if (cfg.record_iterates) rec.x = x;
    rec.objective = objective(prob, x);
    rec.kkt = kkt_next;
    rec.step_kind = kind;
    rec.dist_xy = dist_xy;
    rec.alpha = a;
    rec.newton = std::move(rep);
    rec.wall_ns = elapsed_ns();
    push_record(std::move(rec));

    if (kkt_next <= cfg.kkt_tol) {
      trace.status = TerminalStatus::converged;
      break;
    }
  }
  trace.final_x = x;
  return trace;
}

Vector reference_solution(const ProblemInstance& prob, double tol, int max_iters) {
  SolverConfig cfg;
  cfg.method = Method::fista;
  cfg.step_mode = StepMode::backtracking;
  const auto hint = prob.loss->lipschitz_grad_hint();
  cfg.bt_alpha0 = (hint && *hint > 0) ? 1.0 / *hint : 1.0;
  cfg.kkt_tol = tol;
  cfg.max_iters = max_iters;
  cfg.record_iterates = false;
  cfg.record_history = false;
  SolverTrace trace = solve(prob, cfg, Vector::Zero(prob.n));
  if (trace.status != TerminalStatus::converged)
    throw std::runtime_error("reference_solution: did not reach tol " + std::to_string(tol) +
                             " within " + std::to_string(max_iters) + " iterations (" +
                             to_string(trace.status) + ")");
  return trace.final_x;
}

}  // namespace polynewt
