#include "polynewt/prox.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace polynewt {

Vector l1_prox(const Vector& v, double t, double lambda) {
  return soft_threshold(v, t * lambda);
}

Vector project_l1_ball(const Vector& v, double radius) {
  if (radius < 0.0) throw std::invalid_argument("project_l1_ball: negative radius");
  const Index n = v.size();
  if (v.lpNorm<1>() <= radius) return v;
  std::vector<double> u(n);
  for (Index i = 0; i < n; ++i) u[i] = std::abs(v[i]);
  std::sort(u.begin(), u.end(), std::greater<double>());
  double cum = 0.0, tau = 0.0;
  for (Index k = 0; k < n; ++k) {
    cum += u[k];
    const double cand = (cum - radius) / static_cast<double>(k + 1);
    if (k + 1 == n || u[k + 1] <= cand) {
      tau = cand;
      break;
    }
  }
  return soft_threshold(v, tau);
}

Vector linf_prox(const Vector& v, double t, double lambda) {
  return v - project_l1_ball(v, t * lambda);
}

Vector sorted_l1_prox(const Vector& v, double t, const Vector& weights) {
  const Index n = v.size();
  if (weights.size() != n)
    throw std::invalid_argument("sorted_l1_prox: weights length mismatch");
  for (Index i = 0; i + 1 < n; ++i)
    if (weights[i] + 1e-15 < weights[i + 1])
      throw std::invalid_argument("sorted_l1_prox: weights must be nonincreasing");

  std::vector<Index> order(n);
  std::iota(order.begin(), order.end(), Index{0});
  std::sort(order.begin(), order.end(),
            [&](Index i, Index j) { return std::abs(v[i]) > std::abs(v[j]); });

  // Pool adjacent violators on s_i = |v|_(i) - t*w_i: merge while block
  // averages fail to decrease, then clamp at zero.
  std::vector<Index> block_start(n), block_end(n);
  std::vector<double> block_sum(n), block_avg(n);
  Index top = 0;
  for (Index i = 0; i < n; ++i) {
    block_start[top] = i;
    block_end[top] = i;
    block_sum[top] = std::abs(v[order[i]]) - t * weights[i];
    block_avg[top] = block_sum[top];
    while (top > 0 && block_avg[top - 1] <= block_avg[top]) {
      block_sum[top - 1] += block_sum[top];
      block_end[top - 1] = block_end[top];
      block_avg[top - 1] =
          block_sum[top - 1] / static_cast<double>(block_end[top - 1] - block_start[top - 1] + 1);
      --top;
    }
    ++top;
  }

  Vector y = Vector::Zero(n);
  for (Index bl = 0; bl < top; ++bl) {
    const double val = std::max(0.0, block_avg[bl]);
    for (Index i = block_start[bl]; i <= block_end[bl]; ++i) {
      const Index j = order[i];
      y[j] = (v[j] < 0 ? -val : val);
    }
  }
  return y;
}

Vector tv1d_prox(const Vector& v, double t, double lambda) {
  const Index n = v.size();
  const double lam = t * lambda;
  if (n <= 1 || lam == 0.0) return v;

  // Taut-string dynamic program: track the knots of the piecewise linear
  // derivative together with clamp back-pointers tm/tp.
  std::vector<double> x(2 * n), a(2 * n), b(2 * n), tm(n - 1), tp(n - 1);
  Vector out(n);

  Index l = n - 1, r = n;
  tm[0] = v[0] - lam;
  tp[0] = v[0] + lam;
  x[l] = tm[0];
  x[r] = tp[0];
  a[l] = 1.0;
  b[l] = -v[0] + lam;
  a[r] = -1.0;
  b[r] = v[0] + lam;
  double afirst = 1.0, bfirst = -v[1] - lam;
  double alast = -1.0, blast = v[1] - lam;

  for (Index k = 1; k + 1 < n; ++k) {
    double alo = afirst, blo = bfirst;
    Index lo = l;
    for (; lo <= r; ++lo) {
      if (alo * x[lo] + blo > -lam) break;
      alo += a[lo];
      blo += b[lo];
    }
    double ahi = alast, bhi = blast;
    Index hi = r;
    for (; hi >= lo; --hi) {
      if (-ahi * x[hi] - bhi < lam) break;
      ahi += a[hi];
      bhi += b[hi];
    }

    tm[k] = (-lam - blo) / alo;
    l = lo - 1;
    x[l] = tm[k];
    tp[k] = (lam + bhi) / (-ahi);
    r = hi + 1;
    x[r] = tp[k];

    a[l] = alo;
    b[l] = blo + lam;
    a[r] = ahi;
    b[r] = bhi + lam;
    afirst = 1.0;
    bfirst = -v[k + 1] - lam;
    alast = -1.0;
    blast = v[k + 1] - lam;
  }

  double alo = afirst, blo = bfirst;
  Index lo = l;
  for (; lo <= r; ++lo) {
    if (alo * x[lo] + blo > 0.0) break;
    alo += a[lo];
    blo += b[lo];
  }
  out[n - 1] = -blo / alo;
  for (Index k = n - 2; k >= 0; --k) {
    if (out[k + 1] > tp[k])
      out[k] = tp[k];
    else if (out[k + 1] < tm[k])
      out[k] = tm[k];
    else
      out[k] = out[k + 1];
  }
  return out;
}

Vector nonneg_l1_prox(const Vector& v, double t, double lambda) {
  return (v.array() - t * lambda).max(0.0).matrix();
}

}  // namespace polynewt
