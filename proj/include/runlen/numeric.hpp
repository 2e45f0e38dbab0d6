#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "runlen/analytic.hpp"
#include "runlen/charts.hpp"
#include "runlen/normal.hpp"

namespace runlen::analytic {

/// Deterministic ARL backends used as cross-checks for the Monte-Carlo
/// engine. `value` is the zero-state ARL; `est_truncation_error` bounds the
/// discretization/truncation effect actually observed while computing it.
struct NumericArlResult {
  enum class Method { MarkovChain, FiniteHorizonRecursion, ClosedForm };

  double value = 0.0;
  Method method = Method::ClosedForm;
  int grid_size = 0;
  long long horizon = 0;
  double est_truncation_error = 0.0;
  bool two_sided_approximation = false;
};

namespace detail {

// Dense LU solve with partial pivoting; the transition matrices here are a
// few hundred rows, nothing more.
inline std::vector<double> solve_dense(std::vector<double> a, std::vector<double> b) {
  const std::size_t n = b.size();
  std::vector<std::size_t> piv(n);
  for (std::size_t i = 0; i < n; ++i) piv[i] = i;
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t best = col;
    double mag = std::abs(a[col * n + col]);
    for (std::size_t r = col + 1; r < n; ++r) {
      const double m = std::abs(a[r * n + col]);
      if (m > mag) {
        mag = m;
        best = r;
      }
    }
    if (mag == 0.0) throw std::runtime_error("solve_dense: singular transition system");
    if (best != col) {
      for (std::size_t c = 0; c < n; ++c) std::swap(a[best * n + c], a[col * n + c]);
      std::swap(b[best], b[col]);
    }
    const double inv = 1.0 / a[col * n + col];
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = a[r * n + col] * inv;
      if (f == 0.0) continue;
      a[r * n + col] = 0.0;
      for (std::size_t c = col + 1; c < n; ++c) a[r * n + c] -= f * a[col * n + c];
      b[r] -= f * b[col];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t c = i + 1; c < n; ++c) s -= a[i * n + c] * x[c];
    x[i] = s / a[i * n + i];
  }
  return x;
}

// One-sided CUSUM ARL from state 0 by midpoint-cell discretization of the
// reflected walk on (0, h], an explicit atom at 0 (the reflection barrier
// carries point mass), and an absorbing alarm state.
inline double cusum_arl_one_sided_grid(double k, double h, double delta, int m) {
  const double w = h / m;
  const auto n = static_cast<std::size_t>(m) + 1;  // state 0: atom, states 1..m: cells
  std::vector<double> rep(n, 0.0);
  for (std::size_t j = 1; j < n; ++j) rep[j] = (static_cast<double>(j) - 0.5) * w;

  const auto trans = [&](double x, std::size_t j) {
    if (j == 0) return norm_cdf(k - x - delta);  // collapse to the barrier
    const double hi = norm_cdf(static_cast<double>(j) * w + k - x - delta);
    const double lo = norm_cdf((static_cast<double>(j) - 1.0) * w + k - x - delta);
    return hi - lo;
  };

  std::vector<double> a(n * n);
  std::vector<double> rhs(n, 1.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      a[i * n + j] = (i == j ? 1.0 : 0.0) - trans(rep[i], j);
  const std::vector<double> arl = solve_dense(std::move(a), std::move(rhs));
  return arl[0];  // the zero-state start is the atom itself
}

// Fixed-limit EWMA ARL from state 0 on [-b, b].
inline double ewma_arl_fixed_grid(double lambda, double b, double delta, int m) {
  const double w = 2.0 * b / m;
  std::vector<double> cell(static_cast<std::size_t>(m));
  for (int j = 0; j < m; ++j) cell[static_cast<std::size_t>(j)] = -b + (j + 0.5) * w;

  const auto trans = [&](double u, int j) {
    const double c = cell[static_cast<std::size_t>(j)];
    const double drift = (1.0 - lambda) * u;
    const double hi = norm_cdf((c + 0.5 * w - drift) / lambda - delta);
    const double lo = norm_cdf((c - 0.5 * w - drift) / lambda - delta);
    return hi - lo;
  };

  const auto n = static_cast<std::size_t>(m);
  std::vector<double> a(n * n);
  std::vector<double> rhs(n, 1.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      a[i * n + j] = (i == j ? 1.0 : 0.0) - trans(cell[i], static_cast<int>(j));
  const std::vector<double> arl = solve_dense(std::move(a), std::move(rhs));

  double start = 1.0;
  for (std::size_t j = 0; j < n; ++j) start += trans(0.0, static_cast<int>(j)) * arl[j];
  return start;
}

struct GaussLegendre {
  std::vector<double> node, weight;  // on [-1, 1]

  explicit GaussLegendre(int n) : node(static_cast<std::size_t>(n)), weight(node.size()) {
    for (int i = 0; i < n; ++i) {
      double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
      double dp = 0.0;
      for (int it = 0; it < 100; ++it) {
        double p0 = 1.0, p1 = x;
        for (int j = 2; j <= n; ++j) {
          const double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
          p0 = p1;
          p1 = p2;
        }
        dp = n * (x * p1 - p0) / (x * x - 1.0);
        const double dx = p1 / dp;
        x -= dx;
        if (std::abs(dx) < 1e-15) break;
      }
      node[static_cast<std::size_t>(i)] = x;
      weight[static_cast<std::size_t>(i)] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
  }
};

}  // namespace detail

/// One-sided CUSUM zero-state ARL via transition-matrix discretization.
inline NumericArlResult cusum_arl_markov_one_sided(double k, double h, double delta,
                                                   int grid_size = 400) {
  if (k < 0.0 || h <= 0.0) throw std::invalid_argument("cusum_arl_markov: need k >= 0, h > 0");
  if (grid_size < 50) throw std::invalid_argument("cusum_arl_markov: grid_size must be >= 50");
  NumericArlResult r;
  r.method = NumericArlResult::Method::MarkovChain;
  r.grid_size = grid_size;
  r.value = detail::cusum_arl_one_sided_grid(k, h, delta, grid_size);
  const double coarse = detail::cusum_arl_one_sided_grid(k, h, delta, grid_size / 2);
  r.est_truncation_error = std::abs(r.value - coarse) / 3.0;
  return r;
}

/// Two-sided CUSUM ARL combined as 1/A = 1/A+ + 1/A-. The combination ignores
/// the (rare) joint excursions of both one-sided statistics, so the result is
/// flagged approximate; Monte Carlo is the authoritative two-sided estimate.
inline NumericArlResult cusum_arl_markov(double k, double h, double delta, int grid_size = 400) {
  const NumericArlResult up = cusum_arl_markov_one_sided(k, h, delta, grid_size);
  const NumericArlResult dn = cusum_arl_markov_one_sided(k, h, -delta, grid_size);
  NumericArlResult r;
  r.method = NumericArlResult::Method::MarkovChain;
  r.grid_size = grid_size;
  r.value = 1.0 / (1.0 / up.value + 1.0 / dn.value);
  r.est_truncation_error = up.est_truncation_error + dn.est_truncation_error;
  r.two_sided_approximation = true;
  return r;
}

/// EWMA zero-state ARL. Asymptotic (fixed) limits go through the Markov
/// discretization; time-varying limits through a finite-horizon survival
/// recursion P(L > n) with Gauss-Legendre quadrature over each no-alarm
/// interval, truncated once the survival ratio has stabilized and the
/// geometric tail is added.
inline NumericArlResult ewma_arl_numeric(double lambda, double c, double delta,
                                         charts::LimitPolicy policy, int grid_size = 400,
                                         int quad_nodes = 200, long long max_horizon = 2'000'000) {
  if (!(lambda > 0.0 && lambda <= 1.0)) throw std::invalid_argument("ewma_arl_numeric: lambda out of (0,1]");
  if (!(c > 0.0)) throw std::invalid_argument("ewma_arl_numeric: c must be > 0");

  if (policy == charts::LimitPolicy::Asymptotic) {
    NumericArlResult r;
    r.method = NumericArlResult::Method::MarkovChain;
    r.grid_size = grid_size;
    const double b = c * ewma_sd_inf(lambda);
    r.value = detail::ewma_arl_fixed_grid(lambda, b, delta, grid_size);
    const double coarse = detail::ewma_arl_fixed_grid(lambda, b, delta, grid_size / 2);
    r.est_truncation_error = std::abs(r.value - coarse) / 3.0;
    return r;
  }

  static thread_local int cached_n = 0;
  static thread_local detail::GaussLegendre gl(1);
  if (cached_n != quad_nodes) {
    gl = detail::GaussLegendre(quad_nodes);
    cached_n = quad_nodes;
  }
  const auto nq = static_cast<std::size_t>(quad_nodes);
  const double lbar = 1.0 - lambda;
  const double sd_inf = ewma_sd_inf(lambda);

  std::vector<double> u(nq), g(nq), un(nq), gn(nq);
  // step 1: Z_1 ~ N(lambda*delta, lambda^2); restrict to the first interval
  double half = c * lambda;  // sd of Z_1 is lambda
  double jac = half;         // interval half-width, nodes mapped from [-1,1]
  for (std::size_t q = 0; q < nq; ++q) {
    u[q] = half * gl.node[q];
    g[q] = norm_pdf((u[q] - lambda * delta) / lambda) / lambda;
  }
  double surv = norm_cdf((half - lambda * delta) / lambda) - norm_cdf((-half - lambda * delta) / lambda);

  double arl = 1.0 + surv;  // P(L>0) + P(L>1)
  double prev_ratio = -1.0;
  int stable = 0;
  long long n = 1;
  NumericArlResult r;
  r.method = NumericArlResult::Method::FiniteHorizonRecursion;
  r.grid_size = quad_nodes;
  for (;; ++n) {
    if (n >= max_horizon) throw std::runtime_error("ewma_arl_numeric: horizon exhausted before convergence");
    const double sd_next = ewma_sd(lambda, n + 1);
    const double half_next = c * sd_next;
    double surv_next = 0.0;
    for (std::size_t q = 0; q < nq; ++q) {
      const double z = half_next * gl.node[q];
      double f = 0.0;
      for (std::size_t kq = 0; kq < nq; ++kq) {
        const double arg = (z - lbar * u[kq]) / lambda - delta;
        f += gl.weight[kq] * g[kq] * std::exp(-0.5 * arg * arg);
      }
      f *= jac * kInvSqrt2Pi / lambda;
      un[q] = z;
      gn[q] = f;
      surv_next += gl.weight[q] * f;
    }
    surv_next *= half_next;
    std::swap(u, un);
    std::swap(g, gn);
    jac = half_next;
    arl += surv_next;

    const double ratio = surv_next / surv;
    surv = surv_next;
    if (surv_next < 1e-17) break;
    const bool limits_converged = (sd_inf - sd_next) < 1e-14 * sd_inf;
    if (limits_converged && prev_ratio >= 0.0 && std::abs(ratio - prev_ratio) < 1e-12 * ratio) {
      if (++stable >= 3 && ratio < 1.0) {
        const double tail = surv * ratio / (1.0 - ratio);
        arl += tail;
        r.est_truncation_error = surv * std::abs(ratio - prev_ratio) / ((1.0 - ratio) * (1.0 - ratio));
        break;
      }
    } else {
      stable = 0;
    }
    prev_ratio = ratio;
  }
  r.value = arl;
  r.horizon = n;
  return r;
}

}  // namespace runlen::analytic
