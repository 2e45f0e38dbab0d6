#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "runlen/normal.hpp"

namespace runlen::analytic {

/// Standard deviation of an EWMA statistic after i steps of unit-variance
/// input: sqrt(lambda/(2-lambda) * (1 - (1-lambda)^(2i))).
inline double ewma_sd(double lambda, long i) {
  if (!(lambda > 0.0 && lambda <= 1.0)) throw std::invalid_argument("ewma_sd: lambda out of (0,1]");
  if (i < 1) throw std::invalid_argument("ewma_sd: i must be >= 1");
  const double lbar = 1.0 - lambda;
  return std::sqrt(lambda / (2.0 - lambda) * (1.0 - std::pow(lbar, 2.0 * static_cast<double>(i))));
}

inline double ewma_sd_inf(double lambda) {
  if (!(lambda > 0.0 && lambda <= 1.0)) throw std::invalid_argument("ewma_sd_inf: lambda out of (0,1]");
  return std::sqrt(lambda / (2.0 - lambda));
}

/// Standard deviation of the smoothed input driving a mixed EWMA-CUSUM chart;
/// identical in form to ewma_sd.
inline double sigma_q(double lambda_q, long i) { return ewma_sd(lambda_q, i); }
inline double sigma_q_inf(double lambda_q) { return ewma_sd_inf(lambda_q); }

/// Variance of the second-stage (double) EWMA statistic at time i.
inline double dewma_var(double lambda, long i) {
  if (!(lambda > 0.0 && lambda <= 1.0)) throw std::invalid_argument("dewma_var: lambda out of (0,1]");
  if (i < 1) throw std::invalid_argument("dewma_var: i must be >= 1");
  const double lbar = 1.0 - lambda;
  const double l2 = lbar * lbar;
  const double t = static_cast<double>(i);
  const double p2i = std::pow(lbar, 2.0 * t);
  const double num = 1.0 + l2 - (t * t + 2.0 * t + 1.0) * p2i +
                     (2.0 * t * t + 2.0 * t - 1.0) * p2i * l2 - t * t * p2i * l2 * l2;
  const double d = 1.0 - l2;
  return std::pow(lambda, 4) * num / (d * d * d);
}

inline double dewma_var_inf(double lambda) {
  if (!(lambda > 0.0 && lambda <= 1.0)) throw std::invalid_argument("dewma_var_inf: lambda out of (0,1]");
  const double l2 = (1.0 - lambda) * (1.0 - lambda);
  const double d = 1.0 - l2;
  return std::pow(lambda, 4) * (1.0 + l2) / (d * d * d);
}

/// Variance of the triple EWMA statistic, summed from its squared weights.
/// For i.i.d. unit-variance input this is exact: the statistic is the linear
/// form sum_j lambda^3 * C(i-j+2,2) * (1-lambda)^(i-j) X_j.
inline double tewma_var(double lambda, long i) {
  if (!(lambda > 0.0 && lambda <= 1.0)) throw std::invalid_argument("tewma_var: lambda out of (0,1]");
  if (i < 1) throw std::invalid_argument("tewma_var: i must be >= 1");
  const double l2 = (1.0 - lambda) * (1.0 - lambda);
  const double l6 = std::pow(lambda, 6);
  double sum = 0.0, decay = 1.0;
  for (long m = 0; m < i; ++m) {
    const double tri = 0.5 * static_cast<double>(m + 1) * static_cast<double>(m + 2);
    sum += tri * tri * decay;
    decay *= l2;
  }
  return l6 * sum;
}

inline double tewma_var_inf(double lambda) {
  if (!(lambda > 0.0 && lambda <= 1.0)) throw std::invalid_argument("tewma_var_inf: lambda out of (0,1]");
  if (lambda == 1.0) return 1.0;
  const double l2 = (1.0 - lambda) * (1.0 - lambda);
  const double l6 = std::pow(lambda, 6);
  double sum = 0.0, decay = 1.0;
  for (long m = 0;; ++m) {
    const double tri = 0.5 * static_cast<double>(m + 1) * static_cast<double>(m + 2);
    const double term = tri * tri * decay;
    sum += term;
    if (term < sum * 1e-18 && m > 8) break;
    decay *= l2;
  }
  return l6 * sum;
}

/// Double-moving-average variance in the fully windowed regime i >= 2w-1,
/// as the sum of the squared triangular weights.
inline double dma_var_asymptotic(long w) {
  if (w < 1) throw std::invalid_argument("dma_var_asymptotic: w must be >= 1");
  const double wd = static_cast<double>(w);
  return (1.0 + (wd - 1.0) * (2.0 * wd - 1.0) / (3.0 * wd)) / (wd * wd);
}

/// The same quantity written as a double sum over index pairs in the trailing
/// window; kept alongside the compact form so their equality can be asserted.
inline double dma_var_asymptotic_pair_sum(long w) {
  if (w < 1) throw std::invalid_argument("dma_var_asymptotic_pair_sum: w must be >= 1");
  const double wd = static_cast<double>(w);
  double cross = 0.0;
  for (long j1 = w; j1 <= 2 * w - 1; ++j1)
    for (long j2 = j1 + 1; j2 <= 2 * w - 1; ++j2) cross += static_cast<double>(j1 - j2 + w);
  return (1.0 + 2.0 / (wd * wd) * cross) / (wd * wd);
}

/// Variance of the double-moving-average statistic at any time i. Before the
/// window fills (i < 2w-1) there is no compact expression; the weights of the
/// averaged trailing means are expanded and their squares summed.
inline double dma_var(long w, long i) {
  if (w < 1 || i < 1) throw std::invalid_argument("dma_var: need w >= 1, i >= 1");
  if (i >= 2 * w - 1) return dma_var_asymptotic(w);
  std::vector<double> c(static_cast<std::size_t>(i), 0.0);
  const long span = std::min(i, w);
  const double outer = 1.0 / static_cast<double>(span);
  for (long m = i - span + 1; m <= i; ++m) {
    const long inner_span = std::min(m, w);
    const double inner = 1.0 / static_cast<double>(inner_span);
    for (long j = m - inner_span + 1; j <= m; ++j) c[static_cast<std::size_t>(j - 1)] += outer * inner;
  }
  double var = 0.0;
  for (double x : c) var += x * x;
  return var;
}

/// Exact harmonic number H_t, summed in ascending order.
inline double harmonic(long t) {
  if (t < 1) throw std::invalid_argument("harmonic: t must be >= 1");
  double h = 0.0;
  for (long j = 1; j <= t; ++j) h += 1.0 / static_cast<double>(j);
  return h;
}

inline constexpr double kEulerMascheroni = 0.57721566490153286061;

/// Asymptotic expansion ln t + gamma + 1/(2t) - 1/(12 t^2); the neglected
/// remainder is O(t^-4).
inline double harmonic_approx(long t) {
  if (t < 1) throw std::invalid_argument("harmonic_approx: t must be >= 1");
  const double td = static_cast<double>(t);
  return std::log(td) + kEulerMascheroni + 1.0 / (2.0 * td) - 1.0 / (12.0 * td * td);
}

/// Standard deviation of the double progressive mean at time t:
/// sqrt(2t - H_t) / t.
inline double dpm_sd(long t) {
  if (t < 1) throw std::invalid_argument("dpm_sd: t must be >= 1");
  const double td = static_cast<double>(t);
  return std::sqrt(2.0 * td - harmonic(t)) / td;
}

/// Closed-form ARL of a Shewhart chart with symmetric limit c under mean
/// shift delta: run length is geometric with the per-step signal probability.
inline double shewhart_arl(double c, double delta) {
  if (!(c > 0.0)) throw std::invalid_argument("shewhart_arl: c must be > 0");
  const double p = norm_cdf(-c - delta) + norm_cdf(-c + delta);
  return 1.0 / p;
}

}  // namespace runlen::analytic
