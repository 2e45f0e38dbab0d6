#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "runlen/analytic.hpp"
#include "runlen/charts.hpp"
#include "runlen/mc.hpp"
#include "runlen/numeric.hpp"

namespace runlen::calibrate {

/// CUSUM reference value matched to a smoothed input: k = a* sigma_Q,inf.
inline double k_from_lambda(double lambda_q, double a_star) {
  if (!(lambda_q > 0.0 && lambda_q <= 1.0))
    throw std::invalid_argument("k_from_lambda: lambda_q out of (0,1]");
  if (!(a_star > 0.0)) throw std::invalid_argument("k_from_lambda: a_star must be > 0");
  return a_star * analytic::sigma_q_inf(lambda_q);
}

/// Rounding to the next integer, half away from zero.
inline long round_half_away(double x) {
  return static_cast<long>(x >= 0.0 ? std::floor(x + 0.5) : std::ceil(x - 0.5));
}

struct MatchedDesigns {
  double sigma_d2 = 0.0;  // asymptotic variance of the dma statistic
  int w1 = 0;             // matched ma window
  double lambda = 0.0;    // matched ewma smoothing constant
};

/// Match MA(w1) and EWMA(lambda) to a DMA(w2) design by equating the final
/// variance of the plotted statistic: w1 = [1/sigma_D^2],
/// lambda = 2 sigma_D^2 / (sigma_D^2 + 1).
inline MatchedDesigns match_ma_from_dma(int w2) {
  if (w2 < 1) throw std::invalid_argument("match_ma_from_dma: w2 must be >= 1");
  MatchedDesigns m;
  m.sigma_d2 = analytic::dma_var_asymptotic(w2);
  m.w1 = static_cast<int>(round_half_away(1.0 / m.sigma_d2));
  m.lambda = 2.0 * m.sigma_d2 / (m.sigma_d2 + 1.0);
  return m;
}

/// Smoothing constant whose asymptotic EWMA variance lambda/(2-lambda) equals
/// the given target variance.
inline double match_lambda_by_asymptotic_variance(double target_var) {
  if (!(target_var > 0.0 && target_var <= 1.0))
    throw std::invalid_argument("match_lambda_by_asymptotic_variance: variance out of (0,1]");
  return 2.0 * target_var / (target_var + 1.0);
}

/// Deterministic EWMA limit calibration through the numeric ARL backend.
inline double calibrate_ewma_limit_numeric(double lambda, double in_control_arl,
                                           charts::LimitPolicy policy) {
  double lo = 0.25, hi = 6.0;
  while (analytic::ewma_arl_numeric(lambda, hi, 0.0, policy).value < in_control_arl) hi *= 1.5;
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    (analytic::ewma_arl_numeric(lambda, mid, 0.0, policy).value < in_control_arl ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

struct CalibrationTarget {
  double in_control_arl = 370.0;
  double tolerance = 0.0025;          // relative band on the achieved ARL
  int max_iterations = 80;
  long long n_reps_final = 1'000'000;
  long long n_reps_initial = 20'000;
};

struct CalibrationResult {
  double limit_factor = 0.0;
  mc::RunLengthEstimate achieved;  // verification run with an independent seed
  int evaluations = 0;
};

/// Stochastic root-finding of the limit factor (AL for rrcusum) hitting a
/// target in-control ARL. Bisection over a bracket with common random
/// numbers across evaluations -- the same substreams make the empirical ARL
/// monotone in the limit, so escalating the replication count is all that is
/// needed -- then a verification run on an independent seed, with secant
/// corrections if the verification misses the band.
inline CalibrationResult calibrate_limit(const charts::ChartSpec& proto,
                                         const CalibrationTarget& target,
                                         const mc::McOptions& base_opts) {
  if (!(target.in_control_arl > 1.0)) throw std::invalid_argument("calibrate_limit: A must be > 1");
  if (!(target.tolerance > 0.0)) throw std::invalid_argument("calibrate_limit: tolerance must be > 0");
  const double A = target.in_control_arl;
  const int threads = mc::resolve_threads(base_opts.threads);
  int evals = 0;

  // Search-phase evaluator. Replications are truncated at 20A and censored
  // runs counted at the truncation point, giving a lower bound on the ARL
  // that is exact wherever the design is anywhere near the target (the
  // in-control run length is asymptotically geometric, so P(L > 20A) is
  // negligible there). Bracket probes far above the target stay cheap.
  const long long search_cap = std::min<long long>(
      base_opts.cap, std::max<long long>(2000, static_cast<long long>(20.0 * A)));
  const auto arl_lower_bound = [&](double limit, long long reps, std::uint64_t seed) {
    ++evals;
    const mc::detail::CompiledChart cc(proto.with_limit(limit));
    const SeedPlan plan{seed};
    const auto attempt = [&](long long a, charts::ChartState& scratch, mc::detail::ChunkSums& acc) {
      NormalStream g = plan.stream(static_cast<std::uint64_t>(a));
      long long L = mc::detail::run_once(cc, scratch, g, charts::ChangePointModel::kNever, 0.0,
                                         search_cap);
      if (L < 0) L = search_cap;
      ++acc.kept;
      acc.sum += static_cast<double>(L);
      acc.sumsq += static_cast<double>(L) * static_cast<double>(L);
    };
    return mc::detail::combine(mc::detail::run_chunked(0, reps, threads, attempt)).mean;
  };

  // Bracket in limit-factor units; expand geometrically if the target ARL
  // escapes it. rrcusum keeps AL above the fixed WL.
  const double floor_limit =
      proto.family == charts::Family::RrCusum ? proto.warning_factor * (1.0 + 1e-9) : 1e-6;
  double lo = std::max(0.5, floor_limit);
  double hi = proto.family == charts::Family::RrCusum ? proto.warning_factor + 3.0 : 6.0;
  long long n = target.n_reps_initial;
  const std::uint64_t crn_seed = base_opts.seed;

  for (int guard = 0; arl_lower_bound(hi, n, crn_seed) < A; ++guard) {
    lo = hi;
    hi *= 1.7;
    if (guard > 24) throw std::runtime_error("calibrate_limit: no upper bracket found");
  }
  while (lo > floor_limit && arl_lower_bound(lo, n, crn_seed) > A) {
    hi = lo;
    lo = std::max(floor_limit, 0.55 * lo);
    if (lo == floor_limit) break;
  }

  // Track evaluations near the root for the local elasticity d(ln ARL)/d(limit).
  // The bisection locates the root coarsely; the verification loop below
  // polishes it, so the search phase can run on a fraction of the final
  // replication budget.
  const long long n_search_cap = std::max(target.n_reps_initial, target.n_reps_final / 4);
  std::vector<std::pair<double, double>> trace;  // (limit, ln arl)
  int at_cap = 0;
  for (int it = 0; it < target.max_iterations; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double est = arl_lower_bound(mid, n, crn_seed);
    trace.emplace_back(mid, std::log(est));
    if (est < A)
      lo = mid;
    else
      hi = mid;
    if (n >= n_search_cap) ++at_cap;
    n = std::min(n_search_cap, (n * 8) / 5);
    if (at_cap >= 2 && (hi - lo) < 2e-4 * hi) break;
  }

  double slope = 1.0;  // fallback elasticity
  if (trace.size() >= 2) {
    // least-squares slope over the most recent evaluations
    const std::size_t m = std::min<std::size_t>(trace.size(), 6);
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t j = trace.size() - m; j < trace.size(); ++j) {
      sx += trace[j].first;
      sy += trace[j].second;
      sxx += trace[j].first * trace[j].first;
      sxy += trace[j].first * trace[j].second;
    }
    const double md = static_cast<double>(m);
    const double denom = md * sxx - sx * sx;
    if (denom > 0) slope = (md * sxy - sx * sy) / denom;
    if (!(slope > 1e-9)) slope = 1.0;
  }

  double limit = 0.5 * (lo + hi);
  CalibrationResult out;
  const std::uint64_t verify_seed = base_opts.seed ^ 0x9E3779B97F4A7C15ull;
  for (int attempt = 0;; ++attempt) {
    // Verification runs on an independent seed with the real cap; censoring
    // here is a hard error, never an alarm.
    mc::McOptions o = base_opts;
    o.reps = target.n_reps_final;
    o.seed = verify_seed + static_cast<std::uint64_t>(attempt);
    ++evals;
    const mc::RunLengthEstimate v = mc::zero_state_arl(proto.with_limit(limit), 0.0, o);
    if (!v.valid()) throw std::runtime_error("calibrate_limit: censored in-control replication");
    if (std::abs(v.mean - A) <= target.tolerance * A) {
      out.limit_factor = limit;
      out.achieved = v;
      out.evaluations = evals;
      return out;
    }
    if (attempt >= 6)
      throw std::runtime_error("calibrate_limit: Monte-Carlo noise exceeds tolerance at max iterations");
    limit += (std::log(A) - std::log(v.mean)) / slope;
  }
}

struct WindowSearchPoint {
  int w = 0;
  double limit_factor = 0.0;
  mc::RunLengthEstimate d100;
};

struct WindowSearchResult {
  int w_best = 0;
  std::vector<WindowSearchPoint> profile;
};

/// Steady-state-optimal window: every candidate w is calibrated to the target
/// in-control ARL, its D_100 estimated with common random numbers, and the
/// minimizer returned alongside the whole profile.
inline WindowSearchResult optimize_window(charts::Family family, double delta, int w_lo, int w_hi,
                                          const CalibrationTarget& target,
                                          const mc::McOptions& calib_opts,
                                          const mc::McOptions& ced_opts) {
  if (family != charts::Family::Ma && family != charts::Family::Dma)
    throw std::invalid_argument("optimize_window: family must be ma or dma");
  if (w_lo < 1 || w_hi < w_lo) throw std::invalid_argument("optimize_window: bad window range");

  WindowSearchResult res;
  double best = std::numeric_limits<double>::infinity();
  for (int w = w_lo; w <= w_hi; ++w) {
    const charts::ChartSpec proto = family == charts::Family::Ma ? charts::ChartSpec::ma(w, 1.0)
                                                                 : charts::ChartSpec::dma(w, 1.0);
    const CalibrationResult cal = calibrate_limit(proto, target, calib_opts);
    const charts::ChartSpec spec = proto.with_limit(cal.limit_factor);
    WindowSearchPoint pt;
    pt.w = w;
    pt.limit_factor = cal.limit_factor;
    pt.d100 = mc::steady_state_arl(spec, delta, ced_opts);
    if (!pt.d100.valid()) throw std::runtime_error("optimize_window: censored steady-state estimate");
    if (pt.d100.mean < best) {
      best = pt.d100.mean;
      res.w_best = w;
    }
    res.profile.push_back(pt);
  }
  return res;
}

}  // namespace runlen::calibrate
