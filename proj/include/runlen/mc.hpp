#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "runlen/charts.hpp"
#include "runlen/rng.hpp"

namespace runlen::mc {

/// Point estimate of a run-length quantity with its Monte-Carlo error.
/// `censored` counts replications that hit the step cap; any censoring makes
/// the estimate unusable for calibration or reporting.
struct RunLengthEstimate {
  double mean = 0.0;
  double stderr_ = 0.0;
  long long replications = 0;    // runs entering the mean
  double conditioned_fraction = 1.0;
  long long censored = 0;
  bool informational = false;    // e.g. a "delay" measured with no shift

  bool valid() const { return censored == 0 && replications > 0; }
};

struct McOptions {
  long long reps = 1'000'000;  // replications (zero-state) or surviving-run target (ced)
  std::uint64_t seed = 0x5EEDBA5Eull;
  int threads = 0;                    // 0: hardware count, RL_THREADS overrides
  long long cap = 10'000'000;         // hard per-replication step cap
};

inline int resolve_threads(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("RL_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  const unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}

namespace detail {

using charts::ChartSpec;
using charts::ChartState;
using charts::Family;

/// Threshold tables indexed by time. Time-varying limits converge to a fixed
/// double after finitely many steps for every family except pm/dpm, whose
/// curve-bending limits keep shrinking and are evaluated past the table from
/// the same running quantities the state already tracks.
struct CompiledChart {
  ChartSpec spec;
  std::vector<double> limit, warn, ref;
  double limit_tail = 0.0, warn_tail = 0.0, ref_tail = 0.0;
  bool open_ended = false;

  explicit CompiledChart(const ChartSpec& s) : spec(s) {
    spec.validate();
    open_ended = spec.family == Family::Pm || spec.family == Family::Dpm;
    const long long cap = open_ended ? 16384 : 1'048'576;
    double prev_l = -1.0, prev_w = -1.0, prev_r = -1.0;
    for (long long i = 1; i <= cap; ++i) {
      const charts::Limits lm = charts::alarm_threshold(spec, i);
      limit.push_back(lm.limit);
      if (!std::isnan(lm.warning)) warn.push_back(lm.warning);
      if (!std::isnan(lm.reference)) ref.push_back(lm.reference);
      if (!open_ended && i > 4 && lm.limit == prev_l &&
          (warn.empty() || lm.warning == prev_w) && (ref.empty() || lm.reference == prev_r))
        break;
      prev_l = lm.limit;
      prev_w = lm.warning;
      prev_r = lm.reference;
    }
    limit_tail = limit.back();
    if (!warn.empty()) warn_tail = warn.back();
    if (!ref.empty()) ref_tail = ref.back();
  }

  double limit_at(const ChartState& st) const {
    const long long t = st.i;
    if (t <= static_cast<long long>(limit.size())) return limit[static_cast<std::size_t>(t - 1)];
    if (!open_ended) return limit_tail;
    // pm/dpm past the precomputed range; H_t is carried by the state.
    const double td = static_cast<double>(t);
    if (spec.family == Family::Pm) return spec.limit_factor / std::sqrt(td) / std::pow(td, spec.p);
    return spec.limit_factor * (std::sqrt(2.0 * td - st.harm) / td) / std::pow(td, spec.p);
  }

  double warn_at(long long t) const {
    if (warn.empty()) return std::numeric_limits<double>::quiet_NaN();
    return t <= static_cast<long long>(warn.size()) ? warn[static_cast<std::size_t>(t - 1)]
                                                    : warn_tail;
  }

  double ref_at(long long t) const {
    if (ref.empty()) return std::numeric_limits<double>::quiet_NaN();
    return t <= static_cast<long long>(ref.size()) ? ref[static_cast<std::size_t>(t - 1)] : ref_tail;
  }

  void prepare(ChartState& st) const {
    const std::size_t w =
        (spec.family == Family::Ma || spec.family == Family::Dma) ? static_cast<std::size_t>(spec.w) : 0;
    if (st.xwin.size() != w) st.xwin.assign(w, 0.0);
    const std::size_t mw = spec.family == Family::Dma ? w : 0;
    if (st.mwin.size() != mw) st.mwin.assign(mw, 0.0);
  }
};

/// Run one replication; returns the alarm time, or -1 if the cap was hit.
/// When `x1` is non-null the first observation is pinned to *x1 (no draw).
inline long long run_once(const CompiledChart& cc, ChartState& st, NormalStream& g,
                          long long tau, double delta, long long cap, const double* x1 = nullptr) {
  cc.prepare(st);
  st.reset();
  const ChartSpec& spec = cc.spec;
  for (long long t = 1; t <= cap; ++t) {
    double x;
    if (x1 != nullptr && t == 1)
      x = *x1;
    else
      x = g.normal() + (t >= tau ? delta : 0.0);
    charts::detail::step_core(spec, st, x, cc.warn_at(t), cc.ref_at(t));
    if (charts::detail::alarm_from_state(spec, st, cc.limit_at(st))) return t;
  }
  return -1;
}

struct ChunkSums {
  double sum = 0.0, sumsq = 0.0;
  long long kept = 0, censored = 0, attempts = 0;
};

inline constexpr long long kChunk = 1024;

/// Runs attempts [first, last) split into fixed chunks. Chunk c always covers
/// the same attempt indices and is reduced locally in index order, so the
/// combined result is independent of how chunks are assigned to threads.
template <typename PerAttempt>
std::vector<ChunkSums> run_chunked(long long first, long long last, int threads,
                                   PerAttempt&& per_attempt) {
  const long long total = last - first;
  if (total <= 0) return {};
  const long long nchunks = (total + kChunk - 1) / kChunk;
  std::vector<ChunkSums> partials(static_cast<std::size_t>(nchunks));
  std::atomic<long long> next{0};

  const auto worker = [&]() {
    ChartState scratch;
    for (;;) {
      const long long c = next.fetch_add(1, std::memory_order_relaxed);
      if (c >= nchunks) return;
      ChunkSums acc;
      const long long lo = first + c * kChunk;
      const long long hi = std::min(last, lo + kChunk);
      for (long long a = lo; a < hi; ++a) per_attempt(a, scratch, acc);
      acc.attempts = hi - lo;
      partials[static_cast<std::size_t>(c)] = acc;
    }
  };

  const int nthreads = std::max(1, static_cast<int>(std::min<long long>(threads, nchunks)));
  if (nthreads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(nthreads));
    for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  return partials;
}

/// Deterministic combination: Neumaier-compensated sums taken in chunk order.
inline RunLengthEstimate combine(const std::vector<ChunkSums>& parts) {
  double sum = 0.0, comp = 0.0, sumsq = 0.0, compsq = 0.0;
  long long kept = 0, censored = 0, attempts = 0;
  const auto add = [](double& s, double& c, double v) {
    const double t = s + v;
    c += std::abs(s) >= std::abs(v) ? (s - t) + v : (v - t) + s;
    s = t;
  };
  for (const ChunkSums& p : parts) {
    add(sum, comp, p.sum);
    add(sumsq, compsq, p.sumsq);
    kept += p.kept;
    censored += p.censored;
    attempts += p.attempts;
  }
  sum += comp;
  sumsq += compsq;

  RunLengthEstimate est;
  est.replications = kept;
  est.censored = censored;
  est.conditioned_fraction = attempts > 0
      ? static_cast<double>(kept + censored) / static_cast<double>(attempts)
      : 0.0;
  if (kept > 0) {
    est.mean = sum / static_cast<double>(kept);
    if (kept > 1) {
      const double var = std::max(0.0, (sumsq - sum * sum / static_cast<double>(kept)) /
                                           static_cast<double>(kept - 1));
      est.stderr_ = std::sqrt(var / static_cast<double>(kept));
    }
  }
  return est;
}

}  // namespace detail

/// Smallest alarm time under the change-point model, one replication.
inline long long sample_run_length(const charts::ChartSpec& spec,
                                   const charts::ChangePointModel& model, NormalStream& stream,
                                   long long cap = 10'000'000) {
  detail::CompiledChart cc(spec);
  charts::ChartState st = charts::init_state(spec);
  return detail::run_once(cc, st, stream, model.tau, model.delta, cap);
}

/// Conditional expected delay D_tau = E(L - tau + 1 | L >= tau), estimated by
/// rejection: paths alarming before tau are discarded. A deterministic pilot
/// fixes the number of attempts so results do not depend on thread count.
inline RunLengthEstimate ced(const charts::ChartSpec& spec, const charts::ChangePointModel& model,
                             const McOptions& opts) {
  if (model.tau < 1) throw std::invalid_argument("ced: tau must be >= 1");
  if (opts.reps < 1000) throw std::invalid_argument("ced: need at least 1000 replications");
  const detail::CompiledChart cc(spec);
  const SeedPlan plan{opts.seed};
  const int threads = resolve_threads(opts.threads);
  const long long tau = model.tau;
  const double delta = model.delta;

  const auto attempt = [&](long long a, charts::ChartState& scratch, detail::ChunkSums& acc) {
    NormalStream g = plan.stream(static_cast<std::uint64_t>(a));
    const long long L = detail::run_once(cc, scratch, g, tau, delta, opts.cap);
    if (L < 0) {
      ++acc.censored;  // survived past the cap; delay unknown
      return;
    }
    if (L >= tau) {
      const double d = static_cast<double>(L - tau + 1);
      ++acc.kept;
      acc.sum += d;
      acc.sumsq += d * d;
    }
  };

  long long total = opts.reps;
  std::vector<detail::ChunkSums> parts;
  if (tau == 1) {
    parts = detail::run_chunked(0, total, threads, attempt);
  } else {
    const long long pilot = std::min<long long>(20'000, std::max<long long>(2'000, opts.reps / 10));
    parts = detail::run_chunked(0, pilot, threads, attempt);
    long long kept = 0, censored = 0;
    for (const auto& p : parts) {
      kept += p.kept;
      censored += p.censored;
    }
    const double frac = static_cast<double>(kept + censored) / static_cast<double>(pilot);
    if (frac < 1e-3)
      throw std::runtime_error("ced: conditioned fraction below 1e-3; tau unreachable for this design");
    const long long remaining_target = opts.reps - (kept + censored);
    if (remaining_target > 0) {
      const double margin = frac >= 1.0 ? 1.0 : 1.02;
      total = pilot + static_cast<long long>(
                          std::ceil(static_cast<double>(remaining_target) * margin / frac));
      auto more = detail::run_chunked(pilot, total, threads, attempt);
      parts.insert(parts.end(), more.begin(), more.end());
    } else {
      total = pilot;
    }
  }

  RunLengthEstimate est = detail::combine(parts);
  est.informational = delta == 0.0 && tau > 1;
  return est;
}

/// Zero-state ARL: the change is in effect from the first observation
/// (tau = 1), or never (delta = 0) for the in-control ARL.
inline RunLengthEstimate zero_state_arl(const charts::ChartSpec& spec, double delta,
                                        const McOptions& opts) {
  return ced(spec, charts::ChangePointModel{1, delta}, opts);
}

/// Steady-state proxy: the conditional expected delay at tau = 100.
inline RunLengthEstimate steady_state_arl(const charts::ChartSpec& spec, double delta,
                                          const McOptions& opts) {
  return ced(spec, charts::ChangePointModel{100, delta}, opts);
}

/// D_tau for tau = 1..tau_max with common random numbers: replication a uses
/// the same substream at every tau, which sharpens profile contrasts.
inline std::vector<RunLengthEstimate> ced_profile(const charts::ChartSpec& spec, double delta,
                                                  long long tau_max, const McOptions& opts) {
  if (tau_max < 1) throw std::invalid_argument("ced_profile: tau_max must be >= 1");
  std::vector<RunLengthEstimate> out;
  out.reserve(static_cast<std::size_t>(tau_max));
  for (long long tau = 1; tau <= tau_max; ++tau)
    out.push_back(ced(spec, charts::ChangePointModel{tau, delta}, opts));
  return out;
}

/// Delay profile conditioned on the first observation: X_1 is pinned to x1,
/// the shift applies from t = 2, and the mean of L - 1 is reported per grid
/// point. Grid points whose x1 alarms immediately are marked inadmissible.
struct X1ProfilePoint {
  double x1 = 0.0;
  bool admissible = true;
  RunLengthEstimate est;
};

inline std::vector<X1ProfilePoint> conditional_delay_given_x1(const charts::ChartSpec& spec,
                                                              double delta,
                                                              const std::vector<double>& x1_grid,
                                                              const McOptions& opts) {
  const detail::CompiledChart cc(spec);
  const SeedPlan plan{opts.seed};
  const int threads = resolve_threads(opts.threads);
  std::vector<X1ProfilePoint> out;
  out.reserve(x1_grid.size());

  for (const double x1 : x1_grid) {
    X1ProfilePoint pt;
    pt.x1 = x1;
    {  // immediate alarm is a property of x1 alone
      charts::ChartState probe = charts::init_state(spec);
      charts::update(spec, probe, x1);
      if (charts::check_alarm(spec, probe)) {
        pt.admissible = false;
        out.push_back(pt);
        continue;
      }
    }
    const auto attempt = [&](long long a, charts::ChartState& scratch, detail::ChunkSums& acc) {
      NormalStream g = plan.stream(static_cast<std::uint64_t>(a));
      const long long L = detail::run_once(cc, scratch, g, 2, delta, opts.cap, &x1);
      if (L < 0) {
        ++acc.censored;
        return;
      }
      const double d = static_cast<double>(L - 1);
      ++acc.kept;
      acc.sum += d;
      acc.sumsq += d * d;
    };
    pt.est = detail::combine(detail::run_chunked(0, opts.reps, threads, attempt));
    out.push_back(pt);
  }
  return out;
}

}  // namespace runlen::mc
