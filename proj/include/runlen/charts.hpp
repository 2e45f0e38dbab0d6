#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "runlen/analytic.hpp"

namespace runlen::charts {

enum class Family { Ewma, Cusum, Mec, RrCusum, RrEwma, Ma, Dma, Dewma, Tewma, Pm, Dpm };
enum class LimitPolicy { TimeVarying, Asymptotic };
enum class RunsRule { None, TwoOfTwo, TwoOfThree, ModifiedTwoOfThree };

inline const char* family_name(Family f) {
  switch (f) {
    case Family::Ewma: return "ewma";
    case Family::Cusum: return "cusum";
    case Family::Mec: return "mec";
    case Family::RrCusum: return "rrcusum";
    case Family::RrEwma: return "rrewma";
    case Family::Ma: return "ma";
    case Family::Dma: return "dma";
    case Family::Dewma: return "dewma";
    case Family::Tewma: return "tewma";
    case Family::Pm: return "pm";
    case Family::Dpm: return "dpm";
  }
  return "?";
}

/// Shift-at-tau model on standardized observations: mean 0 before tau,
/// delta from tau on, unit standard deviation throughout.
struct ChangePointModel {
  long long tau = 1;  // kNever for an in-control series
  double delta = 0.0;

  static constexpr long long kNever = std::numeric_limits<long long>::max();

  double mean_at(long long t) const { return t >= tau ? delta : 0.0; }
};

/// Algebraic description of one chart design. Exactly the parameters relevant
/// to the family may be set; validate() rejects anything else. Immutable in
/// use and safe to share across threads.
struct ChartSpec {
  Family family = Family::Ewma;
  double lambda = kUnset;          // smoothing constant (lambda_q for mec)
  double k = kUnset;               // cusum reference value
  double a_star = kUnset;          // mec reference multiplier
  int w = 0;                       // window size (ma/dma)
  double p = kUnset;               // curve-bending exponent (pm/dpm)
  double limit_factor = kUnset;    // c_E, h, b*, c_DE, L, L_S, L_P, L_D
  double warning_factor = kUnset;  // WL (rrcusum)
  double alarm_factor = kUnset;    // AL (rrcusum); may be +inf
  LimitPolicy limit_policy = LimitPolicy::TimeVarying;
  RunsRule rr_kind = RunsRule::None;
  double mu0 = 0.0;
  double sigma0 = 1.0;

  static constexpr double kUnset = std::numeric_limits<double>::quiet_NaN();

  static ChartSpec ewma(double lambda, double c, LimitPolicy pol = LimitPolicy::TimeVarying) {
    ChartSpec s;
    s.family = Family::Ewma;
    s.lambda = lambda;
    s.limit_factor = c;
    s.limit_policy = pol;
    return s;
  }
  static ChartSpec cusum(double k, double h) {
    ChartSpec s;
    s.family = Family::Cusum;
    s.k = k;
    s.limit_factor = h;
    return s;
  }
  static ChartSpec mec(double lambda_q, double a_star, double b_star) {
    ChartSpec s;
    s.family = Family::Mec;
    s.lambda = lambda_q;
    s.a_star = a_star;
    s.limit_factor = b_star;
    return s;
  }
  static ChartSpec rr_cusum(double k, double wl, double al, RunsRule rule) {
    ChartSpec s;
    s.family = Family::RrCusum;
    s.k = k;
    s.warning_factor = wl;
    s.alarm_factor = al;
    s.rr_kind = rule;
    return s;
  }
  static ChartSpec rr_ewma(double lambda, double ls, RunsRule rule,
                           LimitPolicy pol = LimitPolicy::TimeVarying) {
    ChartSpec s;
    s.family = Family::RrEwma;
    s.lambda = lambda;
    s.limit_factor = ls;
    s.rr_kind = rule;
    s.limit_policy = pol;
    return s;
  }
  static ChartSpec ma(int w, double limit) {
    ChartSpec s;
    s.family = Family::Ma;
    s.w = w;
    s.limit_factor = limit;
    return s;
  }
  static ChartSpec dma(int w, double limit) {
    ChartSpec s;
    s.family = Family::Dma;
    s.w = w;
    s.limit_factor = limit;
    return s;
  }
  static ChartSpec dewma(double lambda, double c, LimitPolicy pol = LimitPolicy::TimeVarying) {
    ChartSpec s;
    s.family = Family::Dewma;
    s.lambda = lambda;
    s.limit_factor = c;
    s.limit_policy = pol;
    return s;
  }
  static ChartSpec tewma(double lambda, double c, LimitPolicy pol = LimitPolicy::TimeVarying) {
    ChartSpec s;
    s.family = Family::Tewma;
    s.lambda = lambda;
    s.limit_factor = c;
    s.limit_policy = pol;
    return s;
  }
  static ChartSpec pm(double p, double lp) {
    ChartSpec s;
    s.family = Family::Pm;
    s.p = p;
    s.limit_factor = lp;
    return s;
  }
  static ChartSpec dpm(double p, double ld) {
    ChartSpec s;
    s.family = Family::Dpm;
    s.p = p;
    s.limit_factor = ld;
    return s;
  }

  ChartSpec with_limit(double value) const {
    ChartSpec s = *this;
    if (family == Family::RrCusum)
      s.alarm_factor = value;
    else
      s.limit_factor = value;
    return s;
  }

  double calibrand() const {
    return family == Family::RrCusum ? alarm_factor : limit_factor;
  }

  void validate() const;

  bool uses_runs_rule() const { return family == Family::RrCusum || family == Family::RrEwma; }

  bool is_linear() const {
    switch (family) {
      case Family::Ewma:
      case Family::Dewma:
      case Family::Tewma:
      case Family::Ma:
      case Family::Dma:
      case Family::Pm:
      case Family::Dpm:
        return true;
      default:
        return false;
    }
  }
};

namespace detail {

inline bool set(double v) { return !std::isnan(v); }

inline void require(bool cond, const std::string& what) {
  if (!cond) throw std::invalid_argument("ChartSpec: " + what);
}

}  // namespace detail

inline void ChartSpec::validate() const {
  using detail::require;
  using detail::set;
  require(mu0 == 0.0 && sigma0 == 1.0, "observations must be standardized (mu0=0, sigma0=1)");

  const bool needs_lambda = family == Family::Ewma || family == Family::Mec ||
                            family == Family::RrEwma || family == Family::Dewma ||
                            family == Family::Tewma;
  const bool needs_k = family == Family::Cusum || family == Family::RrCusum;
  const bool needs_w = family == Family::Ma || family == Family::Dma;
  const bool needs_p = family == Family::Pm || family == Family::Dpm;
  const bool needs_limit = family != Family::RrCusum;

  require(set(lambda) == needs_lambda, needs_lambda ? "lambda required" : "lambda is irrelevant here");
  if (needs_lambda) require(lambda > 0.0 && lambda <= 1.0, "lambda must lie in (0,1]");
  require(set(k) == needs_k, needs_k ? "k required" : "k is irrelevant here");
  if (needs_k) require(k >= 0.0, "k must be >= 0");
  require(set(a_star) == (family == Family::Mec),
          family == Family::Mec ? "a_star required" : "a_star is irrelevant here");
  if (family == Family::Mec) require(a_star > 0.0, "a_star must be > 0");
  require((w != 0) == needs_w, needs_w ? "w required" : "w is irrelevant here");
  if (needs_w) require(w >= 1, "w must be a positive integer");
  require(set(p) == needs_p, needs_p ? "p required" : "p is irrelevant here");
  if (needs_p) require(p >= 0.0, "p must be >= 0");

  require(set(limit_factor) == needs_limit,
          needs_limit ? "limit_factor required" : "limit_factor is irrelevant here");
  if (needs_limit) require(limit_factor > 0.0, "limit_factor must be > 0");

  if (family == Family::RrCusum) {
    require(set(warning_factor) && warning_factor > 0.0, "warning_factor (WL) required and > 0");
    require(set(alarm_factor) && alarm_factor > 0.0, "alarm_factor (AL) required and > 0");
    require(warning_factor < alarm_factor, "WL must be below AL");
    require(rr_kind == RunsRule::TwoOfTwo || rr_kind == RunsRule::TwoOfThree,
            "rrcusum supports the 2-of-2 and 2-of-3 supplementary rules");
  } else {
    require(!set(warning_factor) && !set(alarm_factor),
            "warning/alarm limits are rrcusum-only");
  }
  if (family == Family::RrEwma) {
    require(rr_kind != RunsRule::None, "rrewma needs a runs rule");
  } else if (family != Family::RrCusum) {
    require(rr_kind == RunsRule::None, "runs rule is irrelevant here");
  }
}

/// Mutable per-replication recursion state. Single-owner; one instance per
/// simulation path.
struct ChartState {
  long long i = 0;
  double ewma1 = 0.0, ewma2 = 0.0, ewma3 = 0.0;  // stacked EWMA levels; mec keeps Q in ewma1
  double cusum_pos = 0.0, cusum_neg = 0.0;       // C+/C- or M+/M-
  double pm_sum = 0.0, dpm_sum = 0.0;            // running sums of X_t and P_t
  double harm = 0.0;                             // H_t accumulated alongside dpm
  double stat = 0.0;                             // current plotted statistic
  std::vector<double> xwin, mwin;                // trailing windows (ma/dma)
  double xsum = 0.0, msum = 0.0;
  int xpos = 0, mpos = 0;
  std::array<std::int8_t, 3> rr_history = {0, 0, 0};  // zone codes, most recent last

  void reset() {
    i = 0;
    ewma1 = ewma2 = ewma3 = 0.0;
    cusum_pos = cusum_neg = 0.0;
    pm_sum = dpm_sum = harm = 0.0;
    stat = 0.0;
    std::fill(xwin.begin(), xwin.end(), 0.0);
    std::fill(mwin.begin(), mwin.end(), 0.0);
    xsum = msum = 0.0;
    xpos = mpos = 0;
    rr_history = {0, 0, 0};
  }
};

/// Zone codes used by runs rules. For rrewma the sign carries the side and
/// the magnitude whether the point breached the warning limit; 0 marks
/// "no observation yet". For rrcusum bits 0/1 flag the one-sided statistics
/// sitting in the warning zone (WL, AL].
enum : std::int8_t {
  kZoneNone = 0,
  kZoneUpperMid = 1,
  kZoneUpperViol = 2,
  kZoneLowerMid = -1,
  kZoneLowerViol = -2,
};

/// Time-i alarm geometry of a chart: the alarm limit, plus the warning limit
/// (runs-rule charts) and the reference value (mec), NaN when not used.
struct Limits {
  double limit = std::numeric_limits<double>::quiet_NaN();
  double warning = std::numeric_limits<double>::quiet_NaN();
  double reference = std::numeric_limits<double>::quiet_NaN();
};

inline Limits alarm_threshold(const ChartSpec& spec, long long i) {
  if (i < 1) throw std::invalid_argument("alarm_threshold: i must be >= 1");
  const bool tv = spec.limit_policy == LimitPolicy::TimeVarying;
  Limits out;
  switch (spec.family) {
    case Family::Ewma:
      out.limit = spec.limit_factor *
                  (tv ? analytic::ewma_sd(spec.lambda, i) : analytic::ewma_sd_inf(spec.lambda));
      break;
    case Family::Cusum:
      out.limit = spec.limit_factor;
      break;
    case Family::Mec: {
      const double sq = analytic::sigma_q(spec.lambda, i);
      out.limit = spec.limit_factor * sq;
      out.reference = spec.a_star * sq;
      break;
    }
    case Family::RrCusum:
      out.limit = spec.alarm_factor;
      out.warning = spec.warning_factor;
      break;
    case Family::RrEwma:
      out.warning = spec.limit_factor *
                    (tv ? analytic::ewma_sd(spec.lambda, i) : analytic::ewma_sd_inf(spec.lambda));
      break;
    case Family::Ma: {
      const long long m = std::min<long long>(i, spec.w);
      out.limit = spec.limit_factor / std::sqrt(static_cast<double>(m));
      break;
    }
    case Family::Dma:
      out.limit = spec.limit_factor * std::sqrt(analytic::dma_var(spec.w, i));
      break;
    case Family::Dewma:
      out.limit = spec.limit_factor * std::sqrt(tv ? analytic::dewma_var(spec.lambda, i)
                                                   : analytic::dewma_var_inf(spec.lambda));
      break;
    case Family::Tewma:
      out.limit = spec.limit_factor * std::sqrt(tv ? analytic::tewma_var(spec.lambda, i)
                                                   : analytic::tewma_var_inf(spec.lambda));
      break;
    case Family::Pm:
      out.limit = spec.limit_factor / std::sqrt(static_cast<double>(i)) /
                  std::pow(static_cast<double>(i), spec.p);
      break;
    case Family::Dpm:
      out.limit = spec.limit_factor * analytic::dpm_sd(i) /
                  std::pow(static_cast<double>(i), spec.p);
      break;
  }
  return out;
}

inline ChartState init_state(const ChartSpec& spec) {
  spec.validate();
  ChartState st;
  if (spec.family == Family::Ma || spec.family == Family::Dma) {
    st.xwin.assign(static_cast<std::size_t>(spec.w), 0.0);
    if (spec.family == Family::Dma) st.mwin.assign(static_cast<std::size_t>(spec.w), 0.0);
  }
  return st;
}

namespace detail {

/// Advance one observation. Runs-rule and mec charts take the time-(i+1)
/// warning/reference values so that hot loops can feed precomputed tables;
/// the public update() below resolves them from the spec.
inline void step_core(const ChartSpec& spec, ChartState& st, double x, double warn_next,
                      double ref_next) {
  const long long t = ++st.i;
  switch (spec.family) {
    case Family::Ewma:
      st.ewma1 = (1.0 - spec.lambda) * st.ewma1 + spec.lambda * x;
      st.stat = st.ewma1;
      break;
    case Family::Dewma:
      st.ewma1 = (1.0 - spec.lambda) * st.ewma1 + spec.lambda * x;
      st.ewma2 = (1.0 - spec.lambda) * st.ewma2 + spec.lambda * st.ewma1;
      st.stat = st.ewma2;
      break;
    case Family::Tewma:
      st.ewma1 = (1.0 - spec.lambda) * st.ewma1 + spec.lambda * x;
      st.ewma2 = (1.0 - spec.lambda) * st.ewma2 + spec.lambda * st.ewma1;
      st.ewma3 = (1.0 - spec.lambda) * st.ewma3 + spec.lambda * st.ewma2;
      st.stat = st.ewma3;
      break;
    case Family::Cusum:
      st.cusum_pos = std::max(0.0, st.cusum_pos + x - spec.k);
      st.cusum_neg = std::max(0.0, st.cusum_neg - x - spec.k);
      break;
    case Family::Mec:
      st.ewma1 = (1.0 - spec.lambda) * st.ewma1 + spec.lambda * x;
      st.cusum_pos = std::max(0.0, st.cusum_pos + st.ewma1 - ref_next);
      st.cusum_neg = std::max(0.0, st.cusum_neg - st.ewma1 - ref_next);
      break;
    case Family::RrCusum: {
      st.cusum_pos = std::max(0.0, st.cusum_pos + x - spec.k);
      st.cusum_neg = std::max(0.0, st.cusum_neg - x - spec.k);
      std::int8_t code = 0;
      if (st.cusum_pos > warn_next && st.cusum_pos <= spec.alarm_factor) code |= 1;
      if (st.cusum_neg > warn_next && st.cusum_neg <= spec.alarm_factor) code |= 2;
      st.rr_history = {st.rr_history[1], st.rr_history[2], code};
      break;
    }
    case Family::RrEwma: {
      st.ewma1 = (1.0 - spec.lambda) * st.ewma1 + spec.lambda * x;
      st.stat = st.ewma1;
      std::int8_t code;
      if (st.ewma1 > warn_next)
        code = kZoneUpperViol;
      else if (st.ewma1 >= 0.0)
        code = kZoneUpperMid;
      else if (st.ewma1 >= -warn_next)
        code = kZoneLowerMid;
      else
        code = kZoneLowerViol;
      st.rr_history = {st.rr_history[1], st.rr_history[2], code};
      break;
    }
    case Family::Ma: {
      if (t <= spec.w) {
        st.xwin[static_cast<std::size_t>(t - 1)] = x;
        st.xsum += x;
        st.stat = st.xsum / static_cast<double>(t);
      } else {
        st.xsum += x - st.xwin[static_cast<std::size_t>(st.xpos)];
        st.xwin[static_cast<std::size_t>(st.xpos)] = x;
        st.xpos = st.xpos + 1 == spec.w ? 0 : st.xpos + 1;
        st.stat = st.xsum / static_cast<double>(spec.w);
      }
      break;
    }
    case Family::Dma: {
      double m;
      if (t <= spec.w) {
        st.xwin[static_cast<std::size_t>(t - 1)] = x;
        st.xsum += x;
        m = st.xsum / static_cast<double>(t);
        st.mwin[static_cast<std::size_t>(t - 1)] = m;
        st.msum += m;
        st.stat = st.msum / static_cast<double>(t);
      } else {
        st.xsum += x - st.xwin[static_cast<std::size_t>(st.xpos)];
        st.xwin[static_cast<std::size_t>(st.xpos)] = x;
        st.xpos = st.xpos + 1 == spec.w ? 0 : st.xpos + 1;
        m = st.xsum / static_cast<double>(spec.w);
        st.msum += m - st.mwin[static_cast<std::size_t>(st.mpos)];
        st.mwin[static_cast<std::size_t>(st.mpos)] = m;
        st.mpos = st.mpos + 1 == spec.w ? 0 : st.mpos + 1;
        st.stat = st.msum / static_cast<double>(spec.w);
      }
      break;
    }
    case Family::Pm:
      st.pm_sum += x;
      st.stat = st.pm_sum / static_cast<double>(t);
      break;
    case Family::Dpm: {
      st.pm_sum += x;
      st.harm += 1.0 / static_cast<double>(t);
      const double pt = st.pm_sum / static_cast<double>(t);
      st.dpm_sum += pt;
      st.stat = st.dpm_sum / static_cast<double>(t);
      break;
    }
  }
}

/// Alarm predicate given the time-i alarm limit. Pure function of the state.
inline bool alarm_from_state(const ChartSpec& spec, const ChartState& st, double limit) {
  switch (spec.family) {
    case Family::Ewma:
    case Family::Dewma:
    case Family::Tewma:
    case Family::Ma:
    case Family::Dma:
    case Family::Pm:
    case Family::Dpm:
      return std::abs(st.stat - spec.mu0) > limit;
    case Family::Cusum:
    case Family::Mec:
      return std::max(st.cusum_pos, st.cusum_neg) > limit;
    case Family::RrCusum: {
      if (std::max(st.cusum_pos, st.cusum_neg) > spec.alarm_factor) return true;
      const auto& h = st.rr_history;
      if (spec.rr_kind == RunsRule::TwoOfTwo) {
        const std::int8_t both = static_cast<std::int8_t>(h[1] & h[2]);
        return (both & 1) != 0 || (both & 2) != 0;
      }
      int pos = 0, neg = 0;
      for (std::int8_t c : h) {
        pos += c & 1;
        neg += (c >> 1) & 1;
      }
      return pos >= 2 || neg >= 2;
    }
    case Family::RrEwma: {
      const auto& h = st.rr_history;
      if (spec.rr_kind == RunsRule::TwoOfTwo)
        return (h[1] == kZoneUpperViol && h[2] == kZoneUpperViol) ||
               (h[1] == kZoneLowerViol && h[2] == kZoneLowerViol);
      for (int side : {+1, -1}) {
        const std::int8_t viol = side > 0 ? kZoneUpperViol : kZoneLowerViol;
        const std::int8_t mid = side > 0 ? kZoneUpperMid : kZoneLowerMid;
        int nviol = 0;
        bool others_mid = true;
        for (std::int8_t c : h) {
          if (c == viol)
            ++nviol;
          else if (c != kZoneNone && c != mid)
            others_mid = false;
        }
        if (nviol >= 2) {
          if (spec.rr_kind == RunsRule::TwoOfThree) return true;
          if (others_mid) return true;  // modified rule: the spare point must sit
                                        // between the center line and the limit
        }
      }
      return false;
    }
  }
  return false;
}

}  // namespace detail

/// Advance the chart by one observation.
inline void update(const ChartSpec& spec, ChartState& st, double x) {
  double warn = std::numeric_limits<double>::quiet_NaN();
  double ref = std::numeric_limits<double>::quiet_NaN();
  if (spec.uses_runs_rule() || spec.family == Family::Mec) {
    const Limits lim = alarm_threshold(spec, st.i + 1);
    warn = lim.warning;
    ref = lim.reference;
  }
  detail::step_core(spec, st, x, warn, ref);
}

/// True iff the alarm rule fires at the current time index.
inline bool check_alarm(const ChartSpec& spec, const ChartState& st) {
  if (st.i < 1) return false;
  return detail::alarm_from_state(spec, st, alarm_threshold(spec, st.i).limit);
}

/// Exact coefficients c_1..c_i with plotted statistic = sum_j c_j X_j.
/// Only defined for the linear families.
inline std::vector<double> weight_vector(const ChartSpec& spec, long long i) {
  if (i < 1) throw std::invalid_argument("weight_vector: i must be >= 1");
  if (!spec.is_linear())
    throw std::invalid_argument("weight_vector: family is not a linear filter");
  const auto n = static_cast<std::size_t>(i);
  std::vector<double> c(n, 0.0);
  switch (spec.family) {
    case Family::Ewma: {
      double decay = spec.lambda;
      for (std::size_t j = n; j-- > 0;) {
        c[j] = decay;
        decay *= 1.0 - spec.lambda;
      }
      break;
    }
    case Family::Dewma: {
      const double l2 = spec.lambda * spec.lambda;
      double decay = 1.0;
      for (std::size_t j = n; j-- > 0;) {
        c[j] = l2 * static_cast<double>(n - j) * decay;
        decay *= 1.0 - spec.lambda;
      }
      break;
    }
    case Family::Tewma: {
      const double l3 = std::pow(spec.lambda, 3);
      double decay = 1.0;
      for (std::size_t j = n; j-- > 0;) {
        const double m = static_cast<double>(n - j);  // age + 1
        c[j] = l3 * 0.5 * m * (m + 1.0) * decay;
        decay *= 1.0 - spec.lambda;
      }
      break;
    }
    case Family::Ma: {
      const long long m = std::min<long long>(i, spec.w);
      for (std::size_t j = n - static_cast<std::size_t>(m); j < n; ++j)
        c[j] = 1.0 / static_cast<double>(m);
      break;
    }
    case Family::Dma: {
      // Average the trailing moving averages, each itself a trailing mean.
      const long long span = std::min<long long>(i, spec.w);
      const double outer = 1.0 / static_cast<double>(span);
      for (long long mi = i - span + 1; mi <= i; ++mi) {
        const long long inner_span = std::min<long long>(mi, spec.w);
        const double inner = 1.0 / static_cast<double>(inner_span);
        for (long long j = mi - inner_span + 1; j <= mi; ++j)
          c[static_cast<std::size_t>(j - 1)] += outer * inner;
      }
      break;
    }
    case Family::Pm:
      for (auto& v : c) v = 1.0 / static_cast<double>(i);
      break;
    case Family::Dpm: {
      // c_j = (H_i - H_{j-1}) / i, accumulated backwards to avoid cancellation.
      double tail = 0.0;
      for (std::size_t j = n; j-- > 0;) {
        tail += 1.0 / static_cast<double>(j + 1);
        c[j] = tail / static_cast<double>(i);
      }
      break;
    }
    default:
      break;
  }
  return c;
}

}  // namespace runlen::charts
