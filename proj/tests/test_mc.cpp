#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "runlen/analytic.hpp"
#include "runlen/mc.hpp"

using namespace runlen;
using charts::ChartSpec;
using mc::McOptions;

namespace {

McOptions opts(long long reps, std::uint64_t seed, int threads = 1) {
  McOptions o;
  o.reps = reps;
  o.seed = seed;
  o.threads = threads;
  return o;
}

}  // namespace

TEST_CASE("shewhart oracle: ewma(lambda=1) with fixed limits") {
  const auto spec = ChartSpec::ewma(1.0, 3.0, charts::LimitPolicy::Asymptotic);
  for (double delta : {0.0, 1.0, 2.0}) {
    const auto est = mc::zero_state_arl(spec, delta, opts(100'000, 7));
    const double truth = analytic::shewhart_arl(3.0, delta);
    INFO("delta=" << delta << " est=" << est.mean << " truth=" << truth);
    CHECK(std::abs(est.mean - truth) <= 3.0 * est.stderr_);
  }
}

TEST_CASE("estimates are deterministic across thread counts") {
  const auto spec = ChartSpec::cusum(0.5, 4.0);
  const auto a = mc::zero_state_arl(spec, 0.5, opts(40'000, 11, 1));
  const auto b = mc::zero_state_arl(spec, 0.5, opts(40'000, 11, 4));
  const auto c = mc::zero_state_arl(spec, 0.5, opts(40'000, 11, 3));
  CHECK(a.mean == b.mean);
  CHECK(a.stderr_ == b.stderr_);
  CHECK(a.mean == c.mean);

  const auto d = mc::ced(spec, {30, 0.5}, opts(20'000, 13, 1));
  const auto e = mc::ced(spec, {30, 0.5}, opts(20'000, 13, 4));
  CHECK(d.mean == e.mean);
  CHECK(d.replications == e.replications);
}

TEST_CASE("different seeds give different but compatible estimates") {
  const auto spec = ChartSpec::cusum(0.5, 4.0);
  const auto a = mc::zero_state_arl(spec, 1.0, opts(30'000, 1));
  const auto b = mc::zero_state_arl(spec, 1.0, opts(30'000, 2));
  CHECK(a.mean != b.mean);
  CHECK(std::abs(a.mean - b.mean) < 5.0 * std::hypot(a.stderr_, b.stderr_));
}

TEST_CASE("ced at tau = 1 is exactly the zero-state arl") {
  const auto spec = ChartSpec::ewma(0.2, 2.7);
  const auto z = mc::zero_state_arl(spec, 0.5, opts(25'000, 21));
  const auto c = mc::ced(spec, {1, 0.5}, opts(25'000, 21));
  CHECK(z.mean == c.mean);
  CHECK(z.stderr_ == c.stderr_);
  CHECK(z.replications == c.replications);
}

TEST_CASE("conditioning discards early alarms and reports the fraction") {
  const auto spec = ChartSpec::cusum(0.5, 2.0);  // short in-control runs
  const auto est = mc::ced(spec, {20, 1.0}, opts(10'000, 5));
  CHECK(est.conditioned_fraction < 1.0);
  CHECK(est.conditioned_fraction > 0.0);
  CHECK(est.replications >= 10'000);  // the attempt budget compensates for rejections
  CHECK(est.mean >= 1.0);
}

TEST_CASE("unreachable tau aborts") {
  const auto spec = ChartSpec::cusum(0.1, 0.05);  // alarms almost immediately
  CHECK_THROWS_AS(mc::ced(spec, {200, 0.5}, opts(5'000, 5)), std::runtime_error);
}

TEST_CASE("censoring is flagged, not hidden") {
  const auto spec = ChartSpec::ewma(0.1, 50.0);  // absurdly wide limits
  McOptions o = opts(2'000, 3);
  o.cap = 200;  // tiny cap forces censoring
  const auto est = mc::zero_state_arl(spec, 0.0, o);
  CHECK(est.censored > 0);
  CHECK_FALSE(est.valid());
}

TEST_CASE("informational flag marks in-control delay estimates") {
  const auto spec = ChartSpec::cusum(0.5, 2.5);
  const auto est = mc::ced(spec, {15, 0.0}, opts(5'000, 9));
  CHECK(est.informational);
  const auto z = mc::zero_state_arl(spec, 0.0, opts(5'000, 9));
  CHECK_FALSE(z.informational);
}

TEST_CASE("stderr shrinks like one over root replications") {
  const auto spec = ChartSpec::cusum(0.5, 3.0);
  const auto small = mc::zero_state_arl(spec, 0.5, opts(20'000, 31));
  const auto large = mc::zero_state_arl(spec, 0.5, opts(80'000, 31));
  const double ratio = small.stderr_ / large.stderr_;
  CHECK(ratio > 1.6);
  CHECK(ratio < 2.4);
}

TEST_CASE("sample_run_length agrees with the alarm rule") {
  // the engine's precomputed-threshold fast path must replay exactly through
  // the public update/check_alarm pair
  const std::vector<ChartSpec> specs = {
      ChartSpec::ewma(0.3, 1.2),
      ChartSpec::dpm(0.35, 1.6),
      ChartSpec::rr_cusum(0.5, 1.8, 3.0, charts::RunsRule::TwoOfThree),
      ChartSpec::mec(0.25, 0.5, 5.0),
      ChartSpec::dma(3, 2.2),
  };
  for (const auto& spec : specs) {
    for (std::uint64_t stream = 0; stream < 8; ++stream) {
      NormalStream g(71, stream);
      const long long L = mc::sample_run_length(spec, {1, 1.0}, g);
      REQUIRE(L >= 1);
      NormalStream h(71, stream);
      auto st = charts::init_state(spec);
      for (long long t = 1; t < L; ++t) {
        charts::update(spec, st, h.normal() + 1.0);
        REQUIRE_FALSE(charts::check_alarm(spec, st));
      }
      charts::update(spec, st, h.normal() + 1.0);
      CHECK(charts::check_alarm(spec, st));
    }
  }
}

TEST_CASE("x1-conditioned profile: flat inside (-k, k) for the cusum") {
  const auto spec = ChartSpec::cusum(0.5, 4.0);
  const std::vector<double> grid = {-0.5, -0.25, 0.0, 0.25, 0.5, 1.5, 9.0};
  const auto prof = mc::conditional_delay_given_x1(spec, 0.75, grid, opts(4'000, 17));
  REQUIRE(prof.size() == grid.size());
  CHECK_FALSE(prof.back().admissible);  // x1 = 9 alarms at once (h + k = 4.5)
  // |x1| <= k leaves the state at zero: identical streams give identical delays
  for (int j : {1, 2, 3, 4}) CHECK(prof[j].est.mean == prof[0].est.mean);
  // a head start shortens the delay
  CHECK(prof[5].est.mean < prof[0].est.mean - 3.0 * prof[0].est.stderr_);
}
