#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "runlen/analytic.hpp"
#include "runlen/numeric.hpp"

using namespace runlen;
using analytic::NumericArlResult;
using Catch::Matchers::WithinRel;

TEST_CASE("markov cusum reproduces the known in-control level") {
  // two-sided, k = 0.5, h = 4.0133: in-control ARL close to 170
  const auto r = analytic::cusum_arl_markov(0.5, 4.0133, 0.0, 400);
  CHECK(r.two_sided_approximation);
  CHECK_THAT(r.value, WithinRel(170.0, 0.01));

  // out-of-control check against the independently reported level
  const auto r1 = analytic::cusum_arl_markov(0.5, 4.002, 1.0, 400);
  CHECK_THAT(r1.value, WithinRel(8.39, 0.01));
}

TEST_CASE("markov cusum is stable under grid doubling") {
  const double a = analytic::cusum_arl_markov(0.5, 4.0, 0.0, 200).value;
  const double b = analytic::cusum_arl_markov(0.5, 4.0, 0.0, 400).value;
  CHECK(std::abs(a - b) < 0.001 * b);
  CHECK(analytic::cusum_arl_markov(0.5, 4.0, 0.0, 400).est_truncation_error < 0.05);
}

TEST_CASE("markov cusum arl grows with h") {
  double prev = 0.0;
  for (double h : {1.0, 2.0, 3.0, 4.0, 5.0}) {
    const double v = analytic::cusum_arl_markov_one_sided(0.5, h, 0.0, 200).value;
    CHECK(v > prev);
    prev = v;
  }
}

TEST_CASE("ewma recursion reduces to the geometric run length at lambda = 1") {
  const auto r = analytic::ewma_arl_numeric(1.0, 3.0, 0.0, charts::LimitPolicy::TimeVarying);
  CHECK_THAT(r.value, WithinRel(analytic::shewhart_arl(3.0, 0.0), 1e-6));
  const auto r1 = analytic::ewma_arl_numeric(1.0, 3.0, 1.0, charts::LimitPolicy::TimeVarying);
  CHECK_THAT(r1.value, WithinRel(analytic::shewhart_arl(3.0, 1.0), 1e-6));

  const auto rf = analytic::ewma_arl_numeric(1.0, 3.0, 0.0, charts::LimitPolicy::Asymptotic);
  CHECK_THAT(rf.value, WithinRel(analytic::shewhart_arl(3.0, 0.0), 2e-3));
}

TEST_CASE("time-varying ewma arl matches the published design level") {
  // lambda = 0.1 with c = 2.4098 was designed for an in-control ARL of 168
  const auto r = analytic::ewma_arl_numeric(0.1, 2.4098, 0.0, charts::LimitPolicy::TimeVarying);
  CHECK(r.method == NumericArlResult::Method::FiniteHorizonRecursion);
  CHECK_THAT(r.value, WithinRel(168.0, 0.005));
}

TEST_CASE("errors are rejected") {
  CHECK_THROWS_AS(analytic::cusum_arl_markov(0.5, -1.0, 0.0, 400), std::invalid_argument);
  CHECK_THROWS_AS(analytic::cusum_arl_markov(0.5, 4.0, 0.0, 10), std::invalid_argument);
  CHECK_THROWS_AS(analytic::ewma_arl_numeric(0.0, 2.0, 0.0, charts::LimitPolicy::TimeVarying),
                  std::invalid_argument);
}
