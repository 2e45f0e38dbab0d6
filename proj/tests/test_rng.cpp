#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <set>

#include "runlen/normal.hpp"
#include "runlen/rng.hpp"

using namespace runlen;

TEST_CASE("philox4x64-10 known-answer blocks") {
  // Frozen against an independent reference implementation of the same
  // generator (numpy.random.Philox).
  auto b1 = Philox4x64::block({1, 0, 0, 0}, {0, 0});
  CHECK(b1[0] == 0x02f4ba6408e4d89bull);
  CHECK(b1[1] == 0x3dd62b0b9ca8c5b2ull);
  CHECK(b1[2] == 0x1c8667a55d902e79ull);
  CHECK(b1[3] == 0x907d7a052fd5b4dcull);

  auto b2 = Philox4x64::block({2, 0, 0, 0}, {0, 0});
  CHECK(b2[0] == 0x809bf322883987c3ull);
  CHECK(b2[1] == 0x471128b9e807f7ddull);
  CHECK(b2[2] == 0xf250ba0dbec065b7ull);
  CHECK(b2[3] == 0xfc6ed66767a457bcull);

  auto b3 = Philox4x64::block({42, 0x9999, 7, 0}, {0xdeadbeefcafef00dull, 0x123456789abcdef0ull});
  CHECK(b3[0] == 0x8481b6ca40a86899ull);
  CHECK(b3[1] == 0xdb0575f357fb8cf8ull);
  CHECK(b3[2] == 0x485dab7f102ae89full);
  CHECK(b3[3] == 0x550d3526f5a4888dull);
}

TEST_CASE("normal quantile matches reference values") {
  // Reference quantiles computed with scipy.special.ndtri.
  struct Case {
    double u, z;
  };
  const Case cases[] = {
      {0.5, 0.0},
      {0.6, 0.25334710313579972},
      {0.975, 1.959963984540054},
      {0.999, 3.0902323061678132},
      {1e-5, -4.2648907939228247},
      {1e-12, -7.0344838253011313},
      {5.5511151231257827e-17, -8.2923610758135968},
      {0.025, -1.9599639845400545},
      {0.25, -0.67448975019608171},
  };
  for (const auto& c : cases) {
    const double z = norm_quantile(c.u);
    if (c.z == 0.0)
      CHECK(std::abs(z) < 1e-12);
    else
      CHECK(std::abs(z - c.z) < 5e-9 * std::abs(c.z));
  }
}

TEST_CASE("normal quantile round-trips through the cdf") {
  for (double u = 1e-14; u < 1.0; u = u < 0.01 ? u * 3.7 : u + 0.0103) {
    const double z = norm_quantile(u);
    CHECK(std::abs(norm_cdf(z) - u) <= 2e-9 * u + 1e-16);
  }
}

TEST_CASE("streams are reproducible and do not collide") {
  NormalStream a(123, 7), b(123, 7), c(123, 8), d(124, 7);
  bool all_equal_c = true, all_equal_d = true;
  for (int i = 0; i < 64; ++i) {
    const double va = a.normal();
    CHECK(va == b.normal());
    all_equal_c = all_equal_c && va == c.normal();
    all_equal_d = all_equal_d && va == d.normal();
  }
  CHECK_FALSE(all_equal_c);
  CHECK_FALSE(all_equal_d);
}

TEST_CASE("uniforms live strictly inside (0,1) and normals have sane moments") {
  NormalStream g(2024, 0);
  double sum = 0.0, sumsq = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double z = g.normal();
    sum += z;
    sumsq += z * z;
  }
  const double mean = sum / n;
  const double var = sumsq / n - mean * mean;
  CHECK(std::abs(mean) < 4.0 / std::sqrt(static_cast<double>(n)));
  CHECK(std::abs(var - 1.0) < 0.02);

  NormalStream u(2024, 1);
  for (int i = 0; i < 1000; ++i) {
    const double v = u.uniform();
    CHECK(v > 0.0);
    CHECK(v < 1.0);
  }
}
