#include <cmath>

#include "doctest.h"
#include "rfimlab/disorder.hpp"

using namespace rfimlab;

namespace {

// Maclaurin series of erf summed in long double; accurate for |x| <= 3.
long double erf_series(long double x) {
  long double term = x;
  long double sum = x;
  for (int n = 1; n < 200; ++n) {
    term *= -x * x / n;
    sum += term / (2 * n + 1);
  }
  return sum * 2.0L / std::sqrt(3.14159265358979323846264338327950288L);
}

long double cdf_series(long double x) { return 0.5L * (1.0L + erf_series(x / std::sqrt(2.0L))); }

}  // namespace

TEST_SUITE("disorder") {
  TEST_CASE("fields are pure functions of seed and index") {
    Lattice lat(2, 16, true);
    const auto a = sample_field(42, lat);
    const auto b = sample_field(42, lat);
    CHECK(a.values == b.values);
    for (Vertex v = lat.size(); v-- > 0;) CHECK(gaussian_at(42, v) == a[v]);
  }

  TEST_CASE("neighboring seeds give different fields") {
    Lattice lat(2, 64, true);
    const auto a = sample_field(1000, lat);
    const auto b = sample_field(1001, lat);
    std::size_t same = 0;
    for (std::size_t i = 0; i < a.size(); ++i) same += a.values[i] == b.values[i];
    CHECK(static_cast<double>(same) < 0.01 * static_cast<double>(a.size()));
  }

  TEST_CASE("moments over a million sites") {
    Lattice lat(2, 1000, true);
    const auto f = sample_field(2024, lat);
    long double s = 0, s2 = 0;
    for (double x : f.values) {
      s += x;
      s2 += x * x;
    }
    const long double n = f.size();
    const double mean = static_cast<double>(s / n);
    const double var = static_cast<double>(s2 / n - (s / n) * (s / n));
    CHECK(std::fabs(mean) < 0.005);
    CHECK(std::fabs(var - 1.0) < 0.01);
  }

  TEST_CASE("open and closed probabilities") {
    CHECK(open_closed_probs(2.0, 0.7).p == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(open_closed_probs(0.0, 3.0).q == doctest::Approx(0.5).epsilon(1e-15));
    const auto t = open_closed_probs(1.0, 1.0);
    const double oracle = static_cast<double>(1.0L - cdf_series(1.0L));
    CHECK(std::fabs(t.p - oracle) < 1e-12);
    CHECK(std::fabs(t.q - oracle) < 1e-12);
    CHECK(t.p == doctest::Approx(0.158655).epsilon(1e-6));
    CHECK_FALSE(t.degenerate);
  }

  TEST_CASE("normal cdf agrees with the series") {
    for (double x = -3.0; x <= 3.0; x += 0.125)
      CHECK(std::fabs(normal_cdf(x) - static_cast<double>(cdf_series(x))) < 1e-12);
  }

  TEST_CASE("zero noise is degenerate") {
    auto t = open_closed_probs(2.5, 0.0);
    CHECK(t.degenerate);
    CHECK(t.p == 1.0);
    CHECK(t.q == 0.0);
    t = open_closed_probs(-0.5, 0.0);
    CHECK(t.p == 0.0);
    CHECK(t.q == 1.0);
    CHECK_THROWS_AS(open_closed_probs(1.0, -1.0), std::invalid_argument);
  }

  TEST_CASE("p increases and q decreases in M") {
    double prev_p = -1, prev_q = 2;
    for (double M = -2; M <= 4; M += 0.25) {
      const auto t = open_closed_probs(M, 0.8);
      CHECK(t.p > prev_p);
      CHECK(t.q < prev_q);
      if (M <= 2) CHECK(t.p + t.q <= 1.0);
      prev_p = t.p;
      prev_q = t.q;
    }
  }

  TEST_CASE("critical time") {
    CHECK(critical_time(2) == doctest::Approx(1.1715728753).epsilon(1e-10));
    CHECK(critical_time(3) == doctest::Approx(1.2679491924).epsilon(1e-10));
    for (int d = 2; d <= 10; ++d) {
      const double c = critical_time(d);
      CHECK(std::fabs(c * c - d * (2 - c) * (2 - c)) < 1e-12);
    }
    CHECK_THROWS_AS(critical_time(1), std::invalid_argument);
  }

  TEST_CASE("log q over d log p near one at the critical time") {
    const double c = critical_time(2);
    const auto t = open_closed_probs(c, 0.05);
    const double ratio = std::log(t.q) / (2.0 * std::log(t.p));
    CHECK(ratio > 0.9);
    CHECK(ratio < 1.1);
  }

  TEST_CASE("seed parsing") {
    CHECK(parse_seed("12345") == 12345u);
    CHECK(parse_seed("0x1F") == 31u);
    CHECK(parse_seed("0XfF") == 255u);
    CHECK_THROWS_AS(parse_seed(""), std::invalid_argument);
    CHECK_THROWS_AS(parse_seed("12a"), std::invalid_argument);
    CHECK_THROWS_AS(parse_seed("0x"), std::invalid_argument);
  }

  TEST_CASE("uniforms stay inside the open unit interval") {
    for (std::uint64_t i = 0; i < 100000; ++i) {
      const double u = uniform_at(9, i, 3);
      REQUIRE(u > 0.0);
      REQUIRE(u < 1.0);
    }
  }
}
