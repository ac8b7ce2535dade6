#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <set>

#include "nomarl/rng.hpp"

using namespace nomarl;

TEST_CASE("named streams are decorrelated and reproducible", "[rng]") {
  RngStream a(42ULL, "fading");
  RngStream a2(42ULL, "fading");
  RngStream b(42ULL, "traffic");

  std::uint64_t ra = a.raw(), ra2 = a2.raw(), rb = b.raw();
  REQUIRE(ra == ra2);
  REQUIRE(ra != rb);

  // Different master seeds give different streams for the same name.
  RngStream c(43ULL, "fading");
  REQUIRE(c.raw() != a2.raw());
}

TEST_CASE("derive_seed depends on name text", "[rng]") {
  REQUIRE(derive_seed(7, "policy") != derive_seed(7, "replay"));
  REQUIRE(derive_seed(7, "policy") == derive_seed(7, "policy"));
}

TEST_CASE("uniform stays in [0,1) and fills the range", "[rng]") {
  RngStream r(1);
  double lo = 1.0, hi = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const double u = r.uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    lo = std::min(lo, u);
    hi = std::max(hi, u);
  }
  REQUIRE(lo < 0.01);
  REQUIRE(hi > 0.99);
}

TEST_CASE("uniform_int covers its inclusive range", "[rng]") {
  RngStream r(2);
  std::set<int> seen;
  for (int i = 0; i < 1000; ++i) seen.insert(r.uniform_int(3, 7));
  REQUIRE(seen == std::set<int>{3, 4, 5, 6, 7});
  REQUIRE_THROWS_AS(r.uniform_int(5, 4), std::invalid_argument);
}

TEST_CASE("gaussian has unit variance and zero mean", "[rng]") {
  RngStream r(3);
  const int n = 200000;
  double s = 0.0, s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = r.gaussian();
    s += x;
    s2 += x * x;
  }
  const double mean = s / n;
  const double var = s2 / n - mean * mean;
  REQUIRE(std::abs(mean) < 0.01);
  REQUIRE(std::abs(var - 1.0) < 0.02);
}

TEST_CASE("poisson matches its mean and variance", "[rng]") {
  RngStream r(4);
  const double lambda = 2.5;
  const int n = 200000;
  double s = 0.0, s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double k = r.poisson(lambda);
    s += k;
    s2 += k * k;
  }
  const double mean = s / n;
  const double var = s2 / n - mean * mean;
  REQUIRE(std::abs(mean - lambda) < 0.02);
  REQUIRE(std::abs(var - lambda) < 0.05);
  REQUIRE(r.poisson(0.0) == 0);
  REQUIRE_THROWS_AS(r.poisson(-1.0), std::invalid_argument);
}

TEST_CASE("bernoulli frequency tracks p", "[rng]") {
  RngStream r(5);
  int hits = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) hits += r.bernoulli(0.1) ? 1 : 0;
  REQUIRE(std::abs(hits / static_cast<double>(n) - 0.1) < 0.005);
}
