#include <doctest.h>

#include <set>

#include "shotnoise/rng.hpp"

using shotnoise::RngStream;

TEST_CASE("same key gives the same sequence") {
  RngStream a(42, 7), b(42, 7);
  for (int i = 0; i < 1000; ++i) CHECK(a() == b());
}

TEST_CASE("different stream ids diverge") {
  RngStream a(42, 0), b(42, 1), c(43, 0);
  int same_ab = 0, same_ac = 0;
  for (int i = 0; i < 100; ++i) {
    const auto x = a(), y = b(), z = c();
    same_ab += x == y;
    same_ac += x == z;
  }
  CHECK(same_ab == 0);
  CHECK(same_ac == 0);
}

TEST_CASE("derive is deterministic and distinct per child") {
  RngStream parent(5, 3);
  auto c1 = parent.derive(1), c1b = parent.derive(1), c2 = parent.derive(2);
  CHECK(c1() == c1b());
  std::set<std::uint64_t> firsts;
  for (std::uint64_t k = 0; k < 64; ++k) firsts.insert(parent.derive(k)());
  CHECK(firsts.size() == 64);
  (void)c2;
}

TEST_CASE("uniform stays in the open unit interval and has mean 1/2") {
  RngStream rng(1, 0);
  double sum = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    REQUIRE(u > 0.0);
    REQUIRE(u < 1.0);
    sum += u;
  }
  CHECK(sum / n == doctest::Approx(0.5).epsilon(0.01));
}

TEST_CASE("exponential and poisson means") {
  RngStream rng(2, 0);
  double se = 0.0, sp = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    se += rng.exponential();
    sp += static_cast<double>(rng.poisson(0.9));
  }
  CHECK(se / n == doctest::Approx(1.0).epsilon(0.02));
  CHECK(sp / n == doctest::Approx(0.9).epsilon(0.02));
  CHECK(rng.poisson(0.0) == 0);
}
