#include <doctest.h>

#include <cmath>

#include "shotnoise/skorokhod.hpp"

using namespace shotnoise;

namespace {

SteppyPath indicator_half() { return SteppyPath::step(0.0, 1.0, {0.0, 0.5}, {0.0, 1.0}); }

SteppyPath random_step(RngStream& rng, double a, double b) {
  const int n = 1 + static_cast<int>(8 * rng.uniform());
  std::vector<double> bp{a};
  for (int i = 0; i < n; ++i) bp.push_back(a + (b - a) * rng.uniform());
  std::sort(bp.begin(), bp.end());
  bp.erase(std::unique(bp.begin(), bp.end()), bp.end());
  std::vector<double> v;
  for (std::size_t i = 0; i < bp.size(); ++i) v.push_back(4.0 * rng.uniform() - 2.0);
  return SteppyPath::step(a, b, bp, v);
}

}  // namespace

TEST_CASE("uniform distance") {
  const auto f = indicator_half();
  const auto zero = SteppyPath::step(0.0, 1.0, {0.0}, {0.0});
  CHECK(dist_uniform(f, f) == 0.0);
  CHECK(dist_uniform(f, zero) == 1.0);
  const double d = 0.05;
  const auto ramp = SteppyPath::pwl({0.0, 0.5 - d, 0.5, 1.0}, {0.0, 0.0, 1.0, 1.0});
  CHECK(dist_uniform(f, ramp) == doctest::Approx(1.0));
  CHECK_THROWS(dist_uniform(f, SteppyPath::step(0.0, 2.0, {0.0}, {0.0})));
}

TEST_CASE("M1 bracket examples") {
  const auto f = indicator_half();
  const auto same = dist_m1(f, f, 256);
  CHECK(same.lower == 0.0);
  CHECK(same.upper == doctest::Approx(0.0).epsilon(1e-12));
  for (double d : {0.01, 0.05, 0.2}) {
    const auto ramp = SteppyPath::pwl({0.0, 0.5 - d, 0.5, 1.0}, {0.0, 0.0, 1.0, 1.0});
    const auto m = dist_m1(f, ramp, 256);
    CHECK(m.lower <= m.upper);
    CHECK(m.upper <= d + 4.0 / 256);
    const auto shifted = SteppyPath::step(0.0, 1.0, {0.0, 0.5 + d}, {0.0, 1.0});
    CHECK(dist_m1(f, shifted, 256).upper <= d + 4.0 / 256);
  }
  CHECK_THROWS(dist_m1(f, f, 4));
}

TEST_CASE("M1 properties on random pairs") {
  RngStream rng(51, 0);
  const std::size_t n = 64;
  for (int trial = 0; trial < 60; ++trial) {
    const auto f = random_step(rng, 0.0, 1.0), g = random_step(rng, 0.0, 1.0), h = random_step(rng, 0.0, 1.0);
    const auto fg = dist_m1(f, g, n), gf = dist_m1(g, f, n);
    CHECK(fg.lower <= fg.upper + 1e-12);
    CHECK(fg.upper <= dist_uniform(f, g) + 1e-12);
    CHECK(fg.upper == doctest::Approx(gf.upper).epsilon(1e-9));
    CHECK(fg.lower == doctest::Approx(gf.lower).epsilon(1e-9));
    const double tol = 2.0 * std::max(1.0, 4.0) / n;
    CHECK(fg.upper <= dist_m1(f, h, n).upper + dist_m1(h, g, n).upper + tol);
    const auto left = dist_m1(f.restrict(0.0, 0.5), g.restrict(0.0, 0.5), n);
    const auto right = dist_m1(f.restrict(0.5, 1.0), g.restrict(0.5, 1.0), n);
    CHECK(fg.upper <= std::max(left.upper, right.upper) + tol);
  }
}

TEST_CASE("steppy paths") {
  const auto f = SteppyPath::step(0.0, 2.0, {0.0, 1.0, 2.0}, {1.0, 3.0, 5.0});
  CHECK(f.value_at(0.5) == 1.0);
  CHECK(f.value_at(1.0) == 3.0);
  CHECK(f.left_limit(1.0) == 1.0);
  CHECK(f.value_at(2.0) == 5.0);
  CHECK(f.left_limit(2.0) == 3.0);
  const auto g = SteppyPath::pwl({0.0, 2.0}, {0.0, 4.0});
  CHECK(g.value_at(0.5) == 1.0);
  const auto r = f.restrict(0.5, 1.5);
  CHECK(r.a == 0.5);
  CHECK(r.value_at(0.5) == 1.0);
  CHECK(r.value_at(1.2) == 3.0);
}

TEST_CASE("cycle diagnostic on a simulated path") {
  TrafficConfig cfg;
  cfg.horizon = 10000.0;
  cfg.rng = RngStream(52, 0);
  const auto p = simulate_path(cfg);
  const auto d = decompose_cycles(p, 10000.0);
  const Cycle* longest = &d.cycles.front();
  for (const auto& c : d.cycles)
    if (c.s_end <= 10000.0 && c.length() > longest->length()) longest = &c;
  const auto z = empirical_path(p, identity_functional(), 10000.0, Centering::analytic(3.0),
                                TailDist::pareto(1.5, 1.0));
  const auto diag = cycle_m1_diagnostic(z, longest->s_start / 1e4, longest->s_end / 1e4, 256);
  CHECK(diag.bracket.lower <= diag.bracket.upper);
  CHECK(diag.bracket.upper <= diag.reference_bound + 2.0 / 256);
  CHECK(diag.bracket.upper <= diag.uniform + 1e-12);
}
