#include <doctest.h>

#include <cmath>
#include <sstream>

#include "shotnoise/errors.hpp"
#include "shotnoise/functional.hpp"
#include "shotnoise/limit.hpp"

using namespace shotnoise;

namespace {

TrafficConfig reference_config(double lambda, double horizon, std::uint64_t seed) {
  TrafficConfig cfg;
  cfg.lambda = lambda;
  cfg.horizon = horizon;
  cfg.rng = RngStream(seed, 0);
  return cfg;
}

// Midpoint Riemann sum of phi(X_h(s)) with the window sup taken on a
// sub-grid that includes every event inside the window.
double riemann(const ShotNoisePath& p, const WindowFunctional& phi, double t0, double t1, double step) {
  double acc = 0.0;
  for (double s = t0 + step / 2; s < t1; s += step) {
    std::vector<double> v;
    for (double o : phi.offsets()) v.push_back(p.level_at(s + o));
    double sup = p.level_at(s);
    for (std::size_t k = p.state_index(s); k < p.size() && p.event_time(k) <= s + phi.h(); ++k)
      sup = std::max(sup, p.level_state(k + 1));
    acc += phi(v, sup) * step;
  }
  return acc;
}

}  // namespace

TEST_CASE("rectangle integrals of one session") {
  const std::vector<Session> s{{1.0, 2.0, 3.0}};
  const auto p = build_path(s, 0.0, 5.0);
  CHECK(integrate_phi(p, identity_functional(), 0.0, 5.0) == 6.0);
  CHECK(integrate_phi(p, idle_indicator(), 0.0, 5.0) == 3.0);
  const double x[] = {1.0};
  CHECK(empirical_cdf(p, 5.0, x)[0] == doctest::Approx(0.6));
  const double big[] = {3.0};
  CHECK(empirical_cdf(p, 5.0, big)[0] == 1.0);
}

TEST_CASE("window sup indicator against fine quadrature") {
  const std::vector<Session> s{{0.5, 2.0, 1.0}, {1.2, 1.5, 1.0}, {3.0, 0.7, 1.0}, {3.4, 1.1, 1.0}, {3.5, 0.2, 1.0}};
  const auto p = build_path(s, 0.0, 7.0);
  const auto phi = window_sup_indicator(1.0, 2.0);
  const double exact = integrate_phi(p, phi, 0.0, 6.0);
  CHECK(std::abs(exact - riemann(p, phi, 0.0, 6.0, 1e-5)) < 1e-4);
}

TEST_CASE("pointwise functionals against fine quadrature on random paths") {
  RngStream rng(31, 0);
  const auto phi = WindowFunctional::pointwise(
      "mix", 0.75, {0.0, 0.3, 0.75},
      [](std::span<const double> v) { return std::min(v[0], 2.0) - 0.5 * std::min(v[2], 1.0) + (v[1] > v[0]); }, 3.5);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<Session> s;
    for (int i = 0; i < 12; ++i) s.push_back({10.0 * rng.uniform() - 1.0, 3.0 * rng.uniform(), 0.5 + rng.uniform()});
    const auto p = build_path(s, 0.0, 11.0);
    const double step = 1e-3;
    // Each event moves at most 3 offsets' worth of cells; a cell contributes
    // at most 2 * sup norm * step error.
    const double bound = 2.0 * 3.5 * step * 3.0 * static_cast<double>(p.size() + 1);
    CHECK(std::abs(integrate_phi(p, phi, 0.0, 10.0) - riemann(p, phi, 0.0, 10.0, step)) <= bound);
  }
}

TEST_CASE("boundedness and linearity") {
  auto cfg = reference_config(1.0, 2000.0, 32);
  cfg.window_h = 1.0;
  const auto p = simulate_path(cfg);
  const auto f = clipped_rate(2.0), g = idle_indicator();
  for (const auto& phi : {f, g, window_sup_indicator(1.0, 3.0), growth_indicator(1.0)})
    CHECK(std::abs(integrate_phi(p, phi, 0.0, 2000.0)) <= 2000.0 * phi.sup_norm() * (1 + 1e-12));
  const auto combo = WindowFunctional::combine(2.5, f, -1.5, g);
  const double lhs = integrate_phi(p, combo, 0.0, 2000.0);
  const double rhs = 2.5 * integrate_phi(p, f, 0.0, 2000.0) - 1.5 * integrate_phi(p, g, 0.0, 2000.0);
  CHECK(std::abs(lhs - rhs) <= 1e-12 * std::abs(rhs));
  CHECK(integrate_phi(p, f.scaled(3.0), 0.0, 2000.0) == doctest::Approx(3.0 * integrate_phi(p, f, 0.0, 2000.0)).epsilon(1e-12));
}

TEST_CASE("functional declarations") {
  RngStream rng(33, 0);
  CHECK_NOTHROW(clipped_rate(1.0).spot_check(rng));
  CHECK_NOTHROW(window_sup_indicator(2.0, 1.0).spot_check(rng));
  const auto liar = WindowFunctional::pointwise("liar", 0.0, {0.0}, [](std::span<const double> v) { return 10.0 * v[0]; }, 1.0);
  CHECK_THROWS_AS(liar.spot_check(rng), ParameterError);
  CHECK_THROWS(WindowFunctional::pointwise("bad", 1.0, {2.0}, [](std::span<const double>) { return 0.0; }, 0.0));
  CHECK_THROWS(WindowFunctional::combine(1.0, idle_indicator(), 1.0, growth_indicator(1.0)));
  CHECK(clipped_rate(2.0).limit_at_infinity().value() == 2.0);
}

TEST_CASE("cycle integrals") {
  auto cfg = reference_config(1.0, 20000.0, 34);
  const auto p = simulate_path(cfg);
  const auto d = decompose_cycles(p, 20000.0);
  const auto ones = cycle_integrals(p, d, constant_functional(1.0));
  REQUIRE(ones.size() == d.cycles.size());
  for (std::size_t j = 0; j < ones.size(); ++j) CHECK(ones[j] == doctest::Approx(d.cycles[j].length()).epsilon(1e-12));
  const auto z = cycle_integrals(p, d, clipped_rate(1.0));
  double sum = 0.0;
  for (double v : z) sum += v;
  CHECK(sum == doctest::Approx(integrate_phi(p, clipped_rate(1.0), d.s0, d.cycles.back().s_end)).epsilon(1e-10));
}

TEST_CASE("renewal identity for the idle indicator") {
  auto cfg = reference_config(1.0, 2e6, 35);
  const auto p = simulate_path(cfg);
  const auto d = decompose_cycles(p, 2e6);
  const auto z = cycle_integrals(p, d, idle_indicator());
  // For the idle indicator Z_j is the idle period, exponential with mean 1/lambda.
  double mz = 0.0, mc = 0.0;
  for (std::size_t j = 0; j < z.size(); ++j) {
    mz += z[j];
    mc += d.cycles[j].length();
  }
  const double n = static_cast<double>(z.size());
  mz /= n;
  mc /= n;
  double var = 0.0;
  const double e0 = std::exp(-3.0);
  for (std::size_t j = 0; j < z.size(); ++j) {
    const double r = z[j] - e0 * d.cycles[j].length();
    var += r * r;
  }
  const double se = std::sqrt(var / (n - 1) / n);
  CHECK(std::abs(mz - e0 * mc) <= 3.0 * se);
  CHECK(mz == doctest::Approx(1.0).epsilon(0.03));
}

TEST_CASE("empirical path") {
  auto cfg = reference_config(1.0, 1000.0, 36);
  const auto p = simulate_path(cfg);
  const auto dist = TailDist::pareto(1.5, 1.0);
  const auto flat = empirical_path(p, constant_functional(2.0), 1000.0, Centering::analytic(2.0), dist);
  for (double v : flat.values) CHECK(std::abs(v) < 1e-12);
  const auto phi = clipped_rate(2.0);
  const auto c = Centering::analytic(calE_constant_rate(0.0, phi, 3.0, 1.0));
  const auto z = empirical_path(p, phi, 1000.0, c, dist);
  CHECK(z.a_T == doctest::Approx(100.0));
  CHECK(z.u_breaks.front() == 0.0);
  CHECK(z.u_breaks.back() == 1.0);
  CHECK(z.values.front() == 0.0);
  const double J = integrate_phi(p, phi, 0.0, 1000.0);
  CHECK(z.values.back() == doctest::Approx((J - 1000.0 * c.value) / 100.0).epsilon(1e-12));
  const double u1[] = {1.0, 0.5};
  const auto pts = empirical_path_values(p, phi, 1000.0, c, dist, u1);
  CHECK(pts[0] == doctest::Approx(z.values.back()).epsilon(1e-10));
  CHECK(pts[1] == doctest::Approx(z.at(0.5)).epsilon(1e-10));
  // Continuity: jumps bounded by the centered sup norm times the gap.
  const double bound = (phi.sup_norm() + c.value) * 1000.0 / 100.0;
  for (std::size_t i = 1; i < z.values.size(); ++i)
    CHECK(std::abs(z.values[i] - z.values[i - 1]) <= bound * (z.u_breaks[i] - z.u_breaks[i - 1]) + 1e-12);
  CHECK_THROWS_AS(empirical_path(p, phi, 1000.0, std::nullopt, dist), ParameterError);
  std::stringstream csv, meta;
  write_empirical_path_csv(z, csv);
  write_empirical_path_meta(z, 99, meta);
  CHECK(csv.str().rfind("u,value\n", 0) == 0);
  CHECK(meta.str().find("seed=99") != std::string::npos);
  CHECK(meta.str().find("centering_se=0") != std::string::npos);
}

TEST_CASE("calE estimates") {
  auto cfg = reference_config(1.0, 1.0, 0);
  RngStream rng(37, 0);
  const auto id = estimate_calE(0.0, identity_functional(), cfg, 200000, rng);
  CHECK(std::abs(id.value - 3.0) <= 3.0 * id.std_error);
  CHECK(estimate_calE(0.5, idle_indicator(), cfg, 1000, rng).value == 0.0);
  cfg.lambda = 0.3;
  const auto idle = estimate_calE(0.0, idle_indicator(), cfg, 200000, rng);
  CHECK(std::abs(idle.value - std::exp(-0.9)) <= 3.0 * idle.std_error);
  CHECK(calE_constant_rate(0.0, idle_indicator(), 0.9, 1.0) == doctest::Approx(std::exp(-0.9)).epsilon(1e-14));
  CHECK(calE_constant_rate(2.0, identity_functional(), 3.0, 1.0) == doctest::Approx(5.0).epsilon(1e-12));
  const auto inf = estimate_calE(INFINITY, clipped_rate(1.0), cfg, 10, rng);
  CHECK(inf.value == 1.0);
  CHECK_THROWS(estimate_calE(INFINITY, growth_indicator(1.0), cfg, 10, rng));
}

TEST_CASE("empirical cdf matches Poisson occupancy") {
  // Averaged over ten independent paths; one path fluctuates by about T^{-1/3}.
  const double xs[] = {0.0, 1.0, 2.0};
  std::vector<double> e(3, 0.0);
  for (std::uint64_t r = 0; r < 10; ++r) {
    auto cfg = reference_config(0.3, 1e5, 380 + r);
    const auto one = empirical_cdf(simulate_path(cfg), 1e5, xs);
    for (int j = 0; j < 3; ++j) e[j] += one[j] / 10.0;
  }
  CHECK(std::abs(e[0] - 0.4066) < 0.01);
  CHECK(std::abs(e[1] - 0.7725) < 0.01);
  CHECK(std::abs(e[2] - 0.9372) < 0.01);
}
