#include <doctest.h>

#include <cmath>

#include "shotnoise/limit.hpp"

using namespace shotnoise;

namespace {

CalEEstimator exact(const WindowFunctional& phi, double nu) {
  return analytic_calE([phi, nu](double w) { return calE_constant_rate(w, phi, nu, 1.0); });
}

RateSampler unit_rate() {
  return [](RngStream&) { return 1.0; };
}

}  // namespace

TEST_CASE("identity with unit rate") {
  RngStream rng(41, 0);
  const auto phi = identity_functional();
  const auto spec = limit_params(phi, 1.0, 1.5, unit_rate(), exact(phi, 3.0), 10000, rng);
  CHECK(spec.params.beta == 1.0);
  CHECK(std::pow(spec.params.sigma, 1.5) == doctest::Approx(c_alpha(1.5)).epsilon(1e-12));
  CHECK(spec.params.mu == 0.0);
  CHECK(spec.hurst == doctest::Approx(0.75));
  CHECK(!spec.degenerate);
  CHECK(spec.n_outer == 100);
  CHECK(spec.to_json().contains("sigma"));
}

TEST_CASE("idle indicator closed form") {
  RngStream rng(42, 0);
  const auto phi = idle_indicator();
  const auto spec = limit_params(phi, 0.3, 1.5, unit_rate(), exact(phi, 0.9), 10000, rng);
  CHECK(spec.params.beta == -1.0);
  CHECK(std::pow(spec.params.sigma, 1.5) ==
        doctest::Approx(0.3 * c_alpha(1.5) * std::exp(-1.35)).epsilon(1e-12));
  CHECK(spec.calE_0.value == doctest::Approx(std::exp(-0.9)).epsilon(1e-14));
}

TEST_CASE("random rates: beta range, lambda linearity and scaling") {
  const auto phi = clipped_rate(1.5);
  const RateSampler g = [](RngStream& r) { return 2.0 * r.uniform(); };
  const auto calE = exact(phi, 3.0);
  RngStream r1(43, 0), r2(43, 0), r3(43, 0), r4(43, 0);
  const auto a = limit_params(phi, 1.0, 1.5, g, calE, 1000000, r1);
  const auto b = limit_params(phi, 2.5, 1.5, g, calE, 1000000, r2);
  CHECK(a.params.beta >= -1.0);
  CHECK(a.params.beta <= 1.0);
  CHECK(std::pow(b.params.sigma, 1.5) == doctest::Approx(2.5 * std::pow(a.params.sigma, 1.5)).epsilon(1e-12));
  const auto scaled = phi.scaled(3.0);
  const auto c = limit_params(scaled, 1.0, 1.5, g, exact(scaled, 3.0), 1000000, r3);
  CHECK(std::pow(c.params.sigma, 1.5) == doctest::Approx(std::pow(3.0, 1.5) * std::pow(a.params.sigma, 1.5)).epsilon(1e-9));
  CHECK(c.params.beta == doctest::Approx(a.params.beta).epsilon(1e-9));
  const auto negated = phi.scaled(-1.0);
  const auto d = limit_params(negated, 1.0, 1.5, g, exact(negated, 3.0), 1000000, r4);
  CHECK(d.params.sigma == doctest::Approx(a.params.sigma).epsilon(1e-9));
  CHECK(d.params.beta == doctest::Approx(-a.params.beta).epsilon(1e-9));
}

TEST_CASE("Monte Carlo calE agrees with the exact one") {
  TrafficConfig cfg;
  cfg.lambda = 1.0;
  const auto phi = clipped_rate(2.0);
  RngStream rng(44, 0);
  const auto mc = monte_carlo_calE(phi, cfg, 200000);
  for (double w : {0.0, 0.5, 1.0}) {
    const auto e = mc(w, rng);
    CHECK(std::abs(e.value - calE_constant_rate(w, phi, 3.0, 1.0)) <= 4.0 * e.std_error);
  }
}

TEST_CASE("degenerate limit") {
  RngStream rng(45, 0);
  const auto phi = constant_functional(2.0);
  const auto spec = limit_params(phi, 1.0, 1.5, unit_rate(), exact(phi, 3.0), 100, rng);
  CHECK(spec.degenerate);
}

TEST_CASE("tail constants") {
  RngStream rng(46, 0);
  const auto one = constant_functional(1.0);
  const auto t1 = tail_constant_Z(one, 1.0, 3.0, 1.5, unit_rate(), exact(one, 3.0), 10000, rng);
  CHECK(t1.c_plus.value == doctest::Approx(std::exp(3.0)).epsilon(1e-12));
  CHECK(t1.c_minus.value == 0.0);
  const auto id = identity_functional();
  const auto t2 = tail_constant_Z(id, 1.0, 3.0, 1.5, unit_rate(), exact(id, 3.0), 10000, rng);
  CHECK(t2.c_plus.value == doctest::Approx(std::exp(3.0) * std::pow(4.0, 1.5)).epsilon(1e-12));
  const auto neg = idle_indicator().scaled(-1.0);
  const auto t3 = tail_constant_Z(neg, 1.0, 3.0, 1.5, unit_rate(), exact(neg, 3.0), 10000, rng);
  CHECK(t3.c_plus.value == 0.0);
}

TEST_CASE("poisson_K") {
  CHECK(poisson_K(0.9, 0.0) == doctest::Approx(0.4066).epsilon(1e-4));
  CHECK(poisson_K(0.9, 1.0) == doctest::Approx(0.7725).epsilon(1e-4));
  CHECK(poisson_K(0.9, 2.0) == doctest::Approx(0.9372).epsilon(1e-4));
  CHECK(poisson_K(0.9, 2.7) == poisson_K(0.9, 2.0));
  CHECK(poisson_K(0.9, -0.5) == 0.0);
}

TEST_CASE("cdf limit parameters") {
  RngStream rng(47, 0);
  const auto K = [](double x) { return poisson_K(3.0, x); };
  const auto mid = cdf_limit_params(0.5, K, 1.0, 1.5, unit_rate(), 10000, rng);
  CHECK(mid.params.beta == -1.0);
  CHECK(std::pow(mid.params.sigma, 1.5) == doctest::Approx(c_alpha(1.5) * std::pow(K(0.5), 1.5)).epsilon(1e-12));
  for (double x : {1.0, 2.5, 7.0}) CHECK(cdf_limit_params(x, K, 1.0, 1.5, unit_rate(), 1000, rng).params.beta == -1.0);
  const auto far = cdf_limit_params(200.0, K, 1.0, 1.5, unit_rate(), 100, rng);
  CHECK((far.degenerate || far.params.sigma < 1e-12));
}
