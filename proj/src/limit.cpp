#include "shotnoise/limit.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "shotnoise/errors.hpp"

namespace shotnoise {

namespace {

Estimate mean_estimate(const std::vector<double>& v) {
  Estimate e;
  e.n = v.size();
  if (v.empty()) return e;
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  e.value = mean;
  if (v.size() > 1)
    e.std_error = std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
  return e;
}

std::size_t outer_count(std::size_t n_mc) {
  if (n_mc == 0) throw ParameterError("limit: n_mc must be at least 1");
  return static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(n_mc))));
}

double sgn(double x) { return (x > 0.0) - (x < 0.0); }

// Fills moments, params and the degeneracy flag from Delta draws.
void finish(LimitSpec& spec, const std::vector<double>& deltas) {
  std::vector<double> abs_pow(deltas.size()), signed_pow(deltas.size());
  for (std::size_t i = 0; i < deltas.size(); ++i) {
    abs_pow[i] = std::pow(std::abs(deltas[i]), spec.alpha);
    signed_pow[i] = abs_pow[i] * sgn(deltas[i]);
  }
  spec.abs_moment = mean_estimate(abs_pow);
  spec.signed_moment = mean_estimate(signed_pow);
  spec.hurst = (3.0 - spec.alpha) / 2.0;
  spec.params.alpha = spec.alpha;
  spec.params.mu = 0.0;
  if (!(spec.abs_moment.value > 0.0)) {
    spec.degenerate = true;
    spec.params.sigma = 0.0;
    spec.params.beta = 0.0;
    return;
  }
  const double scale_pow = spec.lambda * c_alpha(spec.alpha) * spec.abs_moment.value;
  spec.params.sigma = std::pow(scale_pow, 1.0 / spec.alpha);
  spec.params.beta = std::clamp(spec.signed_moment.value / spec.abs_moment.value, -1.0, 1.0);
}

void check_alpha_lambda(double alpha, double lambda) {
  if (!(alpha > 1.0 && alpha < 2.0)) throw DomainError("limit: alpha must lie in (1, 2)");
  if (!(lambda > 0.0)) throw ParameterError("limit: lambda must be positive");
}

}  // namespace

CalEEstimator analytic_calE(std::function<double(double)> calE) {
  return [calE = std::move(calE)](double w, RngStream&) { return Estimate{calE(w), 0.0, 0}; };
}

CalEEstimator monte_carlo_calE(WindowFunctional phi, TrafficConfig config, std::size_t n_inner) {
  return [phi = std::move(phi), config = std::move(config), n_inner](double w, RngStream& rng) {
    return estimate_calE(w, phi, config, n_inner, rng);
  };
}

LimitSpec limit_params(const WindowFunctional& phi, double lambda, double alpha,
                       const RateSampler& limit_rate, const CalEEstimator& calE,
                       std::size_t n_mc, RngStream& rng) {
  check_alpha_lambda(alpha, lambda);
  LimitSpec spec;
  spec.alpha = alpha;
  spec.lambda = lambda;
  spec.n_outer = outer_count(n_mc);
  spec.calE_0 = calE(0.0, rng);
  spec.n_inner = spec.calE_0.n;
  spec.provenance = "functional=" + phi.name() +
                    (spec.n_inner == 0 ? "; calE=analytic" : "; calE=monte_carlo") +
                    (phi.continuity_assertion() ? "; continuity=asserted" : "; continuity=unasserted");
  std::vector<double> deltas(spec.n_outer);
  for (auto& d : deltas) {
    const double w = limit_rate(rng);
    if (std::isinf(w) && !phi.limit_at_infinity())
      throw ParameterError("limit: G charges infinity but '" + phi.name() +
                           "' has no limit at infinity");
    d = calE(w, rng).value - spec.calE_0.value;
  }
  finish(spec, deltas);
  return spec;
}

TailConstants tail_constant_Z(const WindowFunctional& phi, double lambda, double mean_duration,
                              double alpha, const RateSampler& limit_rate,
                              const CalEEstimator& calE, std::size_t n_mc, RngStream& rng) {
  check_alpha_lambda(alpha, lambda);
  const std::size_t n_outer = outer_count(n_mc);
  const double factor = std::exp(lambda * mean_duration);
  std::vector<double> plus(n_outer), minus(n_outer);
  for (std::size_t i = 0; i < n_outer; ++i) {
    const double w = limit_rate(rng);
    if (std::isinf(w) && !phi.limit_at_infinity())
      throw ParameterError("tail_constant_Z: G charges infinity without a limit for '" +
                           phi.name() + "'");
    const double e = calE(w, rng).value;
    plus[i] = factor * std::pow(std::max(e, 0.0), alpha);
    minus[i] = factor * std::pow(std::max(-e, 0.0), alpha);
  }
  return {mean_estimate(plus), mean_estimate(minus)};
}

double poisson_K(double nu, double x) {
  if (!(nu > 0.0)) throw ParameterError("poisson_K: nu must be positive");
  if (x < 0.0) return 0.0;
  const double k_max = std::floor(x);
  double log_p = -nu;
  double total = std::exp(log_p);
  for (double k = 1.0; k <= k_max; k += 1.0) {
    log_p += std::log(nu) - std::log(k);
    total += std::exp(log_p);
    if (k > nu && std::exp(log_p) < 1e-18) break;
  }
  return std::min(1.0, total);
}

LimitSpec cdf_limit_params(double x, const std::function<double(double)>& K, double lambda,
                           double alpha, const RateSampler& limit_rate, std::size_t n_mc,
                           RngStream& rng) {
  check_alpha_lambda(alpha, lambda);
  LimitSpec spec;
  spec.alpha = alpha;
  spec.lambda = lambda;
  spec.n_outer = outer_count(n_mc);
  spec.calE_0 = {K(x), 0.0, 0};
  spec.provenance = "functional=cdf(" + std::to_string(x) + "); calE=analytic K";
  std::vector<double> deltas(spec.n_outer);
  for (auto& d : deltas) {
    const double w = limit_rate(rng);
    const double shifted = std::isinf(w) ? 0.0 : K(x - w);
    d = shifted - spec.calE_0.value;
  }
  finish(spec, deltas);
  return spec;
}

nlohmann::json LimitSpec::to_json() const {
  const auto est = [](const Estimate& e) {
    return nlohmann::json{{"value", e.value}, {"std_error", e.std_error}, {"n", e.n}};
  };
  return {{"alpha", alpha},
          {"lambda", lambda},
          {"calE_0", est(calE_0)},
          {"abs_moment", est(abs_moment)},
          {"signed_moment", est(signed_moment)},
          {"sigma", params.sigma},
          {"sigma_pow_alpha", std::pow(params.sigma, alpha)},
          {"beta", params.beta},
          {"mu", params.mu},
          {"hurst", hurst},
          {"degenerate", degenerate},
          {"n_outer", n_outer},
          {"n_inner", n_inner},
          {"provenance", provenance}};
}

}  // namespace shotnoise
