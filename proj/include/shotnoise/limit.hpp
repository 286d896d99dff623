#pragma once

#include <cstddef>
#include <functional>
#include <string>

#include <json.hpp>

#include "shotnoise/functional.hpp"
#include "shotnoise/heavy_rand.hpp"
#include "shotnoise/rng.hpp"

namespace shotnoise {

// Draws W* from the limit rate law G (may return +inf).
using RateSampler = std::function<double(RngStream&)>;
// Returns E(w, phi) for a rate w, exactly or by Monte Carlo.
using CalEEstimator = std::function<Estimate(double w, RngStream& rng)>;

CalEEstimator analytic_calE(std::function<double(double)> calE);
// Inner Monte Carlo with n_inner stationary windows per call.
CalEEstimator monte_carlo_calE(WindowFunctional phi, TrafficConfig config, std::size_t n_inner);

/// Parameters of the strictly alpha-stable limit Lambda(phi, 1) with
/// Delta = E(W*, phi) - E(0, phi):
///   sigma^alpha = lambda c_alpha E|Delta|^alpha,
///   beta = E[|Delta|^alpha sgn Delta] / E|Delta|^alpha,  mu = 0.
struct LimitSpec {
  double alpha = 1.5;
  double lambda = 1.0;
  Estimate calE_0;
  Estimate abs_moment;     // E|Delta|^alpha
  Estimate signed_moment;  // E[|Delta|^alpha sgn Delta]
  StableParams params;
  double hurst = 0.75;     // (3 - alpha) / 2, metadata only
  bool degenerate = false; // E|Delta|^alpha == 0: point mass at 0
  std::size_t n_outer = 0;
  std::size_t n_inner = 0;
  std::string provenance;

  // Marginal law at time u.
  StableParams marginal(double u) const { return params.at_time(u); }
  nlohmann::json to_json() const;
};

// Outer Monte Carlo over sqrt(n_mc) draws of W*; the estimator supplies E(w, phi).
LimitSpec limit_params(const WindowFunctional& phi, double lambda, double alpha,
                       const RateSampler& limit_rate, const CalEEstimator& calE,
                       std::size_t n_mc, RngStream& rng);

struct TailConstants {
  Estimate c_plus;
  Estimate c_minus;
};

// t P(+-Z_1(phi) > a(t) x) -> c_+- x^-alpha with
// c_+- = e^{lambda E[Y]} E[(E(W*, phi))_+-^alpha].
TailConstants tail_constant_Z(const WindowFunctional& phi, double lambda, double mean_duration,
                              double alpha, const RateSampler& limit_rate,
                              const CalEEstimator& calE, std::size_t n_mc, RngStream& rng);

// Poisson(nu) CDF at floor(x); 0 for x < 0.
double poisson_K(double nu, double x);

// Limit law of T a(T)^-1 (E_T(x) - K(x)); Delta_K = K(x - W*) - K(x) <= 0.
LimitSpec cdf_limit_params(double x, const std::function<double(double)>& K, double lambda,
                           double alpha, const RateSampler& limit_rate, std::size_t n_mc,
                           RngStream& rng);

}  // namespace shotnoise
