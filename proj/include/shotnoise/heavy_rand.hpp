#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <variant>
#include <vector>

#include "shotnoise/rng.hpp"

namespace shotnoise {

// Pareto law with survival min(1, (y/xm)^-alpha).
struct ParetoTail {
  double alpha = 1.5;
  double xm = 1.0;
};

// User-supplied session-length law.
//
// `quantile(p)` must return inf{y : survival(y) <= p}. Size-biased draws use
// rejection against a Pareto(alpha - 1, y_min) envelope, which requires
// y^(alpha+1) f(y) <= envelope on [y_min, inf).
struct UserTail {
  std::function<double(double)> survival;
  std::function<double(double)> quantile;
  std::function<double(double)> density;
  double mean = 0.0;
  double y_min = 0.0;
  double envelope = 0.0;
};

/// Session-duration law with a regularly varying tail of declared index.
class TailDist {
 public:
  // Pareto(1.5, 1).
  TailDist() : TailDist(ParetoTail{}, 1.5) {}

  static TailDist pareto(double alpha, double xm = 1.0);
  static TailDist user(UserTail tail, double declared_alpha);

  double alpha() const { return declared_alpha_; }
  double survival(double y) const;
  // Survival quantile: inf{y : survival(y) <= p}, p in (0, 1].
  double quantile(double p) const;
  // E[Y]; infinite when alpha <= 1 for the Pareto case.
  double mean() const;

  const ParetoTail* as_pareto() const { return std::get_if<ParetoTail>(&kind_); }
  bool is_pareto() const { return as_pareto() != nullptr; }

  double sample(RngStream& rng) const;
  // Draw from y F(dy) / E[Y].
  double sample_size_biased(RngStream& rng) const;
  // Acceptance probability of the size-biased rejection sampler (1 for Pareto).
  double size_biased_acceptance() const;

  static constexpr double kMinAcceptance = 1e-3;

 private:
  TailDist(std::variant<ParetoTail, UserTail> kind, double declared_alpha)
      : kind_(std::move(kind)), declared_alpha_(declared_alpha) {}

  std::variant<ParetoTail, UserTail> kind_;
  double declared_alpha_;
};

// Inverse transform xm * u^(-1/alpha).
double pareto_inverse(double alpha, double xm, double u);

std::vector<double> sample_pareto(const TailDist& dist, std::size_t n, RngStream& rng);

// a(t) = inf{y : 1/survival(y) >= t}, t > 1.
double tail_quantile_a(const TailDist& dist, double t);

// |Gamma(1 - alpha) cos(pi alpha / 2)| for alpha in (1, 2).
double c_alpha(double alpha);

struct StableParams {
  double alpha = 1.5;
  double sigma = 1.0;
  double beta = 0.0;
  double mu = 0.0;

  void validate() const;
  // Marginal of the Levy motion at time u: scale u^(1/alpha) sigma.
  StableParams at_time(double u) const;
};

// Chambers-Mallows-Stuck draw from S_alpha(sigma, beta, mu).
double sample_stable_one(const StableParams& params, RngStream& rng);
std::vector<double> sample_stable(const StableParams& params, std::size_t n, RngStream& rng);

// exp{ i mu t - sigma^alpha |t|^alpha (1 - i beta sgn(t) tan(pi alpha / 2)) }
std::complex<double> stable_cf(const StableParams& params, double t);

}  // namespace shotnoise
