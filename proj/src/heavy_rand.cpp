#include "shotnoise/heavy_rand.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "shotnoise/errors.hpp"

namespace shotnoise {

namespace {

constexpr double kPi = std::numbers::pi;

void check_pareto(double alpha, double xm) {
  if (!(alpha > 0.0) || !std::isfinite(alpha))
    throw ParameterError("pareto: alpha must be positive, got " + std::to_string(alpha));
  if (!(xm > 0.0) || !std::isfinite(xm))
    throw ParameterError("pareto: xm must be positive, got " + std::to_string(xm));
}

}  // namespace

TailDist TailDist::pareto(double alpha, double xm) {
  check_pareto(alpha, xm);
  return TailDist(ParetoTail{alpha, xm}, alpha);
}

TailDist TailDist::user(UserTail tail, double declared_alpha) {
  if (!tail.survival || !tail.quantile)
    throw ParameterError("user tail: survival and quantile are required");
  if (!(declared_alpha > 0.0)) throw ParameterError("user tail: declared alpha must be positive");
  if (!(tail.mean > 0.0) || !std::isfinite(tail.mean))
    throw ParameterError("user tail: a finite positive mean is required");
  TailDist dist(std::move(tail), declared_alpha);
  return dist;
}

double TailDist::survival(double y) const {
  if (const auto* p = as_pareto()) {
    if (y <= p->xm) return 1.0;
    return std::pow(y / p->xm, -p->alpha);
  }
  return std::get<UserTail>(kind_).survival(y);
}

double TailDist::quantile(double p) const {
  if (!(p > 0.0) || p > 1.0) throw DomainError("quantile: p must lie in (0, 1]");
  if (const auto* par = as_pareto()) return par->xm * std::pow(p, -1.0 / par->alpha);
  return std::get<UserTail>(kind_).quantile(p);
}

double TailDist::mean() const {
  if (const auto* p = as_pareto()) {
    if (p->alpha <= 1.0) return std::numeric_limits<double>::infinity();
    return p->alpha * p->xm / (p->alpha - 1.0);
  }
  return std::get<UserTail>(kind_).mean;
}

double TailDist::sample(RngStream& rng) const {
  if (const auto* p = as_pareto()) return pareto_inverse(p->alpha, p->xm, rng.uniform());
  return std::get<UserTail>(kind_).quantile(rng.uniform());
}

double TailDist::size_biased_acceptance() const {
  if (is_pareto()) return 1.0;
  const auto& u = std::get<UserTail>(kind_);
  const double a = declared_alpha_;
  if (!(a > 1.0) || !(u.y_min > 0.0) || !(u.envelope > 0.0) || !u.density) return 0.0;
  return u.mean * (a - 1.0) * std::pow(u.y_min, a - 1.0) / u.envelope;
}

double TailDist::sample_size_biased(RngStream& rng) const {
  if (const auto* p = as_pareto()) {
    // y f(y) / E[Y] is Pareto with index alpha - 1 and the same scale.
    if (p->alpha <= 1.0) throw ParameterError("size-biased law needs alpha > 1");
    return pareto_inverse(p->alpha - 1.0, p->xm, rng.uniform());
  }
  const double acceptance = size_biased_acceptance();
  if (acceptance < kMinAcceptance)
    throw ParameterError("user tail: size-biased envelope acceptance " + std::to_string(acceptance) +
                         " is below the floor");
  const auto& u = std::get<UserTail>(kind_);
  const double a = declared_alpha_;
  for (;;) {
    const double y = pareto_inverse(a - 1.0, u.y_min, rng.uniform());
    const double ratio = std::pow(y, a + 1.0) * u.density(y) / u.envelope;
    if (rng.uniform() <= ratio) return y;
  }
}

double pareto_inverse(double alpha, double xm, double u) {
  check_pareto(alpha, xm);
  return xm * std::pow(u, -1.0 / alpha);
}

std::vector<double> sample_pareto(const TailDist& dist, std::size_t n, RngStream& rng) {
  const auto* p = dist.as_pareto();
  if (p == nullptr) throw ParameterError("sample_pareto: distribution is not Pareto");
  if (n == 0) throw ParameterError("sample_pareto: n must be at least 1");
  std::vector<double> out(n);
  for (auto& v : out) v = p->xm * std::pow(rng.uniform(), -1.0 / p->alpha);
  return out;
}

double tail_quantile_a(const TailDist& dist, double t) {
  if (!(t > 1.0)) throw DomainError("tail_quantile_a: t must exceed 1");
  if (const auto* p = dist.as_pareto()) return p->xm * std::pow(t, 1.0 / p->alpha);
  return dist.quantile(1.0 / t);
}

double c_alpha(double alpha) {
  if (!(alpha > 1.0 && alpha < 2.0)) throw DomainError("c_alpha: alpha must lie in (1, 2)");
  // Gamma(1 - a) = Gamma(2 - a) / (1 - a) keeps the gamma argument in (0, 1).
  const double gamma_1ma = std::exp(std::lgamma(2.0 - alpha)) / (1.0 - alpha);
  return std::abs(gamma_1ma * std::cos(kPi * alpha / 2.0));
}

void StableParams::validate() const {
  if (!(alpha > 0.0 && alpha <= 2.0)) throw ParameterError("stable: alpha must lie in (0, 2]");
  // The tan(pi alpha / 2) parametrization needs a log term at alpha = 1.
  if (std::abs(alpha - 1.0) < 1e-9) throw ParameterError("stable: alpha = 1 is not supported");
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw ParameterError("stable: sigma must be >= 0");
  if (!(std::abs(beta) <= 1.0)) throw ParameterError("stable: |beta| must be <= 1");
  if (!std::isfinite(mu)) throw ParameterError("stable: mu must be finite");
}

StableParams StableParams::at_time(double u) const {
  if (!(u >= 0.0)) throw DomainError("stable: time must be nonnegative");
  StableParams out = *this;
  out.sigma = sigma * std::pow(u, 1.0 / alpha);
  out.mu = mu * u;
  return out;
}

double sample_stable_one(const StableParams& params, RngStream& rng) {
  const double a = params.alpha;
  const double v = kPi * (rng.uniform() - 0.5);
  const double w = rng.exponential();
  const double zeta = params.beta * std::tan(kPi * a / 2.0);
  const double shift = std::atan(zeta) / a;
  const double scale = std::pow(1.0 + zeta * zeta, 1.0 / (2.0 * a));
  const double x = scale * std::sin(a * (v + shift)) / std::pow(std::cos(v), 1.0 / a) *
      std::pow(std::cos(v - a * (v + shift)) / w, (1.0 - a) / a);
  return params.sigma * x + params.mu;
}

std::vector<double> sample_stable(const StableParams& params, std::size_t n, RngStream& rng) {
  params.validate();
  if (n == 0) throw ParameterError("sample_stable: n must be at least 1");
  std::vector<double> out(n);
  for (auto& v : out) v = sample_stable_one(params, rng);
  return out;
}

std::complex<double> stable_cf(const StableParams& params, double t) {
  if (t == 0.0) return {1.0, 0.0};
  const double a = params.alpha;
  const double scale = std::pow(params.sigma, a) * std::pow(std::abs(t), a);
  const double sgn = t > 0.0 ? 1.0 : -1.0;
  const double skew = params.beta * sgn * std::tan(kPi * a / 2.0);
  const std::complex<double> exponent(-scale, params.mu * t + scale * skew);
  return std::exp(exponent);
}

}  // namespace shotnoise
