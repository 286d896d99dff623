#include "shotnoise/stats.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

#include <boost/math/distributions/chi_squared.hpp>

#include "shotnoise/errors.hpp"

namespace shotnoise {

nlohmann::json GofReport::to_json() const {
  return {{"method", method},       {"statistic", statistic}, {"threshold", threshold},
          {"n_a", n_a},             {"n_b", n_b},             {"decision", passed ? "pass" : "fail"}};
}

double ks_critical_value(double level) {
  if (!(level > 0.0 && level < 1.0)) throw ParameterError("ks: level must lie in (0, 1)");
  return std::sqrt(-0.5 * std::log(level / 2.0));
}

GofReport ks_two_sample(std::span<const double> a, std::span<const double> b, double level) {
  if (a.empty() || b.empty()) throw ParameterError("ks_two_sample: samples must be nonempty");
  std::vector<double> x(a.begin(), a.end()), y(b.begin(), b.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const double na = static_cast<double>(x.size()), nb = static_cast<double>(y.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < x.size() && j < y.size()) {
    const double v = std::min(x[i], y[j]);
    while (i < x.size() && x[i] == v) ++i;
    while (j < y.size() && y[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  GofReport r;
  r.method = "ks_two_sample";
  r.statistic = d;
  r.n_a = x.size();
  r.n_b = y.size();
  r.threshold = ks_critical_value(level) * std::sqrt((na + nb) / (na * nb));
  r.passed = r.statistic <= r.threshold;
  return r;
}

double ecf_distance(std::span<const double> sample, const StableParams& params,
                    std::span<const double> t_grid) {
  if (sample.empty()) throw ParameterError("ecf_distance: sample must be nonempty");
  double worst = 0.0;
  const double n = static_cast<double>(sample.size());
  for (double t : t_grid) {
    double re = 0.0, im = 0.0;
    for (double x : sample) {
      re += std::cos(t * x);
      im += std::sin(t * x);
    }
    const std::complex<double> ecf(re / n, im / n);
    worst = std::max(worst, std::abs(ecf - stable_cf(params, t)));
  }
  return worst;
}

GofReport chi_square_poisson(std::span<const long> counts, double nu, double level) {
  if (counts.empty()) throw ParameterError("chi_square_poisson: no counts");
  if (!(nu > 0.0)) throw ParameterError("chi_square_poisson: nu must be positive");
  const double n = static_cast<double>(counts.size());
  long max_count = 0;
  for (long c : counts) {
    if (c < 0) throw ParameterError("chi_square_poisson: counts must be nonnegative");
    max_count = std::max(max_count, c);
  }
  std::vector<double> observed(static_cast<std::size_t>(max_count) + 1, 0.0);
  for (long c : counts) observed[static_cast<std::size_t>(c)] += 1.0;

  // Cells 0..K-1 individually, K.. pooled, with K the first cell whose
  // remaining tail expectation drops below 5.
  std::vector<double> obs_cells, exp_cells;
  double log_p = -nu;
  double cumulative = 0.0;
  for (std::size_t k = 0;; ++k) {
    if (k > 0) log_p += std::log(nu) - std::log(static_cast<double>(k));
    const double p = std::exp(log_p);
    const double tail_after = 1.0 - cumulative - p;
    if (n * p < 5.0 || n * tail_after < 5.0) {
      double tail_obs = 0.0;
      for (std::size_t m = k; m < observed.size(); ++m) tail_obs += observed[m];
      obs_cells.push_back(tail_obs);
      exp_cells.push_back(n * (1.0 - cumulative));
      break;
    }
    obs_cells.push_back(k < observed.size() ? observed[k] : 0.0);
    exp_cells.push_back(n * p);
    cumulative += p;
  }
  double stat = 0.0;
  for (std::size_t c = 0; c < obs_cells.size(); ++c) {
    const double diff = obs_cells[c] - exp_cells[c];
    stat += diff * diff / exp_cells[c];
  }
  GofReport r;
  r.method = "chi_square_poisson";
  r.statistic = stat;
  r.n_a = counts.size();
  r.n_b = obs_cells.size();
  const double dof = std::max<double>(1.0, static_cast<double>(obs_cells.size()) - 1.0);
  r.threshold = boost::math::quantile(boost::math::chi_squared(dof), 1.0 - level);
  r.passed = r.statistic <= r.threshold;
  return r;
}

Slope rate_regression(std::span<const double> T_values, std::span<const double> dispersion) {
  if (T_values.size() != dispersion.size() || T_values.size() < 3)
    throw ParameterError("rate_regression: need at least 3 paired ladder points");
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < T_values.size(); ++i) {
    if (!(T_values[i] > 0.0) || !(dispersion[i] > 0.0))
      throw ParameterError("rate_regression: inputs must be positive");
    lx.push_back(std::log(T_values[i]));
    ly.push_back(std::log(dispersion[i]));
  }
  const double n = static_cast<double>(lx.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  if (!(sxx > 0.0)) throw ParameterError("rate_regression: T values must not all coincide");
  Slope s;
  s.slope = sxy / sxx;
  double rss = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    const double r = ly[i] - my - s.slope * (lx[i] - mx);
    rss += r * r;
  }
  s.std_error = n > 2.0 ? std::sqrt(rss / (n - 2.0) / sxx) : 0.0;
  return s;
}

double sample_quantile(std::span<const double> sample, double p) {
  if (sample.empty()) throw ParameterError("sample_quantile: empty sample");
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError("sample_quantile: p must lie in [0, 1]");
  std::vector<double> v(sample.begin(), sample.end());
  std::sort(v.begin(), v.end());
  const double h = p * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

double sample_median(std::span<const double> sample) { return sample_quantile(sample, 0.5); }

double interquartile_range(std::span<const double> sample) {
  return sample_quantile(sample, 0.75) - sample_quantile(sample, 0.25);
}

double sample_mean(std::span<const double> sample) {
  if (sample.empty()) throw ParameterError("sample_mean: empty sample");
  double s = 0.0;
  for (double x : sample) s += x;
  return s / static_cast<double>(sample.size());
}

}  // namespace shotnoise
