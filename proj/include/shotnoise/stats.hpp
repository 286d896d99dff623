#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "shotnoise/heavy_rand.hpp"

namespace shotnoise {

struct GofReport {
  double statistic = 0.0;
  double threshold = 0.0;
  std::size_t n_a = 0;
  std::size_t n_b = 0;
  bool passed = true;  // statistic <= threshold
  std::string method;

  nlohmann::json to_json() const;
};

// c(level) = sqrt(-log(level / 2) / 2); c(0.01) = 1.628.
double ks_critical_value(double level);

// Two-sample Kolmogorov-Smirnov with the asymptotic threshold
// c(level) sqrt((n_a + n_b) / (n_a n_b)).
GofReport ks_two_sample(std::span<const double> a, std::span<const double> b, double level);

// max over t of |n^-1 sum exp(i t X_k) - stable_cf(params, t)|.
double ecf_distance(std::span<const double> sample, const StableParams& params,
                    std::span<const double> t_grid);

// Pearson chi-square of nonnegative integer counts against Poisson(nu);
// cells with expected count below 5 are pooled into the tail.
GofReport chi_square_poisson(std::span<const long> counts, double nu, double level);

struct Slope {
  double slope = 0.0;
  double std_error = 0.0;
};

// Least-squares slope of log(dispersion) on log(T).
Slope rate_regression(std::span<const double> T_values, std::span<const double> dispersion);

// Linear-interpolation quantile (type 7) of an unsorted sample.
double sample_quantile(std::span<const double> sample, double p);
double sample_median(std::span<const double> sample);
double interquartile_range(std::span<const double> sample);
double sample_mean(std::span<const double> sample);

}  // namespace shotnoise
