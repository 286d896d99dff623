#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "shotnoise/cycles.hpp"
#include "shotnoise/heavy_rand.hpp"
#include "shotnoise/rng.hpp"
#include "shotnoise/traffic.hpp"

namespace shotnoise {

enum class FunctionalKind { pointwise, window_sup };

/// Bounded functional phi of a window X_h(s) = {X(s + t), 0 <= t <= h}.
///
/// Two computable classes are supported: maps of the values at finitely many
/// offsets, and maps of those values together with the supremum of X over
/// [s, s + h]. Both make s -> phi(X_h(s)) piecewise constant, so integrals
/// are exact sums over breakpoints.
class WindowFunctional {
 public:
  using PointwiseMap = std::function<double(std::span<const double>)>;
  using SupMap = std::function<double(std::span<const double>, double)>;

  WindowFunctional() = default;

  static WindowFunctional pointwise(std::string name, double h, std::vector<double> offsets,
                                    PointwiseMap map, double sup_norm);
  static WindowFunctional window_sup(std::string name, double h, std::vector<double> offsets,
                                     SupMap map, double sup_norm);

  const std::string& name() const { return name_; }
  WindowFunctional& rename(std::string name) {
    name_ = std::move(name);
    return *this;
  }
  double h() const { return h_; }
  FunctionalKind kind() const { return kind_; }
  const std::vector<double>& offsets() const { return offsets_; }
  double sup_norm() const { return sup_norm_; }

  // The caller's assertion that E(., phi) is G-a.e. continuous.
  bool continuity_assertion() const { return continuity_; }
  WindowFunctional& assert_continuity(bool holds = true) {
    continuity_ = holds;
    return *this;
  }

  // lim_{w -> inf} E(w, phi), when it exists.
  const std::optional<double>& limit_at_infinity() const { return limit_at_infinity_; }
  WindowFunctional& set_limit_at_infinity(std::optional<double> v) {
    limit_at_infinity_ = v;
    return *this;
  }

  double operator()(std::span<const double> values, double sup) const;

  WindowFunctional scaled(double c) const;
  // a * f + b * g; both must be pointwise with identical offsets.
  static WindowFunctional combine(double a, const WindowFunctional& f, double b,
                                  const WindowFunctional& g);

  // Evaluates the map on random nonnegative inputs and throws if the
  // declared sup norm is exceeded.
  void spot_check(RngStream& rng, std::size_t n = 1000) const;

 private:
  std::string name_;
  double h_ = 0.0;
  FunctionalKind kind_ = FunctionalKind::pointwise;
  std::vector<double> offsets_{0.0};
  PointwiseMap pointwise_;
  SupMap sup_map_;
  double sup_norm_ = 0.0;
  bool continuity_ = false;
  std::optional<double> limit_at_infinity_;
};

// Built-in functionals (h = 0 unless stated).
WindowFunctional identity_functional();
WindowFunctional clipped_rate(double cap);      // x(0) min cap
WindowFunctional idle_indicator();              // 1{x(0) <= 0}
WindowFunctional level_cdf_indicator(double x); // 1{x(0) <= x}
WindowFunctional constant_functional(double c);
// 1{sup_{[0,h]} x <= cap}
WindowFunctional window_sup_indicator(double h, double cap);
// 1{x(h) > x(0)}
WindowFunctional growth_indicator(double h);

// J = integral of phi(X_h(s)) over [t0, t1]; path must cover [t0, t1 + h].
double integrate_phi(const ShotNoisePath& path, const WindowFunctional& phi, double t0, double t1);

// Integrals over consecutive intervals [b_j, b_{j+1}] of a sorted boundary list.
std::vector<double> integrate_phi_pieces(const ShotNoisePath& path, const WindowFunctional& phi,
                                         std::span<const double> boundaries);

// Z_j(phi) for every complete cycle of the decomposition.
std::vector<double> cycle_integrals(const ShotNoisePath& path,
                                    const CycleDecomposition& decomposition,
                                    const WindowFunctional& phi);

struct Estimate {
  double value = 0.0;
  double std_error = 0.0;
  std::size_t n = 0;
};

struct Centering {
  enum class Source { analytic, monte_carlo };
  double value = 0.0;
  double std_error = 0.0;
  Source source = Source::analytic;
  std::size_t n_mc = 0;

  static Centering analytic(double v) { return {v, 0.0, Source::analytic, 0}; }
  static Centering monte_carlo(const Estimate& e) {
    return {e.value, e.std_error, Source::monte_carlo, e.n};
  }
};

/// Z_T(phi, u) = a(T)^-1 integral_0^{Tu} {phi(X_h(s)) - centering} ds on its
/// breakpoints; linear between them.
struct EmpiricalPath {
  std::vector<double> u_breaks;
  std::vector<double> values;
  double T = 0.0;
  double a_T = 0.0;
  Centering centering;

  double at(double u) const;
};

EmpiricalPath empirical_path(const ShotNoisePath& path, const WindowFunctional& phi, double T,
                             const std::optional<Centering>& centering, const TailDist& dist);

// Z_T(phi, u) at the requested u values only.
std::vector<double> empirical_path_values(const ShotNoisePath& path, const WindowFunctional& phi,
                                          double T, const Centering& centering,
                                          const TailDist& dist, std::span<const double> u_grid);

// CSV (u,value) and a key=value side-car record.
void write_empirical_path_csv(const EmpiricalPath& z, std::ostream& out);
void write_empirical_path_meta(const EmpiricalPath& z, std::uint64_t seed, std::ostream& out);

// Monte Carlo E(w, phi) = E[phi(w + X_h(0))] over stationary windows.
Estimate estimate_calE(double w, const WindowFunctional& phi, const TrafficConfig& config,
                       std::size_t n_mc, RngStream& rng);

// Exact E(w, phi) when W is constant w0, h = 0 and X(0) = w0 * Poisson(nu).
double calE_constant_rate(double w, const WindowFunctional& phi, double nu, double w0);

// E_T(x) = T^-1 integral_0^T 1{X(s) <= x} ds for each x of a sorted grid.
std::vector<double> empirical_cdf(const ShotNoisePath& path, double T,
                                  std::span<const double> x_grid);

}  // namespace shotnoise
