#include "shotnoise/functional.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <iomanip>
#include <limits>
#include <ostream>

#include "shotnoise/errors.hpp"

namespace shotnoise {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_offsets(double h, const std::vector<double>& offsets) {
  if (!(h >= 0.0) || !std::isfinite(h)) throw ParameterError("functional: h must be >= 0");
  if (!std::is_sorted(offsets.begin(), offsets.end()))
    throw ParameterError("functional: offsets must be sorted");
  for (double o : offsets)
    if (!(o >= 0.0 && o <= h)) throw ParameterError("functional: offsets must lie in [0, h]");
}

struct Compensated {
  double sum = 0.0;
  double carry = 0.0;
  void add(double v) {
    const double y = v - carry;
    const double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }
};

/// Walks s over [t0, t1] visiting every maximal interval on which
/// phi(X_h(s)) is constant. Each evaluation offset o owns a cursor whose
/// next breakpoint is (event time - o); the window supremum uses a
/// monotone deque over the state indices inside [s, s + h].
template <class OnSegment>
void sweep(const ShotNoisePath& path, const WindowFunctional& phi,
           std::span<const double> boundaries, OnSegment&& on_segment) {
  if (boundaries.size() < 2) return;
  const double t0 = boundaries.front();
  const double t1 = boundaries.back();
  if (!(t0 >= path.t0() && t1 + phi.h() <= path.t1()))
    throw DomainError("integrate: path must cover [t0, t1 + h]");
  if (!std::is_sorted(boundaries.begin(), boundaries.end()))
    throw ParameterError("integrate: boundaries must be sorted");

  const auto& events = path.events();
  const std::size_t n_events = events.size();
  const bool use_sup = phi.kind() == FunctionalKind::window_sup;

  struct Cursor {
    double offset;
    std::size_t idx;  // state index at s + offset
    double next(const std::vector<PathEvent>& ev) const {
      return idx < ev.size() ? ev[idx].time - offset : kInf;
    }
  };
  const auto start_cursor = [&](double offset) {
    const auto it = std::partition_point(events.begin(), events.end(), [&](const PathEvent& e) {
      return e.time - offset <= t0;
    });
    return Cursor{offset, static_cast<std::size_t>(it - events.begin())};
  };

  std::vector<Cursor> cursors;
  for (double o : phi.offsets()) cursors.push_back(start_cursor(o));
  // Window cursors: lo tracks the state at s, hi the state at s + h.
  Cursor lo = start_cursor(0.0);
  Cursor hi = start_cursor(phi.h());
  std::deque<std::size_t> window;
  if (use_sup) {
    for (std::size_t k = lo.idx; k <= hi.idx; ++k) {
      while (!window.empty() && path.level_state(window.back()) <= path.level_state(k))
        window.pop_back();
      window.push_back(k);
    }
  }

  std::vector<double> values(cursors.size());
  std::size_t piece = 0;
  double s = t0;
  while (s < t1) {
    while (piece + 1 < boundaries.size() - 1 && boundaries[piece + 1] <= s) ++piece;
    double next = std::min(t1, boundaries[piece + 1]);
    for (const auto& c : cursors) next = std::min(next, c.next(events));
    if (use_sup) next = std::min({next, lo.next(events), hi.next(events)});

    if (next > s) {
      for (std::size_t i = 0; i < cursors.size(); ++i) values[i] = path.level_state(cursors[i].idx);
      const double sup = use_sup ? path.level_state(window.front()) : 0.0;
      on_segment(s, next, phi(values, sup), piece);
      s = next;
    }
    for (auto& c : cursors)
      while (c.idx < n_events && c.next(events) <= s) ++c.idx;
    if (use_sup) {
      while (hi.idx < n_events && hi.next(events) <= s) {
        ++hi.idx;
        while (!window.empty() && path.level_state(window.back()) <= path.level_state(hi.idx))
          window.pop_back();
        window.push_back(hi.idx);
      }
      while (lo.idx < n_events && lo.next(events) <= s) ++lo.idx;
      while (window.front() < lo.idx) window.pop_front();
    }
  }
}

}  // namespace

WindowFunctional WindowFunctional::pointwise(std::string name, double h,
                                             std::vector<double> offsets, PointwiseMap map,
                                             double sup_norm) {
  check_offsets(h, offsets);
  if (offsets.empty()) throw ParameterError("functional: pointwise kind needs offsets");
  if (!map) throw ParameterError("functional: map is required");
  if (!(sup_norm >= 0.0)) throw ParameterError("functional: sup norm must be >= 0");
  WindowFunctional f;
  f.name_ = std::move(name);
  f.h_ = h;
  f.kind_ = FunctionalKind::pointwise;
  f.offsets_ = std::move(offsets);
  f.pointwise_ = std::move(map);
  f.sup_norm_ = sup_norm;
  return f;
}

WindowFunctional WindowFunctional::window_sup(std::string name, double h,
                                              std::vector<double> offsets, SupMap map,
                                              double sup_norm) {
  check_offsets(h, offsets);
  if (!map) throw ParameterError("functional: map is required");
  if (!(sup_norm >= 0.0)) throw ParameterError("functional: sup norm must be >= 0");
  WindowFunctional f;
  f.name_ = std::move(name);
  f.h_ = h;
  f.kind_ = FunctionalKind::window_sup;
  f.offsets_ = std::move(offsets);
  f.sup_map_ = std::move(map);
  f.sup_norm_ = sup_norm;
  return f;
}

double WindowFunctional::operator()(std::span<const double> values, double sup) const {
  if (kind_ == FunctionalKind::pointwise) return pointwise_(values);
  return sup_map_(values, sup);
}

WindowFunctional WindowFunctional::scaled(double c) const {
  WindowFunctional f = *this;
  f.name_ = std::to_string(c) + "*" + name_;
  f.sup_norm_ = std::abs(c) * sup_norm_;
  if (kind_ == FunctionalKind::pointwise) {
    f.pointwise_ = [c, m = pointwise_](std::span<const double> v) { return c * m(v); };
  } else {
    f.sup_map_ = [c, m = sup_map_](std::span<const double> v, double s) { return c * m(v, s); };
  }
  if (limit_at_infinity_) f.limit_at_infinity_ = c * *limit_at_infinity_;
  return f;
}

WindowFunctional WindowFunctional::combine(double a, const WindowFunctional& f, double b,
                                           const WindowFunctional& g) {
  if (f.kind_ != FunctionalKind::pointwise || g.kind_ != FunctionalKind::pointwise ||
      f.offsets_ != g.offsets_ || f.h_ != g.h_)
    throw ParameterError("functional: combine needs pointwise functionals with equal offsets");
  auto out = pointwise(
      std::to_string(a) + "*" + f.name_ + "+" + std::to_string(b) + "*" + g.name_, f.h_,
      f.offsets_,
      [a, b, fm = f.pointwise_, gm = g.pointwise_](std::span<const double> v) {
        return a * fm(v) + b * gm(v);
      },
      std::abs(a) * f.sup_norm_ + std::abs(b) * g.sup_norm_);
  out.continuity_ = f.continuity_ && g.continuity_;
  if (f.limit_at_infinity_ && g.limit_at_infinity_)
    out.limit_at_infinity_ = a * *f.limit_at_infinity_ + b * *g.limit_at_infinity_;
  return out;
}

void WindowFunctional::spot_check(RngStream& rng, std::size_t n) const {
  std::vector<double> values(offsets_.size());
  for (std::size_t i = 0; i < n; ++i) {
    double sup = 0.0;
    for (auto& v : values) {
      // Mix small integers and heavy-tailed magnitudes.
      v = (i % 2 == 0) ? std::floor(10.0 * rng.uniform()) : rng.exponential() / rng.uniform();
      sup = std::max(sup, v);
    }
    sup += (i % 3 == 0) ? 0.0 : rng.exponential();
    const double out = (*this)(values, sup);
    if (!(std::abs(out) <= sup_norm_))
      throw ParameterError("functional '" + name_ + "': output exceeds declared sup norm");
  }
}

WindowFunctional identity_functional() {
  // Unbounded; admitted for the classical cumulative-input case.
  return WindowFunctional::pointwise(
             "identity", 0.0, {0.0}, [](std::span<const double> v) { return v[0]; }, kInf)
      .assert_continuity();
}

WindowFunctional clipped_rate(double cap) {
  if (!(cap > 0.0)) throw ParameterError("clipped_rate: cap must be positive");
  auto f = WindowFunctional::pointwise(
      "clipped", 0.0, {0.0}, [cap](std::span<const double> v) { return std::min(v[0], cap); },
      cap);
  f.assert_continuity().set_limit_at_infinity(cap);
  return f;
}

WindowFunctional idle_indicator() {
  auto f = WindowFunctional::pointwise(
      "idle", 0.0, {0.0}, [](std::span<const double> v) { return v[0] <= 0.0 ? 1.0 : 0.0; }, 1.0);
  f.assert_continuity().set_limit_at_infinity(0.0);
  return f;
}

WindowFunctional level_cdf_indicator(double x) {
  auto f = WindowFunctional::pointwise(
      "cdf", 0.0, {0.0}, [x](std::span<const double> v) { return v[0] <= x ? 1.0 : 0.0; }, 1.0);
  f.assert_continuity().set_limit_at_infinity(0.0);
  return f;
}

WindowFunctional constant_functional(double c) {
  auto f = WindowFunctional::pointwise(
      "constant", 0.0, {0.0}, [c](std::span<const double>) { return c; }, std::abs(c));
  f.assert_continuity().set_limit_at_infinity(c);
  return f;
}

WindowFunctional window_sup_indicator(double h, double cap) {
  auto f = WindowFunctional::window_sup(
      "window_sup", h, {0.0},
      [cap](std::span<const double>, double sup) { return sup <= cap ? 1.0 : 0.0; }, 1.0);
  f.assert_continuity().set_limit_at_infinity(0.0);
  return f;
}

WindowFunctional growth_indicator(double h) {
  if (!(h > 0.0)) throw ParameterError("growth_indicator: h must be positive");
  auto f = WindowFunctional::pointwise(
      "growth", h, {0.0, h},
      [](std::span<const double> v) { return v[1] > v[0] ? 1.0 : 0.0; }, 1.0);
  f.assert_continuity();
  return f;
}

double integrate_phi(const ShotNoisePath& path, const WindowFunctional& phi, double t0,
                     double t1) {
  if (!(t0 <= t1)) throw ParameterError("integrate_phi: need t0 <= t1");
  const double bounds[2] = {t0, t1};
  Compensated acc;
  sweep(path, phi, bounds, [&](double a, double b, double v, std::size_t) { acc.add(v * (b - a)); });
  return acc.sum;
}

std::vector<double> integrate_phi_pieces(const ShotNoisePath& path, const WindowFunctional& phi,
                                         std::span<const double> boundaries) {
  if (boundaries.size() < 2) return {};
  std::vector<Compensated> acc(boundaries.size() - 1);
  sweep(path, phi, boundaries,
        [&](double a, double b, double v, std::size_t piece) { acc[piece].add(v * (b - a)); });
  std::vector<double> out(acc.size());
  for (std::size_t i = 0; i < acc.size(); ++i) out[i] = acc[i].sum;
  return out;
}

std::vector<double> cycle_integrals(const ShotNoisePath& path,
                                    const CycleDecomposition& decomposition,
                                    const WindowFunctional& phi) {
  if (decomposition.cycles.empty()) return {};
  std::vector<double> boundaries;
  boundaries.reserve(decomposition.cycles.size() + 1);
  for (const auto& c : decomposition.cycles) boundaries.push_back(c.s_start);
  boundaries.push_back(decomposition.cycles.back().s_end);
  return integrate_phi_pieces(path, phi, boundaries);
}

double EmpiricalPath::at(double u) const {
  if (u_breaks.empty()) throw DomainError("empirical path is empty");
  if (!(u >= u_breaks.front() && u <= u_breaks.back()))
    throw DomainError("empirical path: u outside [0, 1]");
  const auto it = std::upper_bound(u_breaks.begin(), u_breaks.end(), u);
  if (it == u_breaks.end()) return values.back();
  const std::size_t j = static_cast<std::size_t>(it - u_breaks.begin());
  const double w = (u - u_breaks[j - 1]) / (u_breaks[j] - u_breaks[j - 1]);
  return values[j - 1] + w * (values[j] - values[j - 1]);
}

EmpiricalPath empirical_path(const ShotNoisePath& path, const WindowFunctional& phi, double T,
                             const std::optional<Centering>& centering, const TailDist& dist) {
  if (!centering) throw ParameterError("empirical_path: centering is required");
  EmpiricalPath z;
  z.T = T;
  z.a_T = tail_quantile_a(dist, T);
  z.centering = *centering;
  z.u_breaks.push_back(0.0);
  z.values.push_back(0.0);
  const double bounds[2] = {0.0, T};
  const double c = centering->value;
  Compensated acc;
  sweep(path, phi, bounds, [&](double a, double b, double v, std::size_t) {
    acc.add(v * (b - a));
    z.u_breaks.push_back(b / T);
    z.values.push_back((acc.sum - c * b) / z.a_T);
  });
  // The final breakpoint is exactly T; pin u = 1 against rounding in b / T.
  z.u_breaks.back() = 1.0;
  z.values.back() = (acc.sum - T * c) / z.a_T;
  return z;
}

std::vector<double> empirical_path_values(const ShotNoisePath& path, const WindowFunctional& phi,
                                          double T, const Centering& centering,
                                          const TailDist& dist, std::span<const double> u_grid) {
  std::vector<double> boundaries{0.0};
  for (double u : u_grid) {
    if (!(u > 0.0 && u <= 1.0)) throw DomainError("empirical_path_values: u must lie in (0, 1]");
    boundaries.push_back(u * T);
  }
  std::vector<double> sorted = boundaries;
  std::sort(sorted.begin(), sorted.end());
  const auto pieces = integrate_phi_pieces(path, phi, sorted);
  const double a_T = tail_quantile_a(dist, T);
  std::vector<double> out;
  out.reserve(u_grid.size());
  for (double u : u_grid) {
    const auto j = static_cast<std::size_t>(
        std::lower_bound(sorted.begin(), sorted.end(), u * T) - sorted.begin());
    double integral = 0.0;
    for (std::size_t i = 0; i < j; ++i) integral += pieces[i];
    out.push_back((integral - u * T * centering.value) / a_T);
  }
  return out;
}

void write_empirical_path_csv(const EmpiricalPath& z, std::ostream& out) {
  out << "u,value\n" << std::setprecision(17);
  for (std::size_t i = 0; i < z.u_breaks.size(); ++i)
    out << z.u_breaks[i] << ',' << z.values[i] << '\n';
}

void write_empirical_path_meta(const EmpiricalPath& z, std::uint64_t seed, std::ostream& out) {
  out << std::setprecision(17) << "T=" << z.T << "\na_T=" << z.a_T
      << "\ncentering=" << z.centering.value << "\ncentering_se=" << z.centering.std_error
      << "\ncentering_source="
      << (z.centering.source == Centering::Source::analytic ? "analytic" : "monte_carlo")
      << "\ncentering_n_mc=" << z.centering.n_mc << "\nseed=" << seed << '\n';
}

namespace {

double phi_on_window(const WindowFunctional& phi, const ShotNoisePath& window, double w,
                     std::vector<double>& values) {
  for (std::size_t i = 0; i < phi.offsets().size(); ++i)
    values[i] = w + window.level_at(phi.offsets()[i]);
  double sup = window.level_state(0);
  for (std::size_t k = 1; k <= window.size(); ++k) sup = std::max(sup, window.level_state(k));
  return phi(values, w + sup);
}

}  // namespace

Estimate estimate_calE(double w, const WindowFunctional& phi, const TrafficConfig& config,
                       std::size_t n_mc, RngStream& rng) {
  if (n_mc == 0) throw ParameterError("estimate_calE: n_mc must be at least 1");
  if (std::isinf(w)) {
    if (!phi.limit_at_infinity())
      throw ParameterError("estimate_calE: functional '" + phi.name() + "' has no limit at infinity");
    return {*phi.limit_at_infinity(), 0.0, n_mc};
  }
  std::vector<double> values(phi.offsets().size());
  double mean = 0.0, m2 = 0.0;
  for (std::size_t i = 0; i < n_mc; ++i) {
    const auto window = stationary_window(config, phi.h(), rng);
    const double v = phi_on_window(phi, window, w, values);
    // Welford update.
    const double d = v - mean;
    mean += d / static_cast<double>(i + 1);
    m2 += d * (v - mean);
  }
  Estimate e;
  e.value = mean;
  e.n = n_mc;
  e.std_error = n_mc > 1 ? std::sqrt(m2 / static_cast<double>(n_mc - 1) / static_cast<double>(n_mc))
                         : 0.0;
  return e;
}

double calE_constant_rate(double w, const WindowFunctional& phi, double nu, double w0) {
  if (phi.h() != 0.0) throw ParameterError("calE_constant_rate: only h = 0 functionals");
  if (!(nu > 0.0) || !(w0 > 0.0)) throw ParameterError("calE_constant_rate: need nu, w0 > 0");
  if (std::isinf(w)) {
    if (!phi.limit_at_infinity())
      throw ParameterError("calE_constant_rate: functional has no limit at infinity");
    return *phi.limit_at_infinity();
  }
  std::vector<double> values(phi.offsets().size());
  const std::size_t k_max =
      static_cast<std::size_t>(nu + 40.0 * std::sqrt(nu) + 60.0);
  double log_p = -nu;
  double total = 0.0;
  for (std::size_t k = 0; k <= k_max; ++k) {
    if (k > 0) log_p += std::log(nu) - std::log(static_cast<double>(k));
    const double x = w + w0 * static_cast<double>(k);
    std::fill(values.begin(), values.end(), x);
    total += std::exp(log_p) * phi(values, x);
  }
  return total;
}

std::vector<double> empirical_cdf(const ShotNoisePath& path, double T,
                                  std::span<const double> x_grid) {
  if (!(path.t0() <= 0.0 && path.t1() >= T)) throw DomainError("empirical_cdf: path must cover [0, T]");
  if (!std::is_sorted(x_grid.begin(), x_grid.end()))
    throw ParameterError("empirical_cdf: x grid must be sorted");
  std::vector<double> mass(x_grid.size() + 1, 0.0);
  std::size_t k = path.state_index(0.0);
  double s = 0.0;
  while (s < T) {
    const double next = k < path.size() ? std::min(T, path.event_time(k)) : T;
    if (next > s) {
      const double level = path.level_state(k);
      const auto j = static_cast<std::size_t>(
          std::lower_bound(x_grid.begin(), x_grid.end(), level) - x_grid.begin());
      mass[j] += next - s;
      s = next;
    }
    ++k;
  }
  std::vector<double> out(x_grid.size());
  double acc = 0.0;
  for (std::size_t j = 0; j < x_grid.size(); ++j) {
    acc += mass[j];
    out[j] = std::min(1.0, acc / T);
  }
  return out;
}

}  // namespace shotnoise
