#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "shotnoise/heavy_rand.hpp"
#include "shotnoise/rng.hpp"

namespace shotnoise {

// One transmission session: arrival time, duration, rate.
struct Session {
  double gamma = 0.0;
  double y = 1.0;
  double w = 1.0;
};

// W drawn independently of Y; the limit law G is the law of W itself.
struct IndependentRate {
  std::function<double(RngStream&)> sampler;
  double mean = 0.0;
  std::string label;
};

// W = g(Y) with g(y) -> w_limit as y -> infinity; G is the point mass at w_limit.
struct DeterministicRate {
  std::function<double(double)> g;
  double w_limit = 1.0;
  std::string label;
};

struct ConstantRate {
  double w0 = 1.0;
};

using RateModel = std::variant<IndependentRate, DeterministicRate, ConstantRate>;

IndependentRate uniform_rate(double lo, double hi);
IndependentRate exponential_rate(double mean);
IndependentRate discrete_rate(std::vector<double> values, std::vector<double> probs);
// g(y) = w_limit * y / (1 + y)
DeterministicRate saturating_rate(double w_limit);

/// Joint law of (Y, W) together with the limit rate law G.
///
/// The regular-variation condition on (Y/a(n), W) cannot be checked by
/// machine for arbitrary couplings; `tail_assumption_asserted` records the
/// caller's assertion. It holds for the three built-in rate models whenever
/// Y has a regularly varying tail.
class JointLaw {
 public:
  JointLaw() : JointLaw(TailDist{}, ConstantRate{}) {}
  JointLaw(TailDist y_dist, RateModel w_model, bool tail_assumption_asserted = true);

  const TailDist& y_dist() const { return y_dist_; }
  const RateModel& w_model() const { return w_model_; }
  bool tail_assumption_asserted() const { return asserted_; }

  double draw_rate(double y, RngStream& rng) const;
  // W* ~ G.
  double draw_limit_rate(RngStream& rng) const;
  std::function<double(RngStream&)> limit_sampler() const;

  std::optional<double> constant_rate() const;
  // E[Y W] when it has a closed form.
  std::optional<double> mean_product() const;

 private:
  TailDist y_dist_;
  RateModel w_model_;
  bool asserted_;
};

struct TrafficConfig {
  double lambda = 1.0;
  JointLaw law;
  double horizon = 1.0;
  double window_h = 0.0;
  bool stationary_init = true;
  RngStream rng;

  void validate() const;
};

struct PathEvent {
  double time = 0.0;
  double rate_delta = 0.0;
  int count_delta = 0;
};

/// Piecewise-constant cadlag realization of X(t) and the occupancy count.
///
/// State k (k = 0..events().size()) holds on [time_k, time_{k+1}) where
/// time_0 = t0; state 0 is the initial level and count.
class ShotNoisePath {
 public:
  ShotNoisePath() = default;
  ShotNoisePath(double t0, double t1, double init_level, long init_count,
                std::vector<PathEvent> events);

  // Rebuild from recorded states; levels are taken verbatim.
  static ShotNoisePath from_states(double t0, double t1, std::vector<double> times,
                                   std::vector<double> levels, std::vector<long> counts);

  double t0() const { return t0_; }
  double t1() const { return t1_; }
  double init_level() const { return levels_.front(); }
  long init_count() const { return counts_.front(); }
  const std::vector<PathEvent>& events() const { return events_; }
  std::size_t size() const { return events_.size(); }

  double event_time(std::size_t i) const { return events_[i].time; }
  // State after the first k events.
  double level_state(std::size_t k) const { return levels_[k]; }
  long count_state(std::size_t k) const { return counts_[k]; }
  // Number of events with time <= t.
  std::size_t state_index(double t) const;

  double level_at(double t) const;
  long count_at(double t) const;
  double max_rate() const { return max_rate_; }
  // Slack for the level >= 0 invariant: 1e-9 times the accumulated |rate|.
  double numerical_slack() const { return slack_; }

 private:
  double t0_ = 0.0;
  double t1_ = 0.0;
  std::vector<PathEvent> events_;
  std::vector<double> levels_{0.0};
  std::vector<long> counts_{0};
  double max_rate_ = 0.0;
  double slack_ = 0.0;
};

// Fresh Poisson arrivals on [0, T + h] and, if requested, the exact
// stationary population alive at time 0.
std::vector<Session> simulate_sessions(const TrafficConfig& config);

// Sessions alive at time 0 under stationarity (gamma < 0 < gamma + y).
std::vector<Session> stationary_population(double lambda, const JointLaw& law, RngStream& rng);

ShotNoisePath build_path(std::span<const Session> sessions, double t0, double t1);

// build_path(simulate_sessions(config), 0, T + h)
ShotNoisePath simulate_path(const TrafficConfig& config);

double eval_level(const ShotNoisePath& path, double t);

// Independent stationary window X_h(0) as a path on [0, h].
ShotNoisePath stationary_window(const TrafficConfig& config, double h, RngStream& rng);

// n i.i.d. draws of (X(o_1), ..., X(o_m)) under stationarity.
std::vector<std::vector<double>> stationary_snapshot(const TrafficConfig& config,
                                                     std::span<const double> offsets,
                                                     std::size_t n, RngStream& rng);

// CSV (time,level,count): a row at t0 with the initial state, one row per
// event, and a terminal row at t1.
void write_path_csv(const ShotNoisePath& path, std::ostream& out);
ShotNoisePath read_path_csv(std::istream& in);

}  // namespace shotnoise
