#include "shotnoise/traffic.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>

#include "shotnoise/errors.hpp"

namespace shotnoise {

IndependentRate uniform_rate(double lo, double hi) {
  if (!(lo >= 0.0 && hi > lo)) throw ParameterError("uniform_rate: need 0 <= lo < hi");
  return {[lo, hi](RngStream& rng) { return lo + (hi - lo) * rng.uniform(); }, 0.5 * (lo + hi),
          "uniform"};
}

IndependentRate exponential_rate(double mean) {
  if (!(mean > 0.0)) throw ParameterError("exponential_rate: mean must be positive");
  return {[mean](RngStream& rng) { return mean * rng.exponential(); }, mean, "exponential"};
}

IndependentRate discrete_rate(std::vector<double> values, std::vector<double> probs) {
  if (values.empty() || values.size() != probs.size())
    throw ParameterError("discrete_rate: values and probs must be nonempty and equally sized");
  double total = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!(values[i] >= 0.0) || !(probs[i] >= 0.0))
      throw ParameterError("discrete_rate: values and probs must be nonnegative");
    total += probs[i];
  }
  if (!(total > 0.0)) throw ParameterError("discrete_rate: probabilities sum to zero");
  std::vector<double> cumulative(probs.size());
  double acc = 0.0, mean = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    acc += probs[i] / total;
    cumulative[i] = acc;
    mean += values[i] * probs[i] / total;
  }
  cumulative.back() = 1.0;
  return {[values, cumulative](RngStream& rng) {
            const double u = rng.uniform();
            const auto it = std::lower_bound(cumulative.begin(), cumulative.end(), u);
            return values[static_cast<std::size_t>(it - cumulative.begin())];
          },
          mean, "discrete"};
}

DeterministicRate saturating_rate(double w_limit) {
  if (!(w_limit > 0.0)) throw ParameterError("saturating_rate: w_limit must be positive");
  return {[w_limit](double y) { return w_limit * y / (1.0 + y); }, w_limit, "saturating"};
}

JointLaw::JointLaw(TailDist y_dist, RateModel w_model, bool tail_assumption_asserted)
    : y_dist_(std::move(y_dist)), w_model_(std::move(w_model)), asserted_(tail_assumption_asserted) {
  if (const auto* c = std::get_if<ConstantRate>(&w_model_)) {
    if (!(c->w0 > 0.0)) throw ParameterError("constant rate must be positive");
  } else if (const auto* ind = std::get_if<IndependentRate>(&w_model_)) {
    if (!ind->sampler) throw ParameterError("independent rate needs a sampler");
  } else if (const auto* det = std::get_if<DeterministicRate>(&w_model_)) {
    if (!det->g) throw ParameterError("deterministic rate needs a map");
  }
}

double JointLaw::draw_rate(double y, RngStream& rng) const {
  return std::visit(
      [&](const auto& m) -> double {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, IndependentRate>) {
          return m.sampler(rng);
        } else if constexpr (std::is_same_v<M, DeterministicRate>) {
          return m.g(y);
        } else {
          return m.w0;
        }
      },
      w_model_);
}

double JointLaw::draw_limit_rate(RngStream& rng) const {
  return std::visit(
      [&](const auto& m) -> double {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, IndependentRate>) {
          return m.sampler(rng);
        } else if constexpr (std::is_same_v<M, DeterministicRate>) {
          return m.w_limit;
        } else {
          return m.w0;
        }
      },
      w_model_);
}

std::function<double(RngStream&)> JointLaw::limit_sampler() const {
  return [law = *this](RngStream& rng) { return law.draw_limit_rate(rng); };
}

std::optional<double> JointLaw::constant_rate() const {
  if (const auto* c = std::get_if<ConstantRate>(&w_model_)) return c->w0;
  return std::nullopt;
}

std::optional<double> JointLaw::mean_product() const {
  const double ey = y_dist_.mean();
  if (const auto* c = std::get_if<ConstantRate>(&w_model_)) return c->w0 * ey;
  if (const auto* ind = std::get_if<IndependentRate>(&w_model_)) {
    if (ind->mean > 0.0) return ind->mean * ey;
  }
  return std::nullopt;
}

void TrafficConfig::validate() const {
  if (!(lambda > 0.0) || !std::isfinite(lambda))
    throw ParameterError("traffic: lambda must be positive");
  if (!(horizon > 0.0) || !std::isfinite(horizon))
    throw ParameterError("traffic: horizon must be positive");
  if (!(window_h >= 0.0) || !std::isfinite(window_h))
    throw ParameterError("traffic: window_h must be nonnegative");
  if (!(law.y_dist().alpha() > 1.0) || !std::isfinite(law.y_dist().mean()))
    throw ParameterError("traffic: session durations need a finite mean (alpha > 1)");
}

// --- ShotNoisePath ---------------------------------------------------------

ShotNoisePath::ShotNoisePath(double t0, double t1, double init_level, long init_count,
                             std::vector<PathEvent> events)
    : t0_(t0), t1_(t1), events_(std::move(events)) {
  if (!(t0 <= t1)) throw ParameterError("path: t0 must not exceed t1");
  if (init_count < 0) throw InvariantError("path: negative initial count");
  levels_.assign(1, init_level);
  counts_.assign(1, init_count);
  levels_.reserve(events_.size() + 1);
  counts_.reserve(events_.size() + 1);

  double accumulated = std::abs(init_level);
  // Rates are nonnegative, so no initial session exceeds the initial level.
  max_rate_ = init_count > 0 ? init_level : 0.0;
  double level = init_level;
  double carry = 0.0;
  long count = init_count;
  double prev_time = t0;
  for (const auto& e : events_) {
    if (e.time < prev_time || e.time > t1)
      throw InvariantError("path: events must be sorted inside [t0, t1]");
    prev_time = e.time;
    // Kahan-compensated running level.
    const double y = e.rate_delta - carry;
    const double t = level + y;
    carry = (t - level) - y;
    level = t;
    count += e.count_delta;
    accumulated += std::abs(e.rate_delta);
    if (count < 0) throw InvariantError("path: occupancy count went negative");
    if (count == 0) {
      level = 0.0;
      carry = 0.0;
    }
    if (e.count_delta > 0 && e.rate_delta > max_rate_) max_rate_ = e.rate_delta;
    slack_ = 1e-9 * accumulated;
    if (level < -slack_) throw InvariantError("path: level went negative beyond numerical slack");
    levels_.push_back(level);
    counts_.push_back(count);
  }
  slack_ = 1e-9 * accumulated;
}

ShotNoisePath ShotNoisePath::from_states(double t0, double t1, std::vector<double> times,
                                         std::vector<double> levels, std::vector<long> counts) {
  if (levels.size() != times.size() + 1 || counts.size() != levels.size())
    throw ParameterError("path: state arrays have inconsistent sizes");
  std::vector<PathEvent> events(times.size());
  for (std::size_t i = 0; i < times.size(); ++i) {
    events[i].time = times[i];
    events[i].rate_delta = levels[i + 1] - levels[i];
    events[i].count_delta = static_cast<int>(counts[i + 1] - counts[i]);
  }
  ShotNoisePath path(t0, t1, levels.front(), counts.front(), std::move(events));
  path.levels_ = std::move(levels);
  return path;
}

std::size_t ShotNoisePath::state_index(double t) const {
  const auto it = std::upper_bound(events_.begin(), events_.end(), t,
                                   [](double v, const PathEvent& e) { return v < e.time; });
  return static_cast<std::size_t>(it - events_.begin());
}

double ShotNoisePath::level_at(double t) const {
  if (!(t >= t0_ && t <= t1_)) throw DomainError("path: evaluation time outside support");
  return levels_[state_index(t)];
}

long ShotNoisePath::count_at(double t) const {
  if (!(t >= t0_ && t <= t1_)) throw DomainError("path: evaluation time outside support");
  return counts_[state_index(t)];
}

double eval_level(const ShotNoisePath& path, double t) { return path.level_at(t); }

// --- simulation ------------------------------------------------------------

std::vector<Session> stationary_population(double lambda, const JointLaw& law, RngStream& rng) {
  // Sessions alive at 0 form a Poisson(lambda E[Y]) population whose
  // durations are size-biased and whose start is uniform over the duration.
  const auto n0 = rng.poisson(lambda * law.y_dist().mean());
  std::vector<Session> out;
  out.reserve(n0);
  for (std::uint64_t i = 0; i < n0; ++i) {
    Session s;
    s.y = law.y_dist().sample_size_biased(rng);
    s.w = law.draw_rate(s.y, rng);
    s.gamma = -rng.uniform() * s.y;
    out.push_back(s);
  }
  return out;
}

namespace {

void append_fresh(double lambda, const JointLaw& law, double span, RngStream& rng,
                  std::vector<Session>& out) {
  const auto n = rng.poisson(lambda * span);
  std::vector<double> gammas(n);
  for (auto& g : gammas) g = span * rng.uniform();
  std::sort(gammas.begin(), gammas.end());
  out.reserve(out.size() + n);
  for (double g : gammas) {
    Session s;
    s.gamma = g;
    s.y = law.y_dist().sample(rng);
    s.w = law.draw_rate(s.y, rng);
    out.push_back(s);
  }
}

}  // namespace

std::vector<Session> simulate_sessions(const TrafficConfig& config) {
  config.validate();
  RngStream rng = config.rng;
  std::vector<Session> out;
  if (config.stationary_init) out = stationary_population(config.lambda, config.law, rng);
  append_fresh(config.lambda, config.law, config.horizon + config.window_h, rng, out);
  return out;
}

ShotNoisePath build_path(std::span<const Session> sessions, double t0, double t1) {
  if (!(t0 < t1)) throw ParameterError("build_path: need t0 < t1");
  struct RawEvent {
    double time;
    double rate;
    int count;
  };
  std::vector<RawEvent> raw;
  raw.reserve(2 * sessions.size());
  double init_level = 0.0;
  long init_count = 0;
  for (const auto& s : sessions) {
    if (!(s.y > 0.0) || !(s.w >= 0.0)) throw ParameterError("build_path: need y > 0 and w >= 0");
    const double end = s.gamma + s.y;
    if (end <= t0 || s.gamma > t1) continue;
    if (s.gamma <= t0) {
      init_level += s.w;
      ++init_count;
    } else {
      raw.push_back({s.gamma, s.w, +1});
    }
    if (end <= t1) raw.push_back({end, -s.w, -1});
  }
  std::sort(raw.begin(), raw.end(),
            [](const RawEvent& a, const RawEvent& b) { return a.time < b.time; });

  std::vector<PathEvent> events;
  events.reserve(raw.size());
  for (std::size_t i = 0; i < raw.size();) {
    PathEvent merged{raw[i].time, 0.0, 0};
    for (; i < raw.size() && raw[i].time == merged.time; ++i) {
      merged.rate_delta += raw[i].rate;
      merged.count_delta += raw[i].count;
    }
    events.push_back(merged);
  }
  return ShotNoisePath(t0, t1, init_level, init_count, std::move(events));
}

ShotNoisePath simulate_path(const TrafficConfig& config) {
  const auto sessions = simulate_sessions(config);
  return build_path(sessions, 0.0, config.horizon + config.window_h);
}

ShotNoisePath stationary_window(const TrafficConfig& config, double h, RngStream& rng) {
  if (!(h >= 0.0)) throw ParameterError("stationary_window: h must be nonnegative");
  auto sessions = stationary_population(config.lambda, config.law, rng);
  if (h == 0.0) {
    double level = 0.0;
    for (const auto& s : sessions) level += s.w;
    return ShotNoisePath(0.0, 0.0, level, static_cast<long>(sessions.size()), {});
  }
  append_fresh(config.lambda, config.law, h, rng, sessions);
  return build_path(sessions, 0.0, h);
}

std::vector<std::vector<double>> stationary_snapshot(const TrafficConfig& config,
                                                     std::span<const double> offsets,
                                                     std::size_t n, RngStream& rng) {
  if (n == 0) throw ParameterError("stationary_snapshot: n must be at least 1");
  double h = 0.0;
  for (double o : offsets) {
    if (!(o >= 0.0)) throw ParameterError("stationary_snapshot: offsets must be nonnegative");
    h = std::max(h, o);
  }
  std::vector<std::vector<double>> out(n, std::vector<double>(offsets.size()));
  for (std::size_t i = 0; i < n; ++i) {
    const auto window = stationary_window(config, h, rng);
    for (std::size_t j = 0; j < offsets.size(); ++j) out[i][j] = window.level_at(offsets[j]);
  }
  return out;
}

// --- CSV -------------------------------------------------------------------

void write_path_csv(const ShotNoisePath& path, std::ostream& out) {
  out << "time,level,count\n";
  out << std::setprecision(17);
  out << path.t0() << ',' << path.level_state(0) << ',' << path.count_state(0) << '\n';
  for (std::size_t i = 0; i < path.size(); ++i)
    out << path.event_time(i) << ',' << path.level_state(i + 1) << ',' << path.count_state(i + 1)
        << '\n';
  const std::size_t last = path.size();
  out << path.t1() << ',' << path.level_state(last) << ',' << path.count_state(last) << '\n';
}

ShotNoisePath read_path_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("time,level,count", 0) != 0)
    throw ParameterError("path csv: missing header");
  std::vector<double> times, levels;
  std::vector<long> counts;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string a, b, c;
    if (!std::getline(row, a, ',') || !std::getline(row, b, ',') || !std::getline(row, c))
      throw ParameterError("path csv: malformed row '" + line + "'");
    times.push_back(std::stod(a));
    levels.push_back(std::stod(b));
    counts.push_back(std::stol(c));
  }
  if (times.size() < 2) throw ParameterError("path csv: need initial and terminal rows");
  const double t0 = times.front();
  const double t1 = times.back();
  // Drop the terminal row; the rest are the initial state and events.
  times.pop_back();
  levels.pop_back();
  counts.pop_back();
  std::vector<double> event_times(times.begin() + 1, times.end());
  return ShotNoisePath::from_states(t0, t1, std::move(event_times), std::move(levels),
                                    std::move(counts));
}

}  // namespace shotnoise
