#include "shotnoise/cycles.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <iomanip>
#include <ostream>

#include "shotnoise/errors.hpp"

namespace shotnoise {

CycleDecomposition decompose_cycles(const ShotNoisePath& path, double T, BusyCriterion criterion) {
  if (!(path.t0() <= 0.0 && path.t1() >= T))
    throw DomainError("decompose_cycles: path must cover [0, T]");
  const auto busy = [&](std::size_t k) {
    return criterion == BusyCriterion::occupancy ? path.count_state(k) > 0
                                                 : path.level_state(k) > 0.0;
  };

  // Busy-period starts in (0, T] and the first idle instant after each.
  std::vector<double> starts;
  std::vector<double> ends;
  for (std::size_t k = 1; k <= path.size(); ++k) {
    const double t = path.event_time(k - 1);
    if (t > T) break;
    const bool was_busy = busy(k - 1);
    const bool is_busy = busy(k);
    if (!was_busy && is_busy && t > 0.0) {
      starts.push_back(t);
    } else if (was_busy && !is_busy && ends.size() < starts.size()) {
      ends.push_back(t);
    }
  }

  CycleDecomposition out;
  if (starts.empty()) {
    out.never_idle = true;
    out.s0 = T;
    return out;
  }
  out.s0 = starts.front();
  for (std::size_t j = 0; j + 1 < starts.size(); ++j) {
    Cycle c;
    c.s_start = starts[j];
    c.busy_end = ends[j];
    c.s_end = starts[j + 1];
    c.index = j + 1;
    out.cycles.push_back(c);
  }
  out.m_T = out.cycles.size();
  return out;
}

double expected_cycle_length(double lambda, double mean_duration) {
  if (!(lambda > 0.0)) throw ParameterError("expected_cycle_length: lambda must be positive");
  return std::exp(lambda * mean_duration) / lambda;
}

std::vector<TailCell> cycle_tail_table(std::span<const double> cycle_lengths, const TailDist& dist,
                                       double lambda, double mean_duration,
                                       std::span<const double> x_grid,
                                       std::span<const double> t_grid) {
  if (cycle_lengths.empty()) throw ParameterError("cycle_tail_table: no cycle lengths");
  std::vector<double> sorted(cycle_lengths.begin(), cycle_lengths.end());
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  const double constant = std::exp(lambda * mean_duration);
  std::vector<TailCell> table;
  for (double t : t_grid) {
    const double a = tail_quantile_a(dist, t);
    for (double x : x_grid) {
      if (!(x > 0.0)) throw ParameterError("cycle_tail_table: x must be positive");
      TailCell cell;
      cell.t = t;
      cell.x = x;
      const auto first_above = std::upper_bound(sorted.begin(), sorted.end(), a * x);
      cell.exceedances = static_cast<std::size_t>(sorted.end() - first_above);
      cell.empirical = t * static_cast<double>(cell.exceedances) / n;
      cell.theoretical = constant * std::pow(x, -dist.alpha());
      cell.reliable = cell.exceedances >= kMinExceedances;
      table.push_back(cell);
    }
  }
  return table;
}

HillEstimate hill_alpha(std::span<const double> samples, std::size_t k) {
  if (k == 0 || k >= samples.size())
    throw ParameterError("hill_alpha: need 1 <= k < number of samples");
  std::vector<double> top(samples.begin(), samples.end());
  std::nth_element(top.begin(), top.begin() + static_cast<std::ptrdiff_t>(k), top.end(),
                   std::greater<>());
  const double threshold = top[k];
  if (!(threshold > 0.0)) throw ParameterError("hill_alpha: nonpositive order statistic");
  double sum = 0.0;
  for (std::size_t i = 0; i < k; ++i) sum += std::log(top[i] / threshold);
  if (!(sum > 0.0)) throw ParameterError("hill_alpha: top order statistics are all tied");
  HillEstimate est;
  est.k = k;
  est.alpha = static_cast<double>(k) / sum;
  est.std_error = est.alpha / std::sqrt(static_cast<double>(k));
  return est;
}

std::vector<double> collect_cycle_lengths(const TrafficConfig& config, std::size_t n_cycles) {
  config.validate();
  std::vector<double> lengths;
  lengths.reserve(n_cycles);
  std::size_t barren_blocks = 0;
  for (std::uint64_t block = 0; lengths.size() < n_cycles; ++block) {
    TrafficConfig cfg = config;
    cfg.rng = config.rng.derive(block);
    const auto path = simulate_path(cfg);
    const auto dec = decompose_cycles(path, cfg.horizon);
    barren_blocks = dec.cycles.empty() ? barren_blocks + 1 : 0;
    if (barren_blocks == 1000)
      throw ParameterError("collect_cycle_lengths: 1000 blocks without a complete cycle");
    for (const auto& c : dec.cycles) {
      if (lengths.size() == n_cycles) break;
      lengths.push_back(c.length());
    }
  }
  return lengths;
}

void write_cycles_csv(const CycleDecomposition& decomposition, std::ostream& out) {
  out << "index,s_start,busy_end,s_end,length\n" << std::setprecision(17);
  for (const auto& c : decomposition.cycles)
    out << c.index << ',' << c.s_start << ',' << c.busy_end << ',' << c.s_end << ',' << c.length()
        << '\n';
}

}  // namespace shotnoise
