#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include "shotnoise/heavy_rand.hpp"
#include "shotnoise/traffic.hpp"

namespace shotnoise {

// One regenerative cycle [s_start, s_end): busy on [s_start, busy_end), idle after.
struct Cycle {
  double s_start = 0.0;
  double busy_end = 0.0;
  double s_end = 0.0;
  std::size_t index = 1;

  double length() const { return s_end - s_start; }
};

struct CycleDecomposition {
  double s0 = 0.0;  // start of the first complete cycle after time 0
  std::vector<Cycle> cycles;
  std::size_t m_T = 0;
  // No busy-period start was found in (0, T]; s0 is then set to T.
  bool never_idle = false;
};

// How a busy instant is recognised. The occupancy count is regenerative
// even when some rates are zero; the level criterion is the X(t) > 0 test.
enum class BusyCriterion { occupancy, level };

CycleDecomposition decompose_cycles(const ShotNoisePath& path, double T,
                                    BusyCriterion criterion = BusyCriterion::occupancy);

// e^{lambda E[Y]} / lambda
double expected_cycle_length(double lambda, double mean_duration);

struct TailCell {
  double t = 0.0;
  double x = 0.0;
  double empirical = 0.0;    // t * P^(C > a(t) x)
  double theoretical = 0.0;  // e^{lambda E[Y]} x^-alpha
  std::size_t exceedances = 0;
  bool reliable = false;     // at least kMinExceedances exceedances
};

inline constexpr std::size_t kMinExceedances = 20;

std::vector<TailCell> cycle_tail_table(std::span<const double> cycle_lengths, const TailDist& dist,
                                       double lambda, double mean_duration,
                                       std::span<const double> x_grid,
                                       std::span<const double> t_grid);

struct HillEstimate {
  double alpha = 0.0;
  double std_error = 0.0;
  std::size_t k = 0;
};

// k / sum_{i<=k} log(X_(i) / X_(k+1)) over the k largest order statistics.
HillEstimate hill_alpha(std::span<const double> samples, std::size_t k);

// Complete cycle lengths from independent stationary blocks of the given
// horizon until at least n_cycles are collected (block b uses rng.derive(b)).
std::vector<double> collect_cycle_lengths(const TrafficConfig& config, std::size_t n_cycles);

// CSV (index,s_start,busy_end,s_end,length).
void write_cycles_csv(const CycleDecomposition& decomposition, std::ostream& out);

}  // namespace shotnoise
