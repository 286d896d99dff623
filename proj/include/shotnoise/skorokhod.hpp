#pragma once

#include <cstddef>
#include <vector>

#include "shotnoise/functional.hpp"

namespace shotnoise {

enum class SteppyKind { step, pwl };

/// Step or piecewise-linear path on [a, b].
///
/// step: value[i] holds on [breakpoints[i], breakpoints[i+1]) and the last
/// value holds up to and including b; breakpoints[0] == a. A final
/// breakpoint equal to b encodes a jump at the right endpoint.
/// pwl: nodes breakpoints[0] == a < ... < breakpoints.back() == b.
struct SteppyPath {
  double a = 0.0;
  double b = 1.0;
  std::vector<double> breakpoints;
  std::vector<double> values;
  SteppyKind kind = SteppyKind::step;

  static SteppyPath step(double a, double b, std::vector<double> breakpoints,
                         std::vector<double> values);
  static SteppyPath pwl(std::vector<double> nodes, std::vector<double> values);

  double value_at(double t) const;
  // f(t-) for t in (a, b].
  double left_limit(double t) const;
  // Restriction to [lo, hi] within [a, b].
  SteppyPath restrict(double lo, double hi) const;
};

SteppyPath to_steppy(const EmpiricalPath& z);

// sup |f - g| using both one-sided limits at every breakpoint.
double dist_uniform(const SteppyPath& f, const SteppyPath& g);

struct M1Bracket {
  double lower = 0.0;
  double upper = 0.0;
};

inline constexpr std::size_t kDefaultM1Grid = 128;

// Brackets the M1 distance. The upper bound is a discrete Frechet coupling of
// the completed graphs (sup of max(|dt|, |dx|)) on points spaced at most
// span / grid_n apart, where span = max(b - a, value range); the lower bound
// combines the endpoint conditions with the Hausdorff distance of the graphs.
M1Bracket dist_m1(const SteppyPath& f, const SteppyPath& g, std::size_t grid_n = kDefaultM1Grid);

/// Compares the continuous interpolation with the cycle step-sum on one cycle
/// [u_start, u_end]: the step path holds z(u_start) and jumps to z(u_end) at
/// u_end. reference_bound = (u_end - u_start) + monotone_deviation, where the
/// deviation is the distance from z to its clamped running extremum.
struct CycleM1Diagnostic {
  double u_start = 0.0;
  double u_end = 0.0;
  M1Bracket bracket;
  double uniform = 0.0;
  double monotone_deviation = 0.0;
  double reference_bound = 0.0;
};

CycleM1Diagnostic cycle_m1_diagnostic(const EmpiricalPath& z, double u_start, double u_end,
                                      std::size_t grid_n = kDefaultM1Grid);

}  // namespace shotnoise
