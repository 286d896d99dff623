#include "shotnoise/skorokhod.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "shotnoise/errors.hpp"

namespace shotnoise {

namespace {

struct Point {
  double t;
  double x;
};

double linf(const Point& p, const Point& q) { return std::max(std::abs(p.t - q.t), std::abs(p.x - q.x)); }

// min over s in [0,1] of |p - (a + s (b - a))|_inf. The objective is convex
// and piecewise linear in s, so its minimum sits at an endpoint, a zero of
// one coordinate difference, or a crossing of the two absolute values.
double linf_to_segment(const Point& p, const Point& a, const Point& b) {
  const double dt = b.t - a.t, dx = b.x - a.x;
  const double et = p.t - a.t, ex = p.x - a.x;
  double candidates[6] = {0.0, 1.0, -1.0, -1.0, -1.0, -1.0};
  if (dt != 0.0) candidates[2] = et / dt;
  if (dx != 0.0) candidates[3] = ex / dx;
  if (dt - dx != 0.0) candidates[4] = (et - ex) / (dt - dx);
  if (dt + dx != 0.0) candidates[5] = (et + ex) / (dt + dx);
  double best = std::numeric_limits<double>::infinity();
  for (double s : candidates) {
    if (!(s >= 0.0 && s <= 1.0)) continue;
    best = std::min(best, std::max(std::abs(et - s * dt), std::abs(ex - s * dx)));
  }
  return best;
}

std::vector<Point> completed_graph(const SteppyPath& f) {
  std::vector<Point> pts;
  if (f.kind == SteppyKind::pwl) {
    for (std::size_t i = 0; i < f.breakpoints.size(); ++i) pts.push_back({f.breakpoints[i], f.values[i]});
    return pts;
  }
  pts.push_back({f.a, f.values[0]});
  for (std::size_t i = 1; i < f.breakpoints.size(); ++i) {
    pts.push_back({f.breakpoints[i], f.values[i - 1]});
    pts.push_back({f.breakpoints[i], f.values[i]});
  }
  if (pts.back().t < f.b) pts.push_back({f.b, f.values.back()});
  return pts;
}

std::vector<Point> densify(const std::vector<Point>& vertices, double spacing) {
  std::vector<Point> out{vertices.front()};
  for (std::size_t i = 1; i < vertices.size(); ++i) {
    const Point& p = vertices[i - 1];
    const Point& q = vertices[i];
    const double len = linf(p, q);
    if (len == 0.0) continue;
    const auto pieces = static_cast<std::size_t>(std::ceil(len / spacing));
    for (std::size_t k = 1; k < pieces; ++k) {
      const double s = static_cast<double>(k) / static_cast<double>(pieces);
      out.push_back({p.t + s * (q.t - p.t), p.x + s * (q.x - p.x)});
    }
    out.push_back(q);
  }
  return out;
}

double directed_hausdorff(const std::vector<Point>& from, const std::vector<Point>& polyline) {
  double worst = 0.0;
  for (const auto& p : from) {
    double best = std::numeric_limits<double>::infinity();
    if (polyline.size() == 1) best = linf(p, polyline.front());
    for (std::size_t i = 1; i < polyline.size() && best > worst; ++i)
      best = std::min(best, linf_to_segment(p, polyline[i - 1], polyline[i]));
    worst = std::max(worst, best);
  }
  return worst;
}

double discrete_frechet(const std::vector<Point>& p, const std::vector<Point>& q) {
  const std::size_t m = q.size();
  std::vector<double> prev(m), cur(m);
  for (std::size_t i = 0; i < p.size(); ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      const double d = linf(p[i], q[j]);
      double reach;
      if (i == 0 && j == 0) reach = d;
      else if (i == 0) reach = cur[j - 1];
      else if (j == 0) reach = prev[j];
      else reach = std::min({prev[j], cur[j - 1], prev[j - 1]});
      cur[j] = std::max(d, reach);
    }
    std::swap(prev, cur);
  }
  return prev[m - 1];
}

void check_same_interval(const SteppyPath& f, const SteppyPath& g) {
  if (f.a != g.a || f.b != g.b) throw ParameterError("skorokhod: paths live on different intervals");
}

}  // namespace

SteppyPath SteppyPath::step(double a, double b, std::vector<double> breakpoints,
                            std::vector<double> values) {
  if (!(a < b)) throw ParameterError("step path: need a < b");
  if (breakpoints.empty() || breakpoints.size() != values.size() || breakpoints.front() != a)
    throw ParameterError("step path: breakpoints must start at a and match values");
  for (std::size_t i = 1; i < breakpoints.size(); ++i)
    if (!(breakpoints[i] > breakpoints[i - 1]) || breakpoints[i] > b)
      throw ParameterError("step path: breakpoints must increase strictly within [a, b]");
  for (double v : values)
    if (!std::isfinite(v)) throw ParameterError("step path: values must be finite");
  return {a, b, std::move(breakpoints), std::move(values), SteppyKind::step};
}

SteppyPath SteppyPath::pwl(std::vector<double> nodes, std::vector<double> values) {
  if (nodes.size() < 2 || nodes.size() != values.size())
    throw ParameterError("pwl path: need at least two nodes with matching values");
  for (std::size_t i = 1; i < nodes.size(); ++i)
    if (!(nodes[i] > nodes[i - 1])) throw ParameterError("pwl path: nodes must increase strictly");
  for (double v : values)
    if (!std::isfinite(v)) throw ParameterError("pwl path: values must be finite");
  const double a = nodes.front(), b = nodes.back();
  return {a, b, std::move(nodes), std::move(values), SteppyKind::pwl};
}

double SteppyPath::value_at(double t) const {
  if (!(t >= a && t <= b)) throw DomainError("steppy path: t outside [a, b]");
  const auto it = std::upper_bound(breakpoints.begin(), breakpoints.end(), t);
  const auto i = static_cast<std::size_t>(it - breakpoints.begin()) - 1;
  if (kind == SteppyKind::step || i + 1 == breakpoints.size()) return values[i];
  const double s = (t - breakpoints[i]) / (breakpoints[i + 1] - breakpoints[i]);
  return values[i] + s * (values[i + 1] - values[i]);
}

double SteppyPath::left_limit(double t) const {
  if (!(t > a && t <= b)) throw DomainError("steppy path: left limit needs t in (a, b]");
  if (kind == SteppyKind::pwl) return value_at(t);
  const auto it = std::lower_bound(breakpoints.begin(), breakpoints.end(), t);
  return values[static_cast<std::size_t>(it - breakpoints.begin()) - 1];
}

SteppyPath SteppyPath::restrict(double lo, double hi) const {
  if (!(lo >= a && hi <= b && lo < hi)) throw DomainError("steppy path: bad restriction interval");
  std::vector<double> br{lo}, vals{value_at(lo)};
  for (std::size_t i = 0; i < breakpoints.size(); ++i) {
    if (breakpoints[i] > lo && breakpoints[i] < hi) {
      br.push_back(breakpoints[i]);
      vals.push_back(values[i]);
    }
  }
  if (kind == SteppyKind::pwl) {
    br.push_back(hi);
    vals.push_back(value_at(hi));
    return pwl(std::move(br), std::move(vals));
  }
  // Keep a jump located exactly at hi.
  if (std::binary_search(breakpoints.begin(), breakpoints.end(), hi) && hi > lo) {
    br.push_back(hi);
    vals.push_back(value_at(hi));
  }
  return step(lo, hi, std::move(br), std::move(vals));
}

SteppyPath to_steppy(const EmpiricalPath& z) {
  std::vector<double> nodes, vals;
  for (std::size_t i = 0; i < z.u_breaks.size(); ++i) {
    if (!nodes.empty() && z.u_breaks[i] <= nodes.back()) {
      vals.back() = z.values[i];
      continue;
    }
    nodes.push_back(z.u_breaks[i]);
    vals.push_back(z.values[i]);
  }
  return SteppyPath::pwl(std::move(nodes), std::move(vals));
}

double dist_uniform(const SteppyPath& f, const SteppyPath& g) {
  check_same_interval(f, g);
  std::vector<double> times = f.breakpoints;
  times.insert(times.end(), g.breakpoints.begin(), g.breakpoints.end());
  times.push_back(f.b);
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());
  double worst = 0.0;
  for (double t : times) {
    worst = std::max(worst, std::abs(f.value_at(t) - g.value_at(t)));
    if (t > f.a) worst = std::max(worst, std::abs(f.left_limit(t) - g.left_limit(t)));
  }
  return worst;
}

M1Bracket dist_m1(const SteppyPath& f, const SteppyPath& g, std::size_t grid_n) {
  check_same_interval(f, g);
  if (grid_n < 8) throw ParameterError("dist_m1: grid_n must be at least 8");
  const auto pf = completed_graph(f);
  const auto pg = completed_graph(g);
  double lo_x = std::numeric_limits<double>::infinity(), hi_x = -lo_x;
  for (const auto* pts : {&pf, &pg})
    for (const auto& p : *pts) {
      lo_x = std::min(lo_x, p.x);
      hi_x = std::max(hi_x, p.x);
    }
  const double span = std::max(f.b - f.a, hi_x - lo_x);
  const double spacing = span / static_cast<double>(grid_n);
  const auto df = densify(pf, spacing);
  const auto dg = densify(pg, spacing);

  M1Bracket out;
  // The uniform distance majorizes M1 and is exact on breakpoints.
  out.upper = std::min(discrete_frechet(df, dg), dist_uniform(f, g));
  const double endpoints = std::max(linf(pf.front(), pg.front()), linf(pf.back(), pg.back()));
  out.lower = std::max({endpoints, directed_hausdorff(df, pg), directed_hausdorff(dg, pf)});
  out.lower = std::min(out.lower, out.upper);
  return out;
}

CycleM1Diagnostic cycle_m1_diagnostic(const EmpiricalPath& z, double u_start, double u_end,
                                      std::size_t grid_n) {
  const auto full = to_steppy(z);
  const auto interp = full.restrict(u_start, u_end);
  const double start_value = interp.values.front();
  const double end_value = interp.values.back();
  const auto steps = SteppyPath::step(u_start, u_end, {u_start, u_end}, {start_value, end_value});

  CycleM1Diagnostic d;
  d.u_start = u_start;
  d.u_end = u_end;
  d.bracket = dist_m1(interp, steps, grid_n);
  d.uniform = dist_uniform(interp, steps);
  const bool rising = end_value >= start_value;
  const double lo = std::min(start_value, end_value), hi = std::max(start_value, end_value);
  double extremum = start_value;
  for (double v : interp.values) {
    extremum = rising ? std::max(extremum, v) : std::min(extremum, v);
    d.monotone_deviation = std::max(d.monotone_deviation, std::abs(v - std::clamp(extremum, lo, hi)));
  }
  d.reference_bound = (u_end - u_start) + d.monotone_deviation;
  return d;
}

}  // namespace shotnoise
