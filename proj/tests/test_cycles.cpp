#include <doctest.h>

#include <cmath>
#include <numeric>
#include <sstream>

#include "shotnoise/cycles.hpp"
#include "shotnoise/errors.hpp"
#include "shotnoise/stats.hpp"

using namespace shotnoise;

namespace {

TrafficConfig reference_config(double horizon, std::uint64_t seed) {
  TrafficConfig cfg;
  cfg.horizon = horizon;
  cfg.rng = RngStream(seed, 0);
  return cfg;
}

}  // namespace

TEST_CASE("hand-traced two-session path") {
  const std::vector<Session> s{{1.0, 1.0, 1.0}, {3.0, 1.0, 1.0}};
  const auto p = build_path(s, 0.0, 6.0);
  const auto d = decompose_cycles(p, 6.0);
  CHECK(d.s0 == 1.0);
  REQUIRE(d.cycles.size() == 1);
  CHECK(d.m_T == 1);
  CHECK(d.cycles[0].s_start == 1.0);
  CHECK(d.cycles[0].busy_end == 2.0);
  CHECK(d.cycles[0].s_end == 3.0);
  CHECK(d.cycles[0].length() == 2.0);
  CHECK(!d.never_idle);
}

TEST_CASE("empty path has no cycles") {
  const std::vector<Session> none;
  const auto d = decompose_cycles(build_path(none, 0.0, 10.0), 10.0);
  CHECK(d.m_T == 0);
  CHECK(d.cycles.empty());
}

TEST_CASE("never idle path is flagged") {
  const std::vector<Session> s{{-1.0, 20.0, 1.0}};
  const auto d = decompose_cycles(build_path(s, 0.0, 10.0), 10.0);
  CHECK(d.never_idle);
  CHECK(d.m_T == 0);
  CHECK(d.s0 == 10.0);
}

TEST_CASE("cycles tile their span and respect occupancy") {
  auto cfg = reference_config(20000.0, 21);
  const auto p = simulate_path(cfg);
  const auto d = decompose_cycles(p, 20000.0);
  REQUIRE(d.m_T > 10);
  double total = 0.0;
  for (std::size_t j = 0; j < d.cycles.size(); ++j) {
    const auto& c = d.cycles[j];
    total += c.length();
    CHECK(c.index == j + 1);
    CHECK(c.s_start < c.busy_end);
    CHECK(c.busy_end < c.s_end);
    if (j > 0) CHECK(c.s_start == d.cycles[j - 1].s_end);
    CHECK(p.count_at(c.s_start) >= 1);
    CHECK(p.count_at(c.busy_end) == 0);
    // Occupancy stays positive between events inside the busy part.
    const auto k0 = p.state_index(c.s_start), k1 = p.state_index(c.busy_end);
    for (auto k = k0; k < k1; ++k) CHECK(p.count_state(k) >= 1);
  }
  CHECK(d.cycles.front().s_start == d.s0);
  CHECK(total == doctest::Approx(d.cycles.back().s_end - d.s0).epsilon(1e-12));
}

TEST_CASE("level and occupancy criteria agree when all rates are positive") {
  auto cfg = reference_config(5000.0, 22);
  const auto p = simulate_path(cfg);
  const auto a = decompose_cycles(p, 5000.0, BusyCriterion::occupancy);
  const auto b = decompose_cycles(p, 5000.0, BusyCriterion::level);
  REQUIRE(a.cycles.size() == b.cycles.size());
  for (std::size_t j = 0; j < a.cycles.size(); ++j) {
    CHECK(a.cycles[j].s_start == b.cycles[j].s_start);
    CHECK(a.cycles[j].s_end == b.cycles[j].s_end);
  }
}

TEST_CASE("zero-rate sessions still open cycles under the occupancy criterion") {
  const std::vector<Session> s{{1.0, 1.0, 0.0}, {3.0, 1.0, 1.0}};
  const auto p = build_path(s, 0.0, 6.0);
  CHECK(decompose_cycles(p, 6.0, BusyCriterion::occupancy).m_T == 1);
  CHECK(decompose_cycles(p, 6.0, BusyCriterion::level).m_T == 0);
}

TEST_CASE("cycle rate M_T / T") {
  const double mean = expected_cycle_length(1.0, 3.0);
  CHECK(mean == doctest::Approx(std::exp(3.0)).epsilon(1e-14));
  const double T = 1e4 * mean;
  // A single path fluctuates like T^{-1/3} and can stay busy throughout,
  // so the median over independent paths is checked.
  std::vector<double> ratios;
  for (std::uint64_t r = 0; r < 15; ++r) {
    auto cfg = reference_config(T, 230 + r);
    ratios.push_back(static_cast<double>(decompose_cycles(simulate_path(cfg), T).m_T) / T * mean);
  }
  CHECK(std::abs(sample_median(ratios) - 1.0) < 0.05);
}

TEST_CASE("theoretical tail column") {
  const std::vector<double> lengths(100, 1.0);
  const double xs[] = {2.0};
  const double ts[] = {1000.0};
  const auto cells = cycle_tail_table(lengths, TailDist::pareto(1.5, 1.0), 1.0, 3.0, xs, ts);
  REQUIRE(cells.size() == 1);
  CHECK(cells[0].theoretical == doctest::Approx(7.101).epsilon(1e-3));
  CHECK(cells[0].empirical == 0.0);
  CHECK(!cells[0].reliable);
}

TEST_CASE("tail cells decay in x") {
  auto cfg = reference_config(1e6, 24);
  const auto lengths = collect_cycle_lengths(cfg, 20000);
  CHECK(lengths.size() >= 20000);
  const double xs[] = {1.0, 4.0, 1e4};
  const double ts[] = {100.0};
  const auto cells = cycle_tail_table(lengths, TailDist::pareto(1.5, 1.0), 1.0, 3.0, xs, ts);
  CHECK(cells[0].empirical > cells[1].empirical);
  CHECK(cells[2].empirical == 0.0);
}

TEST_CASE("hill estimator on exact pareto") {
  RngStream rng(25, 0);
  const auto s = sample_pareto(TailDist::pareto(1.5, 1.0), 100000, rng);
  const auto h = hill_alpha(s, 1000);
  CHECK(h.alpha >= 1.35);
  CHECK(h.alpha <= 1.65);
  CHECK(h.std_error == doctest::Approx(h.alpha / std::sqrt(1000.0)));
}

TEST_CASE("hill estimator on cycle lengths") {
  auto cfg = reference_config(1e6, 26);
  const auto lengths = collect_cycle_lengths(cfg, 100000);
  const auto h = hill_alpha(lengths, 1000);
  CHECK(std::abs(h.alpha - 1.5) < 0.2);
}

TEST_CASE("hill estimator errors") {
  const std::vector<double> flat(100, 2.0);
  CHECK_THROWS(hill_alpha(flat, 10));
  std::vector<double> with_zero(100, 1.0);
  std::iota(with_zero.begin(), with_zero.end(), -50.0);
  CHECK_THROWS(hill_alpha(with_zero, 60));
  CHECK_THROWS(hill_alpha(flat, 100));
}

TEST_CASE("cycles csv") {
  const std::vector<Session> s{{1.0, 1.0, 1.0}, {3.0, 1.0, 1.0}, {5.0, 0.5, 1.0}};
  const auto d = decompose_cycles(build_path(s, 0.0, 8.0), 8.0);
  std::stringstream out;
  write_cycles_csv(d, out);
  std::string line;
  std::getline(out, line);
  CHECK(line == "index,s_start,busy_end,s_end,length");
  std::getline(out, line);
  CHECK(line == "1,1,2,3,2");
}
