#include "shotnoise/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <ctime>
#include <exception>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <sstream>
#include <thread>

#include "shotnoise/cycles.hpp"
#include "shotnoise/errors.hpp"
#include "shotnoise/heavy_rand.hpp"
#include "shotnoise/limit.hpp"
#include "shotnoise/skorokhod.hpp"

namespace shotnoise {

using nlohmann::json;

namespace {

constexpr std::pair<Analysis, const char*> kAnalysisNames[] = {
    {Analysis::cycle_mean, "cycle_mean"},
    {Analysis::cycle_tail, "cycle_tail"},
    {Analysis::hill, "hill"},
    {Analysis::stable_limit, "stable_limit"},
    {Analysis::self_similarity, "self_similarity"},
    {Analysis::cdf_rate, "cdf_rate"},
    {Analysis::m1_diagnostic, "m1_diagnostic"},
};

// Streams outside the replicate range [0, replicates).
constexpr std::uint64_t kAuxStream = std::uint64_t{1} << 48;
enum AuxStream : std::uint64_t { cycles_stream = 1, centering_stream, limit_stream, reference_stream, cdf_stream };

RngStream aux(const Scenario& sc, std::uint64_t which, std::uint64_t k = 0) {
  return RngStream(sc.seed, kAuxStream + which).derive(k);
}

double nu_of(const Scenario& sc) { return sc.traffic.lambda * sc.traffic.law.y_dist().mean(); }

bool exact_calE(const Scenario& sc, const WindowFunctional& phi) {
  return sc.traffic.law.constant_rate().has_value() && phi.h() == 0.0;
}

Centering centering_for(const Scenario& sc, const WindowFunctional& phi, std::size_t k) {
  if (exact_calE(sc, phi))
    return Centering::analytic(calE_constant_rate(0.0, phi, nu_of(sc), *sc.traffic.law.constant_rate()));
  auto rng = aux(sc, centering_stream, k);
  return Centering::monte_carlo(estimate_calE(0.0, phi, sc.traffic, sc.n_mc, rng));
}

CalEEstimator calE_for(const Scenario& sc, const WindowFunctional& phi) {
  if (exact_calE(sc, phi)) {
    const double nu = nu_of(sc), w0 = *sc.traffic.law.constant_rate();
    return analytic_calE([phi, nu, w0](double w) { return calE_constant_rate(w, phi, nu, w0); });
  }
  const auto n_inner = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(sc.n_mc))));
  return monte_carlo_calE(phi, sc.traffic, n_inner);
}

json estimate_json(const Estimate& e) {
  return {{"value", e.value}, {"std_error", e.std_error}, {"n", e.n}};
}

json centering_json(const Centering& c) {
  return {{"value", c.value},
          {"std_error", c.std_error},
          {"exact", c.source == Centering::Source::analytic},
          {"n_mc", c.n_mc}};
}

std::vector<double> column(const std::vector<std::vector<double>>& rows, std::size_t j) {
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r[j]);
  return out;
}

GofReport tolerance_report(double statistic, double threshold, std::string method) {
  GofReport g;
  g.statistic = statistic;
  g.threshold = threshold;
  g.passed = statistic <= threshold;
  g.method = std::move(method);
  return g;
}

// Replicate values for every functional and ladder point: z[f][i][r][k] is
// Z_T(phi_f, u_k) at T_ladder[i] for replicate r; cdf[i][r][j] is E_T(x_j).
struct ReplicatePass {
  std::vector<double> u_values;
  std::vector<std::vector<std::vector<std::vector<double>>>> z;
  std::vector<std::vector<std::vector<double>>> cdf;
};

TrafficConfig replicate_config(const Scenario& sc, std::size_t ladder_index, std::size_t r) {
  TrafficConfig cfg = sc.traffic;
  cfg.horizon = sc.T_ladder[ladder_index];
  cfg.rng = RngStream(sc.seed, r).derive(ladder_index);
  return cfg;
}

ReplicatePass replicate_pass(const Scenario& sc, const std::vector<Centering>& centerings,
                             bool want_cdf) {
  ReplicatePass pass;
  pass.u_values = sc.u_grid;
  pass.u_values.push_back(1.0);
  std::sort(pass.u_values.begin(), pass.u_values.end());
  pass.u_values.erase(std::unique(pass.u_values.begin(), pass.u_values.end()), pass.u_values.end());
  const auto nf = sc.functionals.size(), nT = sc.T_ladder.size(), R = sc.replicates;
  pass.z.assign(nf, std::vector(nT, std::vector(R, std::vector<double>{})));
  if (want_cdf) pass.cdf.assign(nT, std::vector(R, std::vector<double>{}));
  const auto& dist = sc.traffic.law.y_dist();
  for (std::size_t i = 0; i < nT; ++i) {
    const double T = sc.T_ladder[i];
    parallel_for(R, sc.workers, [&](std::size_t r) {
      const auto path = simulate_path(replicate_config(sc, i, r));
      for (std::size_t f = 0; f < nf; ++f)
        pass.z[f][i][r] =
            empirical_path_values(path, sc.functionals[f], T, centerings[f], dist, pass.u_values);
      if (want_cdf) pass.cdf[i][r] = empirical_cdf(path, T, sc.x_grid);
    });
  }
  return pass;
}

std::size_t u_index(const ReplicatePass& pass, double u) {
  return static_cast<std::size_t>(
      std::lower_bound(pass.u_values.begin(), pass.u_values.end(), u) - pass.u_values.begin());
}

std::vector<double> reference_sample(const Scenario& sc, const LimitSpec& spec, std::size_t k) {
  if (spec.degenerate) return std::vector<double>(sc.reference_n, 0.0);
  auto rng = aux(sc, reference_stream, k);
  return sample_stable(spec.marginal(1.0), sc.reference_n, rng);
}

struct Ctx {
  const Scenario& sc;
  Report& report;
  std::vector<double> cycle_lengths;
  std::vector<Centering> centerings;
  std::vector<LimitSpec> limits;
  ReplicatePass pass;
};

const std::vector<double>& cycle_lengths(Ctx& ctx) {
  if (ctx.cycle_lengths.empty()) {
    TrafficConfig cfg = ctx.sc.traffic;
    cfg.rng = aux(ctx.sc, cycles_stream);
    ctx.cycle_lengths = collect_cycle_lengths(cfg, ctx.sc.n_cycles);
  }
  return ctx.cycle_lengths;
}

json run_cycle_mean(Ctx& ctx) {
  const auto& L = cycle_lengths(ctx);
  const double mean = sample_mean(L);
  double ss = 0.0;
  for (double c : L) ss += (c - mean) * (c - mean);
  const double se = std::sqrt(ss / static_cast<double>(L.size() - 1) / static_cast<double>(L.size()));
  const double expected = expected_cycle_length(ctx.sc.traffic.lambda, ctx.sc.traffic.law.y_dist().mean());
  auto g = tolerance_report(std::abs(mean / expected - 1.0), 0.05, "cycle_mean_relative_error");
  g.n_a = L.size();
  ctx.report.gof.push_back(g);
  return {{"mean", mean}, {"std_error", se}, {"n", L.size()}, {"expected", expected},
          {"expected_exact", true}, {"gof", g.to_json()}};
}

json run_cycle_tail(Ctx& ctx) {
  const auto& L = cycle_lengths(ctx);
  const auto& dist = ctx.sc.traffic.law.y_dist();
  const auto cells = cycle_tail_table(L, dist, ctx.sc.traffic.lambda, dist.mean(),
                                      ctx.sc.tail_x_grid, ctx.sc.tail_t_grid);
  Table table{"cycle_tail", {"t", "x", "empirical", "theoretical", "exceedances", "reliable"}, {}};
  json cells_json = json::array();
  for (const auto& c : cells) {
    table.rows.push_back({c.t, c.x, c.empirical, c.theoretical, static_cast<double>(c.exceedances),
                          c.reliable ? 1.0 : 0.0});
    // Binomial standard error of t * P^.
    const double p = static_cast<double>(c.exceedances) / static_cast<double>(L.size());
    const double se = c.t * std::sqrt(p * (1.0 - p) / static_cast<double>(L.size()));
    json cell = {{"t", c.t}, {"x", c.x}, {"empirical", c.empirical}, {"std_error", se},
                 {"theoretical", c.theoretical}, {"exceedances", c.exceedances},
                 {"reliable", c.reliable}};
    if (c.reliable) {
      auto g = tolerance_report(std::abs(c.empirical / c.theoretical - 1.0), 0.15,
                                "cycle_tail_relative_error");
      g.n_a = L.size();
      ctx.report.gof.push_back(g);
      cell["gof"] = g.to_json();
    }
    cells_json.push_back(cell);
  }
  ctx.report.tables.push_back(std::move(table));
  return {{"n", L.size()}, {"cells", cells_json}};
}

json run_hill(Ctx& ctx) {
  const auto& L = cycle_lengths(ctx);
  const auto h = hill_alpha(L, ctx.sc.hill_k);
  const double alpha = ctx.sc.traffic.law.y_dist().alpha();
  auto g = tolerance_report(std::abs(h.alpha - alpha), 0.2, "hill_absolute_error");
  g.n_a = L.size();
  ctx.report.gof.push_back(g);
  return {{"alpha_hat", h.alpha}, {"std_error", h.std_error}, {"k", h.k}, {"n", L.size()},
          {"alpha", alpha}, {"gof", g.to_json()}};
}

json run_stable_limit(Ctx& ctx) {
  const auto& sc = ctx.sc;
  const std::size_t k1 = u_index(ctx.pass, 1.0);
  json out = json::object();
  for (std::size_t f = 0; f < sc.functionals.size(); ++f) {
    const auto& phi = sc.functionals[f];
    const auto& spec = ctx.limits[f];
    const auto reference = reference_sample(sc, spec, f);
    Table samples{"stable_limit_" + phi.name() + "_samples", {"replicate"}, {}};
    for (double T : sc.T_ladder) {
      std::ostringstream col;
      col << "Z_T" << T;
      samples.header.push_back(col.str());
    }
    for (std::size_t r = 0; r < sc.replicates; ++r) {
      std::vector<double> row{static_cast<double>(r)};
      for (std::size_t i = 0; i < sc.T_ladder.size(); ++i) row.push_back(ctx.pass.z[f][i][r][k1]);
      samples.rows.push_back(std::move(row));
    }
    Table ref{"stable_limit_" + phi.name() + "_reference", {"value"}, {}};
    for (double v : reference) ref.rows.push_back({v});
    Table ks{"stable_limit_" + phi.name() + "_ks", {"T", "statistic", "threshold"}, {}};
    json ladder = json::array();
    bool monotone = true;
    double previous = 2.0;
    GofReport last;
    for (std::size_t i = 0; i < sc.T_ladder.size(); ++i) {
      const auto z1 = column(samples.rows, i + 1);
      last = ks_two_sample(z1, reference, sc.level);
      monotone = monotone && last.statistic <= previous;
      previous = last.statistic;
      ks.rows.push_back({sc.T_ladder[i], last.statistic, last.threshold});
      ladder.push_back({{"T", sc.T_ladder[i]}, {"gof", last.to_json()}, {"median", sample_median(z1)}});
    }
    ctx.report.gof.push_back(last);
    ctx.report.tables.push_back(std::move(samples));
    ctx.report.tables.push_back(std::move(ref));
    ctx.report.tables.push_back(std::move(ks));
    out[phi.name()] = {{"limit", spec.to_json()},
                       {"centering", centering_json(ctx.centerings[f])},
                       {"ladder", ladder},
                       {"ks_nonincreasing", monotone},
                       {"gof", last.to_json()}};
  }
  return out;
}

json run_self_similarity(Ctx& ctx) {
  const auto& sc = ctx.sc;
  const std::size_t last_T = sc.T_ladder.size() - 1;
  const std::size_t k1 = u_index(ctx.pass, 1.0);
  const double alpha = sc.traffic.law.y_dist().alpha();
  json out = json::object();
  for (std::size_t f = 0; f < sc.functionals.size(); ++f) {
    const auto& reps = ctx.pass.z[f][last_T];
    std::vector<double> z1;
    for (const auto& v : reps) z1.push_back(v[k1]);
    json per_u = json::array();
    for (double u : sc.u_grid) {
      if (u >= 1.0) continue;
      const std::size_t k = u_index(ctx.pass, u);
      std::vector<double> scaled;
      for (const auto& v : reps) scaled.push_back(v[k] * std::pow(u, -1.0 / alpha));
      auto g = ks_two_sample(scaled, z1, sc.level);
      ctx.report.gof.push_back(g);
      per_u.push_back({{"u", u}, {"T", sc.T_ladder[last_T]}, {"gof", g.to_json()}});
    }
    out[sc.functionals[f].name()] = per_u;
  }
  return out;
}

json run_cdf_rate(Ctx& ctx) {
  const auto& sc = ctx.sc;
  const auto& dist = sc.traffic.law.y_dist();
  const double alpha = dist.alpha(), nu = nu_of(sc);
  const auto w0 = sc.traffic.law.constant_rate();
  json out = json::array();
  for (std::size_t j = 0; j < sc.x_grid.size(); ++j) {
    const double x = sc.x_grid[j];
    std::function<double(double)> K;
    Estimate k_est;
    if (w0) {
      K = [nu, w0 = *w0](double y) { return poisson_K(nu, y / w0); };
      k_est = {K(x), 0.0, 0};
    } else {
      auto rng = aux(sc, cdf_stream, j);
      TrafficConfig cfg = sc.traffic;
      const auto phi = level_cdf_indicator(x);
      k_est = estimate_calE(0.0, phi, cfg, sc.n_mc, rng);
      const auto n_inner = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(sc.n_mc))));
      K = [cfg, n_inner, &sc, j](double y) {
        auto r = aux(sc, cdf_stream, 1000 + j);
        return estimate_calE(0.0, level_cdf_indicator(y), cfg, n_inner, r).value;
      };
    }
    Table table{"cdf_rate_x" + std::to_string(j), {"T", "iqr", "median", "mean_scaled", "median_scaled"}, {}};
    std::vector<double> iqr;
    json ladder = json::array();
    std::vector<double> last_scaled;
    for (std::size_t i = 0; i < sc.T_ladder.size(); ++i) {
      const double T = sc.T_ladder[i];
      std::vector<double> d, scaled;
      const double scale = T / tail_quantile_a(dist, T);
      for (const auto& rep : ctx.pass.cdf[i]) {
        d.push_back(rep[j] - k_est.value);
        scaled.push_back(scale * d.back());
      }
      iqr.push_back(interquartile_range(d));
      table.rows.push_back({T, iqr.back(), sample_median(d), sample_mean(scaled), sample_median(scaled)});
      ladder.push_back({{"T", T}, {"iqr", iqr.back()}, {"mean_scaled", sample_mean(scaled)},
                        {"median_scaled", sample_median(scaled)}});
      last_scaled = std::move(scaled);
    }
    const auto slope = rate_regression(sc.T_ladder, iqr);
    const double predicted = -(1.0 - 1.0 / alpha);
    auto g = tolerance_report(std::abs(slope.slope - predicted), 0.1, "cdf_rate_slope_band");
    g.n_a = sc.replicates;
    ctx.report.gof.push_back(g);
    auto rng = aux(sc, limit_stream, 5000 + j);
    const auto limit = cdf_limit_params(x, K, sc.traffic.lambda, alpha, sc.traffic.law.limit_sampler(),
                                        sc.n_mc, rng);
    ctx.report.tables.push_back(std::move(table));
    out.push_back({{"x", x},
                   {"K", estimate_json(k_est)},
                   {"K_exact", w0.has_value()},
                   {"ladder", ladder},
                   {"slope", slope.slope},
                   {"slope_std_error", slope.std_error},
                   {"predicted_slope", predicted},
                   {"left_skewed", sample_mean(last_scaled) < sample_median(last_scaled)},
                   {"limit", limit.to_json()},
                   {"gof", g.to_json()}});
  }
  return out;
}

json run_m1_diagnostic(Ctx& ctx) {
  const auto& sc = ctx.sc;
  const std::size_t last_T = sc.T_ladder.size() - 1;
  const double T = sc.T_ladder[last_T];
  const auto path = simulate_path(replicate_config(sc, last_T, 0));
  const auto dec = decompose_cycles(path, T);
  const Cycle* longest = nullptr;
  for (const auto& c : dec.cycles)
    if (c.s_end <= T && (!longest || c.length() > longest->length())) longest = &c;
  if (!longest) throw DomainError("m1_diagnostic: no complete cycle in replicate 0");
  json out = json::object();
  for (std::size_t f = 0; f < sc.functionals.size(); ++f) {
    const auto& phi = sc.functionals[f];
    const auto z = empirical_path(path, phi, T, ctx.centerings[f], sc.traffic.law.y_dist());
    const auto d = cycle_m1_diagnostic(z, longest->s_start / T, longest->s_end / T, sc.grid_n);
    out[phi.name()] = {{"T", T},
                       {"cycle_index", longest->index},
                       {"u_start", d.u_start},
                       {"u_end", d.u_end},
                       {"m1_lower", d.bracket.lower},
                       {"m1_upper", d.bracket.upper},
                       {"uniform", d.uniform},
                       {"monotone_deviation", d.monotone_deviation},
                       {"reference_bound", d.reference_bound},
                       {"within_bound", d.bracket.upper <= d.reference_bound}};
  }
  return out;
}

}  // namespace

std::string to_string(Analysis a) {
  for (const auto& [k, name] : kAnalysisNames)
    if (k == a) return name;
  return "unknown";
}

Analysis analysis_from_string(const std::string& name) {
  for (const auto& [k, n] : kAnalysisNames)
    if (name == n) return k;
  throw ParameterError("unknown analysis '" + name + "'");
}

bool Report::all_passed() const {
  for (const auto& [name, block] : analyses.items())
    if (block.is_object() && block.contains("error")) return false;
  return std::all_of(gof.begin(), gof.end(), [](const GofReport& g) { return g.passed; });
}

std::string Report::body() const {
  return json{{"scenario", scenario}, {"analyses", analyses}}.dump(2);
}

void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& fn) {
  workers = std::max<std::size_t>(1, std::min(workers, n));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

Report run(const Scenario& scenario) {
  for (const auto& d : validate_scenario(scenario))
    if (d.severity == Diagnostic::Severity::error) throw ParameterError("scenario: " + d.message);
  const auto started = std::chrono::steady_clock::now();
  Report report;
  report.scenario = scenario_echo(scenario);
  Ctx ctx{scenario, report, {}, {}, {}, {}};

  const auto& A = scenario.analyses;
  const bool limits = A.count(Analysis::stable_limit) || A.count(Analysis::self_similarity) ||
                      A.count(Analysis::m1_diagnostic);
  const bool replicates = A.count(Analysis::stable_limit) || A.count(Analysis::self_similarity) ||
                          A.count(Analysis::cdf_rate);
  std::string setup_error;
  try {
    if (limits || replicates) {
      for (std::size_t f = 0; f < scenario.functionals.size(); ++f)
        ctx.centerings.push_back(centering_for(scenario, scenario.functionals[f], f));
    }
    if (A.count(Analysis::stable_limit)) {
      for (std::size_t f = 0; f < scenario.functionals.size(); ++f) {
        auto rng = aux(scenario, limit_stream, f);
        ctx.limits.push_back(limit_params(scenario.functionals[f], scenario.traffic.lambda,
                                          scenario.traffic.law.y_dist().alpha(),
                                          scenario.traffic.law.limit_sampler(),
                                          calE_for(scenario, scenario.functionals[f]), scenario.n_mc,
                                          rng));
      }
    }
    if (replicates) ctx.pass = replicate_pass(scenario, ctx.centerings, A.count(Analysis::cdf_rate) > 0);
  } catch (const std::exception& e) {
    setup_error = e.what();
  }

  const std::pair<Analysis, json (*)(Ctx&)> steps[] = {
      {Analysis::cycle_mean, run_cycle_mean},       {Analysis::cycle_tail, run_cycle_tail},
      {Analysis::hill, run_hill},                   {Analysis::stable_limit, run_stable_limit},
      {Analysis::self_similarity, run_self_similarity}, {Analysis::cdf_rate, run_cdf_rate},
      {Analysis::m1_diagnostic, run_m1_diagnostic},
  };
  for (const auto& [a, step] : steps) {
    if (!A.count(a)) continue;
    const bool needs_setup = a != Analysis::cycle_mean && a != Analysis::cycle_tail && a != Analysis::hill;
    if (needs_setup && !setup_error.empty()) {
      report.analyses[to_string(a)] = {{"error", setup_error}};
      continue;
    }
    try {
      report.analyses[to_string(a)] = step(ctx);
    } catch (const std::exception& e) {
      report.analyses[to_string(a)] = {{"error", e.what()}};
    }
  }

  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  report.provenance = {{"seed", scenario.seed},
                       {"version", kVersion},
                       {"wall_time_seconds", seconds},
                       {"finished_at", static_cast<long long>(std::time(nullptr))}};
  return report;
}

std::vector<std::filesystem::path> emit(const Report& report, EmitFormat format,
                                        const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw ParameterError("emit: cannot create " + out_dir.string() + ": " + ec.message());
  std::vector<std::filesystem::path> files;
  const auto open = [&](const std::string& name) {
    auto p = out_dir / name;
    std::ofstream out(p);
    if (!out) throw ParameterError("emit: cannot write " + p.string());
    files.push_back(p);
    return out;
  };
  if (format == EmitFormat::structured_text) {
    auto out = open("report.json");
    json full{{"scenario", report.scenario},
              {"analyses", report.analyses},
              {"provenance", report.provenance},
              {"all_passed", report.all_passed()}};
    out << full.dump(2) << '\n';
    return files;
  }
  {
    auto out = open("scenario.json");
    out << report.scenario.dump(2) << '\n';
  }
  for (const auto& t : report.tables) {
    auto out = open(t.name + ".csv");
    out << std::setprecision(17);
    for (std::size_t j = 0; j < t.header.size(); ++j) out << (j ? "," : "") << t.header[j];
    out << '\n';
    for (const auto& row : t.rows) {
      for (std::size_t j = 0; j < row.size(); ++j) out << (j ? "," : "") << row[j];
      out << '\n';
    }
  }
  if (!report.gof.empty()) {
    auto out = open("gof.csv");
    out << "method,statistic,threshold,n_a,n_b,passed\n" << std::setprecision(17);
    for (const auto& g : report.gof)
      out << g.method << ',' << g.statistic << ',' << g.threshold << ',' << g.n_a << ',' << g.n_b
          << ',' << (g.passed ? 1 : 0) << '\n';
  }
  return files;
}

}  // namespace shotnoise
