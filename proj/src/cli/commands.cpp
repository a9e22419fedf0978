#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "config_json.hpp"
#include "tscp/breakpoints.hpp"
#include "tscp/couplings.hpp"
#include "tscp/errors.hpp"
#include "tscp/estimators.hpp"
#include "tscp/percolation.hpp"
#include "tscp/replicas.hpp"

namespace tscp::cli {

using nlohmann::ordered_json;

namespace {

// Disjoint replica ranges keep the batches of one report independent.
constexpr std::int64_t kBreakpointReplicas = 1'000'000'000;
constexpr std::int64_t kAllInfectedReplicas = 2'000'000'000;
constexpr std::int64_t kThetaReplicas = 3'000'000'000;

int exit_for(Status s) { return s == Status::Pass ? kExitPass : kExitStatisticalFail; }

ordered_json interval_json(const stats::Interval& i) { return {{"lo", i.lo}, {"hi", i.hi}}; }

ordered_json proportion_json(const ProportionEstimate& p) {
  return {{"value", p.value},
          {"successes", p.successes},
          {"trials", p.trials},
          {"interval", interval_json(p.interval)}};
}

ordered_json tail_json(const TailFit& f) {
  return {{"variable", f.variable},       {"samples", f.samples},
          {"censored", f.censored},       {"thresholds", f.thresholds},
          {"log_survival", f.log_survival}, {"gamma_hat", f.gamma_hat},
          {"intercept", f.intercept},     {"r2", f.r2},
          {"min_r2", f.min_r2},           {"status", to_string(f.status)}};
}

ordered_json speed_json(const EdgeSpeedEstimate& e) {
  return {{"alpha_hat", e.alpha_hat}, {"std_error", e.std_error}, {"increments", e.n_increments}};
}

ordered_json violations_json(const std::vector<Violation>& vs) {
  ordered_json out = ordered_json::array();
  for (const Violation& v : vs) {
    out.push_back({{"replica", v.replica}, {"time", v.time}, {"site", v.site}, {"detail", v.detail}});
  }
  return out;
}

std::vector<double> grid(double t_max, double step) {
  std::vector<double> g;
  for (std::int64_t i = 0;; ++i) {
    const double t = static_cast<double>(i) * step;
    if (t > t_max + 1e-9 * t_max) break;
    g.push_back(std::min(t, t_max));
  }
  return g;
}

BreakpointOptions breakpoint_options(const ExperimentConfig& c) {
  BreakpointOptions o;
  o.horizon = c.horizon;
  o.survival_horizon = c.survival_horizon;
  o.window = c.window_policy;
  // The search can stop once the capped sample is complete.
  if (c.increments_per_replica > 0) {
    o.max_points = c.increments_per_replica + 1;
    o.horizon_extensions = c.horizon_extensions;
  }
  return o;
}

std::vector<BreakpointRun> breakpoint_batch(const Context& ctx, std::int64_t count) {
  return run_breakpoint_batch(ctx.construction, kBreakpointReplicas, count,
                              breakpoint_options(ctx.config), ctx.config.workers);
}

struct SpeedEstimate {
  RegenerationSample sample;
  EdgeSpeedEstimate alpha;
  double sigma2 = 0.0;
};

SpeedEstimate regeneration_speed(const ExperimentConfig& c, std::span<const BreakpointRun> runs) {
  SpeedEstimate s;
  s.sample = regeneration_sample(runs, c.increments_per_replica);
  const auto pooled = s.sample.pooled();
  s.alpha = estimate_alpha(pooled);
  s.sigma2 = estimate_sigma2(pooled, s.alpha.alpha_hat);
  return s;
}

ordered_json regeneration_json(const SpeedEstimate& s) {
  std::int64_t complete = static_cast<std::int64_t>(s.sample.series.size());
  return {{"increments_per_replica", s.sample.per_replica},
          {"complete_replicas", complete},
          {"incomplete_replicas", s.sample.incomplete_replicas},
          {"edge_speed", speed_json(s.alpha)},
          {"sigma2_hat", s.sigma2}};
}

std::string increments_csv(const RegenerationSample& sample) {
  std::ostringstream os;
  os << "replica,n,X_n,Psi_n,M_prev\n";
  for (const auto& s : sample.series) {
    for (const Increment& i : s.increments) {
      os << s.replica_id << ',' << i.n << ',' << i.x << ',' << i.psi << ',' << i.m_prev << '\n';
    }
  }
  return os.str();
}

std::vector<ReplicaSummary> standard_batch(const Context& ctx, std::int64_t count, double t_max,
                                           std::vector<double> times,
                                           std::optional<SiteInterval> query = std::nullopt) {
  BatchRequest req;
  req.replicas = count;
  req.t_max = t_max;
  req.sample_times = std::move(times);
  req.query = query;
  req.workers = ctx.config.workers;
  return run_standard_batch(ctx.construction, req);
}

void require_survival_window(const ExperimentConfig& c, double t, const char* what) {
  if (t < c.survival_horizon) {
    throw InputError(std::string(what) + " must be at least survival_horizon");
  }
}

// ---------------------------------------------------------------------------

void simulate(Context& ctx) {
  const ExperimentConfig& c = ctx.config;
  ctx.construction.validate();
  Configuration initial = Configuration::standard();
  if (c.initial == "single_site") initial = Configuration::single_site(0);
  if (c.initial == "left_half_line") initial = Configuration::left_half_line();
  const auto times = grid(c.horizon, c.sample_step);
  const auto trajectories = map_replicas(0, c.replicas, c.workers, [&](std::int64_t r) {
    EvolveRequest req;
    req.replica_id = r;
    req.initial = initial;
    req.t_max = c.horizon;
    req.sample_times = times;
    req.snapshots = false;
    req.window = c.window_policy;
    return evolve(ctx.construction, req);
  });
  std::int64_t died = 0;
  std::int64_t arrows = 0;
  for (const Trajectory& t : trajectories) {
    died += t.died_at ? 1 : 0;
    arrows += t.arrow_events;
  }
  std::ostringstream csv;
  write_trajectory_csv(csv, trajectories);
  ctx.write("simulate.csv", csv.str());
  ctx.results = {{"replicas", c.replicas},
                 {"died", died},
                 {"alive_at_horizon", c.replicas - died},
                 {"arrow_events", arrows}};
  ctx.status = "ok";
  ctx.exit_code = kExitPass;
}

void couplings(Context& ctx) {
  const ExperimentConfig& c = ctx.config;
  CouplingOptions o;
  o.replicas = c.replicas;
  o.t_max = c.horizon;
  o.sample_grid = grid(c.horizon, c.sample_step);
  o.k_cap = c.k_cap;
  o.workers = c.workers;
  std::ostringstream csv;
  csv << "check,replica,time,site,detail\n";
  ordered_json verdicts = ordered_json::array();
  bool clean = true;
  for (const std::string& name : c.coupling_kinds) {
    const Verdict v = verify_coupling(coupling_kind_from_string(name), ctx.construction, o);
    clean = clean && v.passed();
    verdicts.push_back({{"check", name},
                        {"replicas_checked", v.replicas_checked},
                        {"sample_times_checked", v.sample_times_checked},
                        {"violations", violations_json(v.violations)},
                        {"passed", v.passed()}});
    for (const Violation& x : v.violations) {
      csv << name << ',' << x.replica << ',' << x.time << ',' << x.site << ',' << x.detail << '\n';
    }
  }
  ctx.write("couplings_violations.csv", csv.str());
  ctx.results = {{"verdicts", verdicts}};
  ctx.status = clean ? "pass" : "violation";
  ctx.exit_code = clean ? kExitPass : kExitEngineViolation;
}

void breakpoints(Context& ctx) {
  const ExperimentConfig& c = ctx.config;
  const auto runs = run_breakpoint_batch(ctx.construction, 0, c.replicas, breakpoint_options(c),
                                         c.workers);
  std::ostringstream csv;
  write_breakpoints_csv(csv, runs);
  ctx.write("breakpoints.csv", csv.str());

  std::int64_t points = 0;
  std::int64_t dropped = 0;
  std::int64_t origin = 0;
  std::int64_t extended = 0;
  std::vector<std::optional<double>> lifetimes;
  for (const BreakpointRun& run : runs) {
    extended += run.extensions > 0 ? 1 : 0;
    points += static_cast<std::int64_t>(run.breakpoints.size()) - 1;
    dropped += run.dropped;
    origin += run.origin_survives ? 1 : 0;
    for (const RestartRecord& r : run.restarts) {
      if (r.rho) {
        lifetimes.emplace_back(*r.rho - r.hit_time);
      } else {
        lifetimes.emplace_back();
      }
    }
  }
  ctx.results = {{"replicas", c.replicas},
                 {"break_points", points},
                 {"dropped_searches", dropped},
                 {"origin_survives", origin},
                 {"extended_horizons", extended},
                 {"restarts", lifetimes.size()}};
  try {
    ctx.results["regeneration"] = regeneration_json(regeneration_speed(c, runs));
  } catch (const InsufficientData& e) {
    ctx.results["regeneration"] = {{"error", e.what()}};
  }
  // A restart alive at the survival horizon may still die later; the fitted
  // lifetime tail of the restarts that did die bounds how often.
  try {
    const TailFit fit = tail_fit("restart lifetime", lifetimes,
                                 tail_thresholds(lifetimes, c.tail_points), c.min_r2);
    ctx.results["restart_lifetime_tail"] = tail_json(fit);
    ctx.results["misclassification_bound"] =
        std::exp(fit.intercept - fit.gamma_hat * c.survival_horizon);
  } catch (const InsufficientData& e) {
    ctx.results["restart_lifetime_tail"] = {{"error", e.what()}};
    ctx.results["misclassification_bound"] = nullptr;
  }
  ctx.status = "ok";
  ctx.exit_code = kExitPass;
}

void speed(Context& ctx) {
  const ExperimentConfig& c = ctx.config;
  require_survival_window(c, c.t_eval, "t_eval");
  const auto bp = breakpoint_batch(ctx, c.breakpoint_replicas);
  const SpeedEstimate regen = regeneration_speed(c, bp);
  const auto runs = standard_batch(ctx, c.replicas, c.t_eval, {c.t_eval});
  const DirectSlope direct = direct_slope(runs, c.t_eval, c.survival_horizon);
  const DirectSlope hitting = hitting_time_speed(bp, c.hitting_level);

  struct Named {
    const char* name;
    double value;
    double se;
  };
  const Named estimates[] = {{"regeneration", regen.alpha.alpha_hat, regen.alpha.std_error},
                             {"direct_slope", direct.mean, direct.std_error},
                             {"hitting_time", hitting.mean, hitting.std_error}};
  ordered_json pairs = ordered_json::array();
  Status status = direct.survivors < 2 || hitting.survivors < 2 ? Status::Inconclusive : Status::Pass;
  for (int i = 0; i < 3; ++i) {
    for (int j = i + 1; j < 3; ++j) {
      const double diff = estimates[i].value - estimates[j].value;
      const double joint = std::hypot(estimates[i].se, estimates[j].se);
      const bool agree = std::abs(diff) <= 2.0 * joint;
      if (!agree && status == Status::Pass) status = Status::Fail;
      pairs.push_back({{"a", estimates[i].name},
                       {"b", estimates[j].name},
                       {"difference", diff},
                       {"joint_std_error", joint},
                       {"agree", agree}});
    }
  }
  std::ostringstream csv;
  csv << "replica,t,r,proxy_survivor\n";
  for (const ReplicaSummary& r : runs) {
    const auto& s = r.sample_at(c.t_eval);
    csv << r.replica_id << ',' << c.t_eval << ',';
    if (s.r) csv << *s.r;
    csv << ',' << (proxy_survivor(r, c.t_eval, c.survival_horizon) ? 1 : 0) << '\n';
  }
  ctx.write("speed.csv", csv.str());
  ctx.write("increments.csv", increments_csv(regen.sample));
  ctx.results = {
      {"regeneration", regeneration_json(regen)},
      {"direct_slope",
       {{"t", direct.t}, {"mean", direct.mean}, {"std_error", direct.std_error}, {"survivors", direct.survivors}}},
      {"hitting_time",
       {{"level", c.hitting_level},
        {"speed", hitting.mean},
        {"std_error", hitting.std_error},
        {"reached", hitting.survivors},
        {"runs", bp.size()}}},
      {"pairs", pairs}};
  ctx.status = to_string(status);
  ctx.exit_code = exit_for(status);
}

void clt(Context& ctx) {
  const ExperimentConfig& c = ctx.config;
  std::vector<double> times = c.t_list;
  std::sort(times.begin(), times.end());
  const auto bp = breakpoint_batch(ctx, c.breakpoint_replicas);
  const SpeedEstimate regen = regeneration_speed(c, bp);
  const auto runs =
      standard_batch(ctx, c.replicas, std::max(times.back(), c.survival_horizon), times);
  const CltReport report = clt_report(runs, times, regen.alpha.alpha_hat, regen.sigma2,
                                      c.survival_horizon, c.alpha_level);
  std::ostringstream csv;
  csv << "t,replica,z\n";
  for (double t : times) {
    for (const ReplicaSummary& r : runs) {
      if (!proxy_survivor(r, t, c.survival_horizon)) continue;
      const double z = (static_cast<double>(*r.sample_at(t).r) - regen.alpha.alpha_hat * t) /
                       std::sqrt(t * regen.sigma2);
      csv << t << ',' << r.replica_id << ',' << z << '\n';
    }
  }
  ctx.write("clt.csv", csv.str());
  ctx.write("increments.csv", increments_csv(regen.sample));
  ordered_json entries = ordered_json::array();
  for (const CltEntry& e : report.entries) {
    // Entries below the survivor minimum are never tested.
    const bool tested = e.status != Status::Inconclusive;
    entries.push_back({{"t", e.t},
                       {"survivors", e.survivors},
                       {"ks_statistic", tested ? ordered_json(e.ks_statistic) : ordered_json()},
                       {"p_value", tested ? ordered_json(e.p_value) : ordered_json()},
                       {"critical_value", tested ? ordered_json(e.critical_value) : ordered_json()},
                       {"status", to_string(e.status)}});
  }
  ctx.results = {{"regeneration", regeneration_json(regen)},
                 {"level", report.level},
                 {"per_test_level", report.per_test_level},
                 {"entries", entries}};
  ctx.status = to_string(report.status);
  ctx.exit_code = exit_for(report.status);
}

void density(Context& ctx) {
  const ExperimentConfig& c = ctx.config;
  require_survival_window(c, c.t_eval, "t_eval");
  const auto bp = breakpoint_batch(ctx, c.breakpoint_replicas);
  const SpeedEstimate regen = regeneration_speed(c, bp);
  const ThetaEstimate theta =
      estimate_theta(ctx.construction, c.theta_time, {-c.window, c.window}, kThetaReplicas,
                     c.theta_replicas, c.workers, c.window_policy);
  const auto runs = standard_batch(ctx, c.replicas, c.t_eval, {c.t_eval});
  const ProportionEstimate beta = estimate_beta(runs, c.survival_horizon, c.alpha_level);
  const std::vector<double> times{c.t_eval};
  const DensityReport report = density_report(runs, times, regen.alpha, theta.theta_hat,
                                              beta.value, c.survival_horizon, c.density_tolerance);
  std::ostringstream csv;
  csv << "replica,t,r,l,infected_count,proxy_survivor\n";
  for (const ReplicaSummary& r : runs) {
    const auto& s = r.sample_at(c.t_eval);
    csv << r.replica_id << ',' << c.t_eval << ',';
    if (s.r) csv << *s.r;
    csv << ',';
    if (s.l) csv << *s.l;
    csv << ',' << s.infected_count << ',' << (proxy_survivor(r, c.t_eval, c.survival_horizon) ? 1 : 0)
        << '\n';
  }
  ctx.write("density.csv", csv.str());
  ordered_json entries = ordered_json::array();
  for (const DensityEntry& e : report.entries) {
    entries.push_back({{"t", e.t},
                       {"survivors", e.survivors},
                       {"mean_ratio", e.mean_ratio},
                       {"ratio_std_error", e.ratio_stderr},
                       {"target", e.target},
                       {"relative_error", e.relative_error},
                       {"mean_left", e.mean_left},
                       {"left_std_error", e.left_stderr},
                       {"symmetric", e.symmetric},
                       {"status", to_string(e.status)}});
  }
  ctx.results = {{"regeneration", regeneration_json(regen)},
                 {"theta",
                  {{"theta_hat", theta.theta_hat},
                   {"std_error", theta.std_error},
                   {"replicas", theta.replicas},
                   {"time", c.theta_time},
                   {"left_half", theta.left_half},
                   {"right_half", theta.right_half}}},
                 {"beta", proportion_json(beta)},
                 {"tolerance", report.tolerance},
                 {"entries", entries}};
  ctx.status = to_string(report.status);
  ctx.exit_code = exit_for(report.status);
}

void converge(Context& ctx) {
  const ExperimentConfig& c = ctx.config;
  require_survival_window(c, c.t_eval, "t_eval");
  std::vector<std::set<std::int64_t>> sets;
  std::int64_t lo = 0;
  std::int64_t hi = 0;
  for (const auto& f : c.f_sets) {
    std::set<std::int64_t> s(f.begin(), f.end());
    for (std::int64_t x : s) {
      lo = std::min(lo, x);
      hi = std::max(hi, x);
    }
    sets.push_back(std::move(s));
  }
  const SiteInterval query{lo, hi};
  const auto standard = standard_batch(ctx, c.replicas, c.t_eval, {c.t_eval}, query);
  BatchRequest req;
  req.first_replica = kAllInfectedReplicas;
  req.replicas = c.all_infected_replicas;
  req.t_max = c.t_eval;
  req.sample_times = {c.t_eval};
  req.query = query;
  req.window = c.window_policy;
  req.workers = c.workers;
  const auto all = run_all_infected_batch(ctx.construction, req);
  const ConvergenceReport report = complete_convergence_report(standard, all, sets, c.t_eval,
                                                               c.survival_horizon, c.alpha_level);
  std::ostringstream csv;
  csv << "set,left,left_lo,left_hi,phi,right,right_lo,right_hi,overlap\n";
  ordered_json entries = ordered_json::array();
  for (const ConvergenceEntry& e : report.entries) {
    std::ostringstream name;
    bool first = true;
    for (std::int64_t x : e.sites) {
      name << (first ? "" : " ") << x;
      first = false;
    }
    csv << name.str() << ',' << e.left.value << ',' << e.left.interval.lo << ','
        << e.left.interval.hi << ',' << e.phi.value << ',' << e.right << ','
        << e.right_interval.lo << ',' << e.right_interval.hi << ',' << (e.overlap ? 1 : 0) << '\n';
    entries.push_back({{"sites", std::vector<std::int64_t>(e.sites.begin(), e.sites.end())},
                       {"left", proportion_json(e.left)},
                       {"phi", proportion_json(e.phi)},
                       {"right", e.right},
                       {"right_interval", interval_json(e.right_interval)},
                       {"overlap", e.overlap}});
  }
  ctx.write("converge.csv", csv.str());
  ctx.results = {{"t_eval", c.t_eval}, {"beta", proportion_json(report.beta)}, {"entries", entries}};
  ctx.status = to_string(report.status);
  ctx.exit_code = exit_for(report.status);
}

void tails(Context& ctx) {
  const ExperimentConfig& c = ctx.config;
  const auto standard = standard_batch(ctx, c.replicas, c.horizon, {});
  const auto bp = breakpoint_batch(ctx, c.breakpoint_replicas);

  std::vector<std::optional<double>> r_death;
  for (const ReplicaSummary& r : standard) {
    if (r.died_at) {
      r_death.emplace_back(static_cast<double>(r.max_r));
    } else {
      r_death.emplace_back();
    }
  }
  std::vector<std::optional<double>> psi1;
  std::vector<std::optional<double>> x1;
  std::vector<std::optional<double>> m0;
  for (const BreakpointRun& run : bp) {
    if (run.increments.empty()) {
      psi1.emplace_back();
      x1.emplace_back();
      m0.emplace_back();
      continue;
    }
    const Increment& first = run.increments.front();
    psi1.emplace_back(first.psi);
    x1.emplace_back(static_cast<double>(first.x));
    m0.emplace_back(static_cast<double>(first.m_prev));
  }

  ordered_json fits = ordered_json::array();
  std::vector<Status> statuses;
  std::ostringstream csv;
  csv << "variable,threshold,log_survival,fitted\n";
  auto record = [&](const std::string& name, auto&& make) {
    try {
      const TailFit fit = make();
      statuses.push_back(fit.status);
      fits.push_back(tail_json(fit));
      for (std::size_t i = 0; i < fit.thresholds.size(); ++i) {
        csv << name << ',' << fit.thresholds[i] << ',' << fit.log_survival[i] << ','
            << fit.intercept - fit.gamma_hat * fit.thresholds[i] << '\n';
      }
    } catch (const InsufficientData& e) {
      statuses.push_back(Status::Inconclusive);
      fits.push_back({{"variable", name}, {"status", "inconclusive"}, {"error", e.what()}});
    }
  };
  auto sample_fit = [&](const std::string& name, const std::vector<std::optional<double>>& xs,
                        bool integer) {
    record(name, [&] {
      return tail_fit(name, xs, tail_thresholds(xs, c.tail_points, 0.5, 0.99, integer), c.min_r2);
    });
  };
  sample_fit("R_on_death", r_death, true);
  sample_fit("Psi_1", psi1, false);
  sample_fit("X_1", x1, true);
  sample_fit("M_0", m0, true);
  double slope = 0.0;
  record("half_line_lower_deviation", [&] {
    slope = regeneration_speed(c, bp).alpha.alpha_hat / 2.0;
    return half_line_deviation_fit(bp, slope, c.deviation_t_lo, c.tail_points, 10, c.min_r2);
  });
  ctx.write("tails.csv", csv.str());
  Status status = Status::Pass;
  for (Status s : statuses) {
    if (s == Status::Fail) status = Status::Fail;
    if (s == Status::Inconclusive && status == Status::Pass) status = Status::Inconclusive;
  }
  ctx.results = {{"deviation_slope", slope}, {"fits", fits}};
  ctx.status = to_string(status);
  ctx.exit_code = exit_for(status);
}

void iid(Context& ctx) {
  const ExperimentConfig& c = ctx.config;
  const auto bp = run_breakpoint_batch(ctx.construction, 0, c.replicas, breakpoint_options(c),
                                       c.workers);
  const RegenerationSample sample = regeneration_sample(bp, c.increments_per_replica);
  const IidReport report = iid_report(sample.series, c.alpha_level);
  ctx.write("increments.csv", increments_csv(sample));
  ordered_json tests = ordered_json::array();
  for (const IidTest& t : report.tests) {
    tests.push_back({{"coordinate", t.coordinate},
                     {"test", t.test},
                     {"statistic", t.statistic},
                     {"p_value", t.p_value},
                     {"rejects", t.rejects}});
  }
  ctx.results = {{"increments_per_replica", sample.per_replica},
                 {"complete_replicas", sample.series.size()},
                 {"incomplete_replicas", sample.incomplete_replicas},
                 {"total_increments", report.total_increments},
                 {"level", report.level},
                 {"per_test_level", report.per_test_level},
                 {"tests", tests}};
  ctx.status = to_string(report.status);
  ctx.exit_code = exit_for(report.status);
}

void percolation(Context& ctx) {
  const ExperimentConfig& c = ctx.config;
  const PercolationSpeed s = percolation_edge_speed(c.p, c.seed, c.replicas, c.n_max, c.workers,
                                                    c.min_r2);
  std::ostringstream csv;
  for (std::int64_t r = 0; r < c.replicas; ++r) {
    const std::vector<std::vector<ClusterSlice>> one{grow_cluster(SiteField(c.p, c.seed, r), c.n_max)};
    write_cluster_csv(csv, one, r, r == 0);
  }
  ctx.write("percolation.csv", csv.str());
  ordered_json containment = ordered_json::array();
  bool clean = s.half_line_mismatches == 0;
  for (double p_tilde : c.p_tilde) {
    const ContainmentVerdict v = bond_site_coupling_check(p_tilde, c.seed, c.containment_n_max,
                                                          c.containment_fields, 0, c.workers);
    clean = clean && v.passed();
    containment.push_back({{"p_tilde", v.p_tilde},
                           {"p_site", v.p_site},
                           {"fields_checked", v.fields_checked},
                           {"generations_checked", v.generations_checked},
                           {"violations", violations_json(v.violations)},
                           {"passed", v.passed()}});
  }
  ctx.results = {{"p", s.p},
                 {"n_max", s.n_max},
                 {"replicas", s.replicas},
                 {"survivors", s.survivors},
                 {"a_hat", s.a_hat},
                 {"std_error", s.std_error},
                 {"deviation_slope", s.deviation_slope},
                 {"tail", s.tail ? tail_json(*s.tail) : ordered_json()},
                 {"half_line_mismatches", s.half_line_mismatches},
                 {"containment", containment}};
  if (!clean) {
    ctx.status = "violation";
    ctx.exit_code = kExitEngineViolation;
  } else {
    ctx.status = to_string(s.status);
    ctx.exit_code = exit_for(s.status);
  }
}

void selfcheck(Context& ctx) {
  const ExperimentConfig& c = ctx.config;
  CouplingOptions o;
  o.replicas = c.replicas;
  o.t_max = c.horizon;
  o.sample_grid = grid(c.horizon, c.sample_step);
  o.k_cap = c.k_cap;
  o.workers = c.workers;
  ordered_json checks = ordered_json::array();
  bool clean = true;
  for (CouplingKind k : kAllCouplingKinds) {
    const Verdict v = verify_coupling(k, ctx.construction, o);
    clean = clean && v.passed();
    checks.push_back({{"check", to_string(k)},
                      {"sample_times_checked", v.sample_times_checked},
                      {"violations", violations_json(v.violations)}});
  }
  const Construction reduced{c.seed, c.mu, c.mu, 1.0};
  const ReductionVerdict r = verify_reduction(reduced, o);
  clean = clean && r.passed();
  checks.push_back({{"check", "Reduction"},
                    {"sample_times_checked", r.sample_times_checked},
                    {"violations", violations_json(r.violations)}});
  for (double p_tilde : c.p_tilde) {
    const ContainmentVerdict v = bond_site_coupling_check(p_tilde, c.seed, c.containment_n_max,
                                                          c.containment_fields, 0, c.workers);
    clean = clean && v.passed();
    checks.push_back({{"check", "BondSiteContainment"},
                      {"p_tilde", p_tilde},
                      {"generations_checked", v.generations_checked},
                      {"violations", violations_json(v.violations)}});
  }
  ctx.results = {{"checks", checks}};
  ctx.status = clean ? "pass" : "violation";
  ctx.exit_code = clean ? kExitPass : kExitEngineViolation;
}

}  // namespace

void Context::write(const std::string& name, const std::string& content) {
  const std::filesystem::path path = std::filesystem::path(config.out) / name;
  std::ofstream f(path, std::ios::binary);
  if (!f) throw InputError("cannot write " + path.string());
  f << content;
  if (!f) throw InputError("failed writing " + path.string());
  outputs.push_back(name);
}

void run_subcommand(Context& ctx) {
  const std::string& name = ctx.config.subcommand;
  if (name == "simulate") return simulate(ctx);
  if (name == "couplings") return couplings(ctx);
  if (name == "breakpoints") return breakpoints(ctx);
  if (name == "speed") return speed(ctx);
  if (name == "clt") return clt(ctx);
  if (name == "density") return density(ctx);
  if (name == "converge") return converge(ctx);
  if (name == "tails") return tails(ctx);
  if (name == "iid") return iid(ctx);
  if (name == "percolation") return percolation(ctx);
  if (name == "selfcheck") return selfcheck(ctx);
  throw InputError("unknown subcommand: " + name);
}

}  // namespace tscp::cli
