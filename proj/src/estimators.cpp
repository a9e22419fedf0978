#include "tscp/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "tscp/errors.hpp"
#include "tscp/replicas.hpp"

namespace tscp {

const char* to_string(Status s) {
  switch (s) {
    case Status::Pass: return "pass";
    case Status::Fail: return "fail";
    case Status::Inconclusive: return "inconclusive";
  }
  return "?";
}

namespace {

Status combine(std::span<const Status> parts) {
  if (parts.empty()) return Status::Inconclusive;
  bool inconclusive = false;
  for (Status s : parts) {
    if (s == Status::Fail) return Status::Fail;
    inconclusive = inconclusive || s == Status::Inconclusive;
  }
  return inconclusive ? Status::Inconclusive : Status::Pass;
}

template <class Entries>
Status combine_entries(const Entries& entries) {
  std::vector<Status> parts;
  for (const auto& e : entries) parts.push_back(e.status);
  return combine(parts);
}

}  // namespace

// ---------------------------------------------------------------------------
// Replica batches

const ProcessState& ReplicaSummary::sample_at(double t) const {
  for (const ProcessState& s : samples) {
    if (s.time == t) return s;
  }
  throw InputError("time " + std::to_string(t) + " was not sampled");
}

const Snapshot& ReplicaSummary::snapshot_at(double t) const {
  for (const Snapshot& s : snapshots) {
    if (s.time == t) return s;
  }
  throw InputError("no snapshot at time " + std::to_string(t));
}

namespace {

ReplicaSummary summarize(Trajectory&& t, bool keep_snapshots) {
  ReplicaSummary s;
  s.replica_id = t.replica_id;
  s.died_at = t.died_at;
  for (const ProcessState& e : t.edges) {
    if (e.r) s.max_r = std::max(s.max_r, *e.r);
  }
  s.samples = std::move(t.samples);
  if (keep_snapshots) s.snapshots = std::move(t.snapshots);
  return s;
}

void check_batch(const BatchRequest& req) {
  if (req.replicas < 0) throw InputError("replica count must be nonnegative");
  if (!(req.t_max > 0.0)) throw InputError("t_max must be positive");
}

}  // namespace

std::vector<ReplicaSummary> run_standard_batch(const Construction& c, const BatchRequest& req) {
  c.validate();
  check_batch(req);
  return map_replicas(req.first_replica, req.replicas, req.workers, [&](std::int64_t replica) {
    EvolveRequest e;
    e.replica_id = replica;
    e.t_max = req.t_max;
    e.sample_times = req.sample_times;
    e.query = req.query;
    e.snapshots = req.query.has_value();
    return summarize(evolve(c, e), e.snapshots);
  });
}

std::vector<ReplicaSummary> run_all_infected_batch(const Construction& c,
                                                   const BatchRequest& req) {
  c.validate();
  check_batch(req);
  if (!req.query) throw InputError("an all-infected batch needs a query region");
  return map_replicas(req.first_replica, req.replicas, req.workers, [&](std::int64_t replica) {
    return summarize(contact_evolve(c, replica, ContactStart::all(), 0.0, req.t_max,
                                    req.sample_times, req.window, req.query),
                     true);
  });
}

bool proxy_survivor(const ReplicaSummary& r, double t, double survival_horizon) {
  return r.alive_at(std::max(t, survival_horizon));
}

// ---------------------------------------------------------------------------
// Regeneration increments

std::vector<Increment> RegenerationSample::pooled() const {
  std::vector<Increment> out;
  for (const auto& s : series) out.insert(out.end(), s.increments.begin(), s.increments.end());
  return out;
}

RegenerationSample regeneration_sample(std::span<const BreakpointRun> runs,
                                       std::int64_t per_replica) {
  if (per_replica < 0) throw InputError("increments per replica must be nonnegative");
  RegenerationSample sample;
  sample.per_replica = per_replica;
  for (const BreakpointRun& run : runs) {
    const auto needed = static_cast<std::size_t>(per_replica + 1);
    if (per_replica > 0 && run.increments.size() < needed) {
      ++sample.incomplete_replicas;
      continue;
    }
    IncrementSeries s;
    s.replica_id = run.replica_id;
    for (const Increment& inc : regeneration_increments(run)) {
      if (per_replica > 0 && inc.n > per_replica + 1) break;
      s.increments.push_back(inc);
    }
    sample.series.push_back(std::move(s));
  }
  return sample;
}

// ---------------------------------------------------------------------------
// Edge speed and fluctuations

EdgeSpeedEstimate estimate_alpha(std::span<const Increment> increments) {
  if (increments.size() < 2) throw InsufficientData("edge speed needs at least two increments");
  const double n = static_cast<double>(increments.size());
  double sx = 0.0;
  double sp = 0.0;
  for (const Increment& i : increments) {
    sx += static_cast<double>(i.x);
    sp += i.psi;
  }
  const double mean_x = sx / n;
  const double mean_psi = sp / n;
  EdgeSpeedEstimate e;
  e.alpha_hat = mean_x / mean_psi;
  e.n_increments = static_cast<std::int64_t>(increments.size());
  double ss = 0.0;
  for (const Increment& i : increments) {
    const double d = static_cast<double>(i.x) - e.alpha_hat * i.psi;
    ss += d * d;
  }
  e.std_error = std::sqrt(ss / (n - 1.0) / n) / mean_psi;
  return e;
}

double estimate_sigma2(std::span<const Increment> increments, double alpha_hat) {
  if (increments.size() < 2) throw InsufficientData("variance needs at least two increments");
  double ss = 0.0;
  double sp = 0.0;
  for (const Increment& i : increments) {
    const double d = static_cast<double>(i.x) - alpha_hat * i.psi;
    ss += d * d;
    sp += i.psi;
  }
  return ss / sp;
}

DirectSlope direct_slope(std::span<const ReplicaSummary> runs, double t, double survival_horizon) {
  std::vector<double> slopes;
  for (const ReplicaSummary& r : runs) {
    if (!proxy_survivor(r, t, survival_horizon)) continue;
    slopes.push_back(static_cast<double>(*r.sample_at(t).r) / t);
  }
  DirectSlope d;
  d.t = t;
  d.survivors = static_cast<std::int64_t>(slopes.size());
  if (slopes.size() < 2) return d;
  const auto m = stats::moments(slopes);
  d.mean = m.mean;
  d.std_error = m.std_error();
  return d;
}

DirectSlope hitting_time_speed(std::span<const BreakpointRun> runs, std::int64_t k) {
  if (k < 1) throw InputError("level must be positive");
  std::vector<double> taus;
  for (const BreakpointRun& run : runs) {
    for (const EdgePoint& e : run.half_line_edge) {
      if (e.r == k) {
        taus.push_back(e.time);
        break;
      }
    }
  }
  DirectSlope d;
  d.t = static_cast<double>(k);
  d.survivors = static_cast<std::int64_t>(taus.size());
  if (taus.size() < 2) return d;
  const auto m = stats::moments(taus);
  d.mean = static_cast<double>(k) / m.mean;
  d.std_error = static_cast<double>(k) * m.std_error() / (m.mean * m.mean);
  return d;
}

CltReport clt_from_samples(std::span<const double> times,
                           std::span<const std::vector<double>> edge_samples, double alpha_hat,
                           double sigma2_hat, double level) {
  if (!(sigma2_hat > 0.0)) throw InputError("CLT test needs a positive variance estimate");
  if (times.size() != edge_samples.size()) throw InputError("one sample list per time expected");
  if (times.empty()) throw InputError("no times given");
  CltReport report;
  report.alpha_hat = alpha_hat;
  report.sigma2_hat = sigma2_hat;
  report.level = level;
  report.per_test_level = level / static_cast<double>(times.size());
  for (std::size_t i = 0; i < times.size(); ++i) {
    CltEntry e;
    e.t = times[i];
    if (!(e.t > 0.0)) throw InputError("CLT times must be positive");
    e.survivors = static_cast<std::int64_t>(edge_samples[i].size());
    if (e.survivors >= kMinCltSurvivors) {
      const double scale = std::sqrt(e.t * sigma2_hat);
      std::vector<double> z;
      z.reserve(edge_samples[i].size());
      for (double r : edge_samples[i]) z.push_back((r - alpha_hat * e.t) / scale);
      const auto ks = stats::ks_one_sample(std::move(z), stats::normal_cdf);
      e.ks_statistic = ks.statistic;
      e.p_value = ks.p_value;
      e.critical_value = stats::ks_critical_value(ks.n, report.per_test_level);
      e.status = ks.rejects(report.per_test_level) ? Status::Fail : Status::Pass;
    }
    report.entries.push_back(e);
  }
  report.status = combine_entries(report.entries);
  return report;
}

CltReport clt_report(std::span<const ReplicaSummary> runs, std::span<const double> times,
                     double alpha_hat, double sigma2_hat, double survival_horizon, double level) {
  std::vector<std::vector<double>> samples(times.size());
  for (std::size_t i = 0; i < times.size(); ++i) {
    for (const ReplicaSummary& r : runs) {
      if (proxy_survivor(r, times[i], survival_horizon)) {
        samples[i].push_back(static_cast<double>(*r.sample_at(times[i]).r));
      }
    }
  }
  return clt_from_samples(times, samples, alpha_hat, sigma2_hat, level);
}

// ---------------------------------------------------------------------------
// Density, survival and complete convergence

namespace {

ProportionEstimate proportion(std::int64_t successes, std::int64_t trials, double level) {
  ProportionEstimate p;
  p.successes = successes;
  p.trials = trials;
  if (trials > 0) {
    p.value = static_cast<double>(successes) / static_cast<double>(trials);
    p.interval = stats::wilson_interval(successes, trials, level);
  } else {
    p.interval = {0.0, 1.0};
  }
  return p;
}

bool misses(const Snapshot& snap, const std::set<std::int64_t>& f) {
  for (std::int64_t x : f) {
    const auto s = snap.at(x);
    if (!s) throw WindowBreach("site " + std::to_string(x) + " is outside the snapshot");
    if (*s == State::Infected) return false;
  }
  return true;
}

}  // namespace

ProportionEstimate estimate_beta(std::span<const ReplicaSummary> runs, double survival_horizon,
                                 double level) {
  std::int64_t alive = 0;
  for (const ReplicaSummary& r : runs) alive += r.alive_at(survival_horizon) ? 1 : 0;
  return proportion(alive, static_cast<std::int64_t>(runs.size()), level);
}

ThetaEstimate theta_from(std::span<const ReplicaSummary> all_infected, double t) {
  ThetaEstimate est;
  std::vector<double> fractions;
  double left = 0.0;
  double right = 0.0;
  for (const ReplicaSummary& r : all_infected) {
    const Snapshot& snap = r.snapshot_at(t);
    const std::int64_t lo = snap.lo;
    const std::int64_t hi = snap.hi();
    const std::int64_t mid = lo + (hi - lo) / 2;
    double occupied = 0.0;
    double occupied_left = 0.0;
    double occupied_right = 0.0;
    for (std::int64_t x = lo; x <= hi; ++x) {
      if (snap.at(x) != State::Infected) continue;
      occupied += 1.0;
      if (x <= mid) occupied_left += 1.0;
      if (x >= mid) occupied_right += 1.0;
    }
    fractions.push_back(occupied / static_cast<double>(hi - lo + 1));
    left += occupied_left / static_cast<double>(mid - lo + 1);
    right += occupied_right / static_cast<double>(hi - mid + 1);
  }
  est.replicas = static_cast<std::int64_t>(fractions.size());
  if (fractions.empty()) return est;
  const auto m = stats::moments(fractions);
  est.theta_hat = m.mean;
  est.std_error = fractions.size() > 1 ? m.std_error() : 0.0;
  est.left_half = left / static_cast<double>(fractions.size());
  est.right_half = right / static_cast<double>(fractions.size());
  return est;
}

ThetaEstimate estimate_theta(const Construction& c, double t_eval, SiteInterval window,
                             std::int64_t first_replica, std::int64_t replicas, int workers,
                             const WindowPolicy& policy) {
  if (window.lo > window.hi) throw InputError("empty window");
  BatchRequest req;
  req.first_replica = first_replica;
  req.replicas = replicas;
  req.t_max = t_eval;
  req.sample_times = {t_eval};
  req.query = window;
  req.window = policy;
  req.workers = workers;
  const auto runs = run_all_infected_batch(c, req);
  return theta_from(runs, t_eval);
}

DensityReport density_report(std::span<const ReplicaSummary> runs, std::span<const double> times,
                             const EdgeSpeedEstimate& alpha, double theta_hat, double beta_hat,
                             double survival_horizon, double tolerance) {
  DensityReport report;
  report.alpha_hat = alpha.alpha_hat;
  report.theta_hat = theta_hat;
  report.beta_hat = beta_hat;
  report.tolerance = tolerance;
  for (double t : times) {
    if (!(t > 0.0)) throw InputError("density times must be positive");
    DensityEntry e;
    e.t = t;
    e.target = 2.0 * alpha.alpha_hat * theta_hat;
    std::vector<double> ratios;
    std::vector<double> lefts;
    for (const ReplicaSummary& r : runs) {
      if (!proxy_survivor(r, t, survival_horizon)) continue;
      const ProcessState& s = r.sample_at(t);
      ratios.push_back(static_cast<double>(s.infected_count) / t);
      lefts.push_back(static_cast<double>(*s.l) / t);
    }
    e.survivors = static_cast<std::int64_t>(ratios.size());
    if (ratios.size() >= 2) {
      const auto mr = stats::moments(ratios);
      const auto ml = stats::moments(lefts);
      e.mean_ratio = mr.mean;
      e.ratio_stderr = mr.std_error();
      e.relative_error = e.target > 0.0 ? std::abs(mr.mean - e.target) / e.target : INFINITY;
      e.mean_left = ml.mean;
      e.left_stderr = ml.std_error();
      const double joint = std::hypot(e.left_stderr, alpha.std_error);
      e.symmetric = std::abs(e.mean_left + alpha.alpha_hat) <= 2.0 * joint;
      e.status = (e.relative_error <= tolerance && e.symmetric) ? Status::Pass : Status::Fail;
    }
    report.entries.push_back(e);
  }
  report.status = combine_entries(report.entries);
  return report;
}

ConvergenceReport complete_convergence_report(std::span<const ReplicaSummary> standard,
                                              std::span<const ReplicaSummary> all_infected,
                                              const std::vector<std::set<std::int64_t>>& f_sets,
                                              double t_eval, double survival_horizon,
                                              double level) {
  ConvergenceReport report;
  report.t_eval = t_eval;
  report.level = level;
  report.beta = estimate_beta(standard, survival_horizon, level);
  if (standard.empty() || all_infected.empty()) return report;
  for (const auto& f : f_sets) {
    ConvergenceEntry e;
    e.sites = f;
    std::int64_t left_hits = 0;
    for (const ReplicaSummary& r : standard) left_hits += misses(r.snapshot_at(t_eval), f) ? 1 : 0;
    std::int64_t phi_hits = 0;
    for (const ReplicaSummary& r : all_infected) {
      phi_hits += misses(r.snapshot_at(t_eval), f) ? 1 : 0;
    }
    e.left = proportion(left_hits, static_cast<std::int64_t>(standard.size()), level);
    e.phi = proportion(phi_hits, static_cast<std::int64_t>(all_infected.size()), level);
    const double b = report.beta.value;
    e.right = (1.0 - b) + b * e.phi.value;
    // 1 - beta (1 - phi) decreases in beta and increases in phi.
    e.right_interval = {1.0 - report.beta.interval.hi * (1.0 - e.phi.interval.lo),
                        1.0 - report.beta.interval.lo * (1.0 - e.phi.interval.hi)};
    e.overlap = e.left.interval.overlaps(e.right_interval);
    report.entries.push_back(e);
  }
  bool all = !report.entries.empty();
  for (const auto& e : report.entries) all = all && e.overlap;
  report.status = report.entries.empty() ? Status::Inconclusive : (all ? Status::Pass : Status::Fail);
  return report;
}

// ---------------------------------------------------------------------------
// Tails

TailFit tail_fit_survival(std::string variable, std::vector<double> thresholds,
                          std::vector<double> survival, std::int64_t samples, double min_r2) {
  if (thresholds.size() != survival.size()) throw InputError("one survival value per threshold");
  TailFit fit;
  fit.variable = std::move(variable);
  fit.samples = samples;
  fit.min_r2 = min_r2;
  for (std::size_t i = 0; i < thresholds.size(); ++i) {
    if (survival[i] > 0.0) {
      fit.thresholds.push_back(thresholds[i]);
      fit.log_survival.push_back(std::log(survival[i]));
    }
  }
  if (fit.thresholds.size() < 5) {
    throw InsufficientData(fit.variable + ": fewer than five thresholds with positive survival");
  }
  const auto [lo, hi] = std::minmax_element(fit.log_survival.begin(), fit.log_survival.end());
  if (*lo == *hi) throw InsufficientData(fit.variable + ": flat survival, degenerate fit");
  const auto line = stats::least_squares(fit.thresholds, fit.log_survival);
  fit.gamma_hat = -line.slope;
  fit.intercept = line.intercept;
  fit.r2 = line.r2;
  fit.status = (fit.gamma_hat > 0.0 && fit.r2 >= min_r2) ? Status::Pass : Status::Fail;
  return fit;
}

TailFit tail_fit(std::string variable, std::span<const std::optional<double>> samples,
                 std::vector<double> thresholds, double min_r2) {
  std::vector<double> values;
  for (const auto& s : samples) {
    if (s) values.push_back(*s);
  }
  if (values.empty()) throw InsufficientData(variable + ": every sample is censored");
  std::sort(values.begin(), values.end());
  std::sort(thresholds.begin(), thresholds.end());
  std::vector<double> survival;
  const double n = static_cast<double>(samples.size());
  for (double u : thresholds) {
    const auto first = std::lower_bound(values.begin(), values.end(), u);
    survival.push_back(static_cast<double>(values.end() - first) / n);
  }
  TailFit fit = tail_fit_survival(std::move(variable), std::move(thresholds), std::move(survival),
                                  static_cast<std::int64_t>(samples.size()), min_r2);
  fit.censored = static_cast<std::int64_t>(samples.size() - values.size());
  return fit;
}

std::vector<double> tail_thresholds(std::span<const std::optional<double>> samples, int points,
                                    double lo_quantile, double hi_quantile, bool integer) {
  std::vector<double> values;
  for (const auto& s : samples) {
    if (s) values.push_back(*s);
  }
  if (values.empty() || points < 2) return {};
  std::sort(values.begin(), values.end());
  auto quantile = [&](double q) {
    const double pos = q * static_cast<double>(values.size() - 1);
    const auto i = static_cast<std::size_t>(pos);
    const double frac = pos - static_cast<double>(i);
    if (i + 1 >= values.size()) return values.back();
    return values[i] * (1.0 - frac) + values[i + 1] * frac;
  };
  const double lo = quantile(lo_quantile);
  const double hi = quantile(hi_quantile);
  std::vector<double> out;
  for (int k = 0; k < points; ++k) {
    double u = lo + (hi - lo) * k / (points - 1);
    if (integer) u = std::round(u);
    if (out.empty() || u > out.back()) out.push_back(u);
  }
  return out;
}

namespace {

std::int64_t edge_at(const std::vector<EdgePoint>& edge, double t) {
  auto it = std::upper_bound(edge.begin(), edge.end(), t,
                             [](double v, const EdgePoint& e) { return v < e.time; });
  if (it == edge.begin()) throw InputError("time before the start of the edge path");
  return std::prev(it)->r;
}

}  // namespace

std::vector<double> half_line_lower_deviations(std::span<const BreakpointRun> runs, double slope,
                                               std::span<const double> times) {
  std::vector<double> out;
  for (double t : times) {
    std::int64_t below = 0;
    for (const BreakpointRun& run : runs) {
      if (t > run.horizon) throw InputError("deviation time beyond the run horizon");
      below += static_cast<double>(edge_at(run.half_line_edge, t)) < slope * t ? 1 : 0;
    }
    out.push_back(runs.empty() ? 0.0 : static_cast<double>(below) / static_cast<double>(runs.size()));
  }
  return out;
}

TailFit half_line_deviation_fit(std::span<const BreakpointRun> runs, double slope, double t_lo,
                                int points, std::int64_t min_count, double min_r2) {
  if (runs.empty()) throw InsufficientData("no runs for the deviation fit");
  if (!(t_lo > 0.0) || points < 2) throw InputError("bad deviation grid");
  double horizon = runs.front().horizon;
  for (const BreakpointRun& run : runs) horizon = std::min(horizon, run.horizon);
  std::vector<double> scan;
  for (double t = t_lo; t <= horizon; t += t_lo) scan.push_back(t);
  const auto fractions = half_line_lower_deviations(runs, slope, scan);
  const double floor = static_cast<double>(min_count) / static_cast<double>(runs.size());
  double t_hi = t_lo;
  for (std::size_t i = 0; i < scan.size(); ++i) {
    if (fractions[i] >= floor) t_hi = scan[i];
  }
  std::vector<double> times;
  for (int k = 0; k < points; ++k) times.push_back(t_lo + (t_hi - t_lo) * k / (points - 1));
  times.erase(std::unique(times.begin(), times.end()), times.end());
  return tail_fit_survival("half-line lower deviation", times,
                           half_line_lower_deviations(runs, slope, times),
                           static_cast<std::int64_t>(runs.size()), min_r2);
}

// ---------------------------------------------------------------------------
// i.i.d. increments

namespace {

double coordinate(const Increment& i, int c) {
  switch (c) {
    case 0: return static_cast<double>(i.x);
    case 1: return i.psi;
    default: return static_cast<double>(i.m_prev);
  }
}

constexpr const char* kCoordinateNames[] = {"X", "Psi", "M"};

}  // namespace

IidReport iid_report(std::span<const IncrementSeries> series, double level) {
  IidReport report;
  report.level = level;
  report.per_test_level = level / 9.0;
  report.replicas = static_cast<std::int64_t>(series.size());
  for (const auto& s : series) report.total_increments += static_cast<std::int64_t>(s.increments.size());
  if (report.total_increments < kMinIidIncrements ||
      report.total_increments < 2 * report.replicas) {
    return report;
  }

  const double z = stats::normal_quantile(1.0 - report.per_test_level / 2.0);
  bool any_reject = false;
  bool inconclusive = false;
  for (int c = 0; c < 3; ++c) {
    std::vector<double> all;
    std::vector<double> first;
    std::vector<double> rest;
    std::vector<double> early;
    std::vector<double> late;
    for (const auto& s : series) {
      const std::size_t half = s.increments.size() / 2;
      for (std::size_t i = 0; i < s.increments.size(); ++i) {
        const Increment& inc = s.increments[i];
        const double v = coordinate(inc, c);
        all.push_back(v);
        (inc.n == 1 ? first : rest).push_back(v);
        (i < half ? early : late).push_back(v);
      }
    }
    const double mean = stats::moments(all).mean;
    double sab = 0.0;
    double saa = 0.0;
    double sbb = 0.0;
    std::int64_t pairs = 0;
    for (const auto& s : series) {
      for (std::size_t i = 1; i < s.increments.size(); ++i) {
        const double a = coordinate(s.increments[i - 1], c) - mean;
        const double b = coordinate(s.increments[i], c) - mean;
        sab += a * b;
        saa += a * a;
        sbb += b * b;
        ++pairs;
      }
    }
    const std::string name = kCoordinateNames[c];
    if (pairs < 3 || saa <= 0.0 || sbb <= 0.0 || first.empty() || rest.empty() || early.empty() ||
        late.empty()) {
      inconclusive = true;
      continue;
    }
    const double rho = sab / std::sqrt(saa * sbb);
    const double se = 1.0 / std::sqrt(static_cast<double>(pairs));
    report.lag1_correlations.push_back(rho);
    report.lag1_intervals.push_back({rho - z * se, rho + z * se});
    const double p_lag = 2.0 * (1.0 - stats::normal_cdf(std::abs(rho) / se));
    report.tests.push_back({name, "lag1", rho, p_lag, p_lag < report.per_test_level});

    const auto ks_first = stats::ks_two_sample(first, rest);
    report.first_vs_rest_ks.push_back(ks_first.statistic);
    report.tests.push_back({name, "first_vs_rest", ks_first.statistic, ks_first.p_value,
                            ks_first.rejects(report.per_test_level)});
    const auto ks_halves = stats::ks_two_sample(early, late);
    report.halves_ks.push_back(ks_halves.statistic);
    report.tests.push_back({name, "halves", ks_halves.statistic, ks_halves.p_value,
                            ks_halves.rejects(report.per_test_level)});
  }
  for (const IidTest& t : report.tests) any_reject = any_reject || t.rejects;
  report.status = any_reject ? Status::Fail : (inconclusive ? Status::Inconclusive : Status::Pass);
  return report;
}

}  // namespace tscp
