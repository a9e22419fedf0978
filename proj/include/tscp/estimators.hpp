#pragma once

// Point estimates, confidence intervals and distributional tests for the
// edge speed, the edge fluctuations, the density of the infected set,
// complete convergence, exponential tails and i.i.d. increments.

#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "tscp/breakpoints.hpp"
#include "tscp/events.hpp"
#include "tscp/process.hpp"
#include "tscp/stats.hpp"

namespace tscp {

enum class Status : std::uint8_t { Pass, Fail, Inconclusive };

struct IncrementSeries {
  std::int64_t replica_id = 0;
  std::vector<Increment> increments;
};
const char* to_string(Status s);

// ---------------------------------------------------------------------------
// Replica batches

/// What is kept of one replica: edges at sample times, death time, the
/// largest rightmost site, and snapshots of an optional query region.
struct ReplicaSummary {
  std::int64_t replica_id = 0;
  std::optional<double> died_at;
  std::int64_t max_r = 0;
  std::vector<ProcessState> samples;
  std::vector<Snapshot> snapshots;

  const ProcessState& sample_at(double t) const;
  const Snapshot& snapshot_at(double t) const;
  bool alive_at(double t) const { return !died_at || t < *died_at; }
};

struct BatchRequest {
  std::int64_t first_replica = 0;
  std::int64_t replicas = 0;
  double t_max = 0.0;
  std::vector<double> sample_times;
  /// Snapshots are kept only when a query is given.
  std::optional<SiteInterval> query;
  /// Only used by runs with an infinite infected side.
  WindowPolicy window;
  int workers = 1;
};

/// Replicas of the process from the standard configuration.
std::vector<ReplicaSummary> run_standard_batch(const Construction& c, const BatchRequest& req);
/// Replicas of the contact process from all of Z; requires a query.
std::vector<ReplicaSummary> run_all_infected_batch(const Construction& c, const BatchRequest& req);

/// Proxy survival of a standard replica as seen at time t: alive at
/// max(t, survival_horizon).
bool proxy_survivor(const ReplicaSummary& r, double t, double survival_horizon);

// ---------------------------------------------------------------------------
// Regeneration increments

/// A fixed number of regeneration increments per replica. Replicas that did
/// not complete them are dropped whole: keeping whatever fits in a fixed
/// window favours short cycles and biases ratio estimates. Dropping is
/// itself a selection, so runs should be searched with horizon extensions
/// (BreakpointOptions::horizon_extensions) until it is rare.
struct RegenerationSample {
  std::int64_t per_replica = 0;
  std::vector<IncrementSeries> series;
  std::int64_t incomplete_replicas = 0;

  std::vector<Increment> pooled() const;
};

/// Uses increments n = 2 .. per_replica + 1, plus n = 1 when the origin
/// survives. per_replica = 0 keeps every regeneration increment (no cap).
RegenerationSample regeneration_sample(std::span<const BreakpointRun> runs,
                                       std::int64_t per_replica);

// ---------------------------------------------------------------------------
// Edge speed and fluctuations

struct EdgeSpeedEstimate {
  double alpha_hat = 0.0;
  double std_error = 0.0;
  std::int64_t n_increments = 0;
};

/// Ratio of means with a delta-method standard error. Throws
/// InsufficientData for fewer than two increments.
EdgeSpeedEstimate estimate_alpha(std::span<const Increment> increments);

/// mean[(X - alpha Psi)^2] / mean(Psi); 0 for a degenerate sample.
double estimate_sigma2(std::span<const Increment> increments, double alpha_hat);

struct DirectSlope {
  double t = 0.0;
  double mean = 0.0;
  double std_error = 0.0;
  std::int64_t survivors = 0;
};

/// mean(r_t / t) over proxy survivors.
DirectSlope direct_slope(std::span<const ReplicaSummary> runs, double t, double survival_horizon);

/// mean(tau_k / k)^-1 style estimate from first hitting times of level k
/// by the half-line edge: returns k / mean(tau_k) with a delta-method error.
DirectSlope hitting_time_speed(std::span<const BreakpointRun> runs, std::int64_t k);

struct CltEntry {
  double t = 0.0;
  std::int64_t survivors = 0;
  double ks_statistic = 0.0;
  double p_value = 1.0;
  double critical_value = 0.0;
  Status status = Status::Inconclusive;
};

struct CltReport {
  double alpha_hat = 0.0;
  double sigma2_hat = 0.0;
  double level = 0.01;
  /// level / number of times (the family-wise level is `level`).
  double per_test_level = 0.01;
  std::vector<CltEntry> entries;
  Status status = Status::Inconclusive;
};

inline constexpr std::int64_t kMinCltSurvivors = 100;

/// Core test: for each time t, KS of (r - alpha t) / sqrt(t sigma2)
/// against the standard normal. Throws InputError when sigma2 <= 0.
CltReport clt_from_samples(std::span<const double> times,
                           std::span<const std::vector<double>> edge_samples, double alpha_hat,
                           double sigma2_hat, double level);

CltReport clt_report(std::span<const ReplicaSummary> runs, std::span<const double> times,
                     double alpha_hat, double sigma2_hat, double survival_horizon, double level);

// ---------------------------------------------------------------------------
// Density, survival and complete convergence

struct ProportionEstimate {
  double value = 0.0;
  std::int64_t successes = 0;
  std::int64_t trials = 0;
  stats::Interval interval;
};

/// Fraction of standard replicas alive at the survival horizon.
ProportionEstimate estimate_beta(std::span<const ReplicaSummary> runs, double survival_horizon,
                                 double level = 0.01);

struct ThetaEstimate {
  double theta_hat = 0.0;
  double std_error = 0.0;
  std::int64_t replicas = 0;
  double left_half = 0.0;
  double right_half = 0.0;
};

/// Mean occupancy of the snapshot region at time t over all-infected runs.
ThetaEstimate theta_from(std::span<const ReplicaSummary> all_infected, double t);

ThetaEstimate estimate_theta(const Construction& c, double t_eval, SiteInterval window,
                             std::int64_t first_replica, std::int64_t replicas, int workers = 1,
                             const WindowPolicy& policy = {});

struct DensityEntry {
  double t = 0.0;
  std::int64_t survivors = 0;
  double mean_ratio = 0.0;  // mean |I_t| / t
  double ratio_stderr = 0.0;
  double target = 0.0;      // 2 alpha theta
  double relative_error = 0.0;
  double mean_left = 0.0;   // mean l_t / t
  double left_stderr = 0.0;
  bool symmetric = false;
  Status status = Status::Inconclusive;
};

struct DensityReport {
  double alpha_hat = 0.0;
  double theta_hat = 0.0;
  double beta_hat = 0.0;
  double tolerance = 0.07;
  std::vector<DensityEntry> entries;
  Status status = Status::Inconclusive;
};

/// Pass per time: relative error within tolerance and mean l_t/t within two
/// joint standard errors of -alpha.
DensityReport density_report(std::span<const ReplicaSummary> runs, std::span<const double> times,
                             const EdgeSpeedEstimate& alpha, double theta_hat, double beta_hat,
                             double survival_horizon, double tolerance = 0.07);

struct ConvergenceEntry {
  std::set<std::int64_t> sites;
  ProportionEstimate left;   // P(I_t and F disjoint)
  ProportionEstimate phi;    // P(all-infected contact process misses F)
  double right = 0.0;        // (1 - beta) + beta phi
  stats::Interval right_interval;
  bool overlap = false;
};

struct ConvergenceReport {
  double t_eval = 0.0;
  double level = 0.01;
  ProportionEstimate beta;
  std::vector<ConvergenceEntry> entries;
  Status status = Status::Inconclusive;
};

/// Both batches need snapshots at t_eval covering every F.
ConvergenceReport complete_convergence_report(std::span<const ReplicaSummary> standard,
                                              std::span<const ReplicaSummary> all_infected,
                                              const std::vector<std::set<std::int64_t>>& f_sets,
                                              double t_eval, double survival_horizon,
                                              double level = 0.01);

// ---------------------------------------------------------------------------
// Tails

struct TailFit {
  std::string variable;
  std::vector<double> thresholds;
  std::vector<double> log_survival;
  double gamma_hat = 0.0;
  /// log survival ~ intercept - gamma_hat * u.
  double intercept = 0.0;
  double r2 = 0.0;
  std::int64_t samples = 0;
  std::int64_t censored = 0;
  double min_r2 = 0.9;
  Status status = Status::Inconclusive;
};

/// Least squares of log empirical survival against the thresholds. A
/// censored sample (nullopt) counts in the denominator only. Thresholds with
/// zero survival are skipped; fewer than five usable points, all-censored
/// input or a flat fit throw InsufficientData.
TailFit tail_fit(std::string variable, std::span<const std::optional<double>> samples,
                 std::vector<double> thresholds, double min_r2 = 0.9);

/// Fit from already computed survival fractions (zero entries skipped).
TailFit tail_fit_survival(std::string variable, std::vector<double> thresholds,
                          std::vector<double> survival, std::int64_t samples,
                          double min_r2 = 0.9);

/// Evenly spaced thresholds between two quantiles of the uncensored
/// samples; rounded and deduplicated for integer data.
std::vector<double> tail_thresholds(std::span<const std::optional<double>> samples,
                                    int points = 8, double lo_quantile = 0.5,
                                    double hi_quantile = 0.99, bool integer = false);

/// Fraction of runs whose half-line edge satisfies r(t) < slope * t, one
/// entry per time.
std::vector<double> half_line_lower_deviations(std::span<const BreakpointRun> runs, double slope,
                                               std::span<const double> times);

/// Log-linear fit of P(r(t) < slope * t) for the half-line edge. The times
/// are evenly spaced from t_lo up to the last multiple of t_lo (at most the
/// run horizon) where at least `min_count` runs still deviate.
TailFit half_line_deviation_fit(std::span<const BreakpointRun> runs, double slope, double t_lo,
                                int points = 8, std::int64_t min_count = 10,
                                double min_r2 = 0.9);

// ---------------------------------------------------------------------------
// i.i.d. increments

struct IidTest {
  std::string coordinate;  // X, Psi or M
  std::string test;        // lag1, first_vs_rest, halves
  double statistic = 0.0;
  double p_value = 1.0;
  bool rejects = false;
};

struct IidReport {
  double level = 0.01;
  double per_test_level = 0.01;
  std::int64_t total_increments = 0;
  std::int64_t replicas = 0;
  std::vector<double> lag1_correlations;  // X, Psi, M
  std::vector<stats::Interval> lag1_intervals;
  std::vector<double> first_vs_rest_ks;
  std::vector<double> halves_ks;
  std::vector<IidTest> tests;
  Status status = Status::Inconclusive;
};

inline constexpr std::int64_t kMinIidIncrements = 500;

/// Nine tests (three coordinates by lag-1 correlation, first-vs-rest KS and
/// first-half-vs-second-half KS), each at level / 9.
IidReport iid_report(std::span<const IncrementSeries> series, double level = 0.01);

}  // namespace tscp
