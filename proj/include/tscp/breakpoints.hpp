#pragma once

// Break points of the rightmost infected site: the restart search on the
// half-line process, with a finite survival horizon standing in for
// survival.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "tscp/events.hpp"
#include "tscp/process.hpp"

namespace tscp {

/// One launch of the restart search: a single infected site at Y, started
/// when the half-line edge first hits Y.
struct RestartRecord {
  std::int64_t n = 0;
  std::int64_t y = 0;
  double hit_time = 0.0;
  /// Death time of the restarted process; unset when it was still alive at
  /// hit_time + survival_horizon.
  std::optional<double> rho;
  /// Largest rightmost site of the restarted process during its life.
  std::int64_t max_r = 0;
};

struct BreakPointRecord {
  std::int64_t n = 0;
  std::int64_t k = 0;
  double tau = 0.0;
  /// Survival was declared by the horizon proxy (true for every n >= 1).
  bool censored = false;
};

/// Increment between break points n-1 and n.
struct Increment {
  std::int64_t n = 0;
  std::int64_t x = 0;        // K_n - K_{n-1}
  double psi = 0.0;          // tau_{K_n} - tau_{K_{n-1}}
  std::int64_t m_prev = 0;   // K_{n-1} - min of r over [tau_{K_{n-1}}, tau_{K_n})
};

struct EdgePoint {
  double time = 0.0;
  std::int64_t r = 0;
};

struct BreakpointRun {
  std::int64_t replica_id = 0;
  double horizon = 0.0;
  double survival_horizon = 0.0;
  std::vector<RestartRecord> restarts;
  /// Starts with (K_0, tau_0) = (0, 0).
  std::vector<BreakPointRecord> breakpoints;
  std::vector<Increment> increments;
  /// Horizon doublings used (see BreakpointOptions::horizon_extensions).
  int extensions = 0;
  /// Increments cut off by the horizon (0 or 1: the search in progress).
  std::int64_t dropped = 0;
  /// The process from the standard configuration is alive at the survival
  /// horizon. Only then does the first increment follow the regeneration
  /// law; later increments do regardless.
  bool origin_survives = false;
  /// Rightmost site of the half-line process at every change.
  std::vector<EdgePoint> half_line_edge;
};

/// (k, tau_k) for every k in [max(0, r_start), k_max] the trajectory's
/// rightmost site reaches; tau_k is the first time r equals k.
std::vector<std::pair<std::int64_t, double>> hitting_times(const Trajectory& trajectory,
                                                           std::int64_t k_max);

struct BreakpointOptions {
  double horizon = 600.0;
  double survival_horizon = 150.0;
  std::int64_t max_points = 1'000'000;
  /// When the search reaches the horizon before max_points break points, it
  /// is rerun with the horizon doubled, at most this many times. The
  /// construction is fixed, so a rerun extends the shorter run unchanged.
  /// Without it, requiring a fixed number of increments keeps only replicas
  /// with short cycles.
  int horizon_extensions = 0;
  WindowPolicy window;
};

/// Runs the half-line process on the construction and executes the restart
/// search. Throws EngineViolation if a restarted process and the half-line
/// process disagree on the rightmost site while the former is alive.
BreakpointRun detect_breakpoints(const Construction& construction, std::int64_t replica_id,
                                 const BreakpointOptions& options);

/// detect_breakpoints for replicas first .. first + count - 1.
std::vector<BreakpointRun> run_breakpoint_batch(const Construction& construction,
                                                std::int64_t first_replica, std::int64_t count,
                                                const BreakpointOptions& options, int workers = 1);

/// Increments with the regeneration law: all of them when the origin
/// survives, otherwise those with n >= 2.
std::vector<Increment> regeneration_increments(const BreakpointRun& run);

/// CSV with columns replica,n,K_n,tau_Kn,X_n,Psi_n,M_prev,censored,
/// origin_survives; the
/// n = 0 row leaves the increment columns empty.
void write_breakpoints_csv(std::ostream& out, std::span<const BreakpointRun> runs);

}  // namespace tscp
