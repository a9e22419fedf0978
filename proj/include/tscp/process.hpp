#pragma once

// Event-driven evolution of the three-state contact process (and the plain
// contact process) over a shared graphical construction.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <set>
#include <span>
#include <vector>

#include "tscp/configuration.hpp"
#include "tscp/events.hpp"

namespace tscp {

enum class Dynamics : std::uint8_t {
  /// lambda-arrows infect states -1 and 0, (mu - lambda)-arrows only state 0.
  ThreeState,
  /// Both arrow types infect any non-infected target.
  Contact,
};

/// New state of the arrow target (or, for a recovery, of the marked site).
constexpr State transition(State source, State target, EventKind kind, Dynamics d) {
  if (kind == EventKind::Recovery) {
    return source == State::Infected ? State::Recovered : source;
  }
  if (source != State::Infected || target == State::Infected) return target;
  if (d == Dynamics::Contact || is_lambda_arrow(kind) || target == State::Recovered) {
    return State::Infected;
  }
  return target;
}

/// Applies one event of the graphical construction to a configuration.
Configuration apply_event(const Configuration& config, const Event& event,
                          Dynamics dynamics = Dynamics::ThreeState);

struct SiteInterval {
  std::int64_t lo = 0;
  std::int64_t hi = 0;
  friend bool operator==(const SiteInterval&, const SiteInterval&) = default;
};

/// How far to simulate beyond an infinite infected side. Sites further out
/// are dropped; a frontier tracks every site the dropped part could have
/// influenced through realized arrows.
struct WindowPolicy {
  /// Extra sites on each infinite side; unset means default_window_width().
  std::optional<std::int64_t> width;
  bool expandable = true;
  double growth = 2.0;
  int max_expansions = 6;

  static WindowPolicy fixed(std::int64_t width) {
    WindowPolicy p;
    p.width = width;
    p.expandable = false;
    return p;
  }
};

/// Default width for a run of the given duration: the influence frontier
/// moves like a rate-mu Poisson process, so mean plus six standard
/// deviations plus a constant margin.
std::int64_t default_window_width(double mu, double duration);

struct ProcessState {
  double time = 0.0;
  /// Rightmost / leftmost infected site; none when the set is empty or the
  /// corresponding side is infinitely infected.
  std::optional<std::int64_t> r;
  std::optional<std::int64_t> l;
  /// Infected sites in the certified region.
  std::int64_t infected_count = 0;

  friend bool operator==(const ProcessState&, const ProcessState&) = default;
};

/// States on a finite stretch of sites at one instant.
struct Snapshot {
  double time = 0.0;
  std::int64_t lo = 0;
  std::vector<State> states;
  /// State of every site beyond the stored stretch, when certified.
  std::optional<State> left_outside;
  std::optional<State> right_outside;

  std::int64_t hi() const { return lo + static_cast<std::int64_t>(states.size()) - 1; }
  /// None when x lies outside the certified region.
  std::optional<State> at(std::int64_t x) const;
  std::set<std::int64_t> infected_in(std::int64_t a, std::int64_t b) const;
};

struct EvolveRequest {
  std::int64_t replica_id = 0;
  Configuration initial = Configuration::standard();
  double start_time = 0.0;
  double t_max = 0.0;
  /// Nondecreasing times in [start_time, t_max].
  std::vector<double> sample_times;
  /// Sites that must be certified at every sample time; also the snapshot
  /// region. Without it snapshots cover the simulated certified stretch.
  std::optional<SiteInterval> query;
  bool snapshots = true;
  bool record_edges = true;
  WindowPolicy window;
  Dynamics dynamics = Dynamics::ThreeState;
};

struct Trajectory {
  Construction construction;
  std::int64_t replica_id = 0;
  Configuration initial;
  double start_time = 0.0;
  double t_max = 0.0;
  Dynamics dynamics = Dynamics::ThreeState;

  /// One entry per requested sample time.
  std::vector<ProcessState> samples;
  /// Parallel to `samples` when snapshots were requested.
  std::vector<Snapshot> snapshots;
  /// The initial state followed by a record at every change of r or l.
  std::vector<ProcessState> edges;
  ProcessState final_state;
  /// First time the infected set is empty; unset means alive at t_max
  /// (censored, not "survives").
  std::optional<double> died_at;

  std::int64_t arrow_events = 0;
  std::int64_t events_applied = 0;
  /// Simulated width beyond infinite sides (0 when none were needed).
  std::int64_t window_width = 0;
  int expansions = 0;

  bool alive_at(double t) const { return !died_at || t < *died_at; }
  /// Edge record in force at time t (right-continuous).
  const ProcessState& edge_state_at(double t) const;
};

Trajectory evolve(const Construction& construction, const EvolveRequest& request);

Trajectory evolve(const Construction& construction, std::int64_t replica_id,
                  const Configuration& initial, double start_time, double t_max,
                  std::vector<double> sample_times, WindowPolicy policy = {});

/// Initial set for the plain contact process: a finite set or all of Z.
struct ContactStart {
  bool everything = false;
  std::set<std::int64_t> sites;

  static ContactStart all() { return {true, {}}; }
  static ContactStart of(std::set<std::int64_t> s) { return {false, std::move(s)}; }
  Configuration configuration() const;
};

/// Contact process with parameter mu; -1 and 0 are not distinguished.
Trajectory contact_evolve(const Construction& construction, EvolveRequest request);

Trajectory contact_evolve(const Construction& construction, std::int64_t replica_id,
                          const ContactStart& start, double start_time, double t_max,
                          std::vector<double> sample_times, WindowPolicy policy = {},
                          std::optional<SiteInterval> query = std::nullopt);

/// CSV with columns replica,t,r,l,infected_count,died; sample rows and edge
/// rows merged by time. With `snapshots`, sample rows carry a run-length
/// encoded configuration in an extra column.
void write_trajectory_csv(std::ostream& out, std::span<const Trajectory> trajectories,
                          bool snapshots = false);

}  // namespace tscp
