#include "tscp/breakpoints.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

#include "tscp/errors.hpp"
#include "tscp/replicas.hpp"

namespace tscp {

std::vector<std::pair<std::int64_t, double>> hitting_times(const Trajectory& trajectory,
                                                           std::int64_t k_max) {
  std::vector<std::pair<std::int64_t, double>> out;
  std::int64_t next = 0;
  bool started = false;
  for (const ProcessState& e : trajectory.edges) {
    if (!e.r) continue;
    if (!started) {
      next = std::max<std::int64_t>(0, *e.r);
      started = true;
    }
    while (next <= *e.r && next <= k_max) {
      out.emplace_back(next, e.time);
      ++next;
    }
    if (next > k_max) break;
  }
  return out;
}

namespace {

// r of the half-line process as a step function, with the index of the
// first record at each level.
struct EdgePath {
  std::vector<EdgePoint> points;
  std::vector<std::size_t> first_at;  // first_at[k] indexes points, k >= 0

  std::optional<std::size_t> hit(std::int64_t k) const {
    if (k < 0 || k >= static_cast<std::int64_t>(first_at.size())) return std::nullopt;
    return first_at[static_cast<std::size_t>(k)];
  }
};

EdgePath edge_path(const Trajectory& t) {
  EdgePath path;
  for (const ProcessState& e : t.edges) {
    if (!e.r) throw EngineViolation("half-line process lost its rightmost site");
    if (!path.points.empty() && path.points.back().r == *e.r) continue;
    path.points.push_back({e.time, *e.r});
    const std::int64_t r = *e.r;
    while (r >= static_cast<std::int64_t>(path.first_at.size())) {
      path.first_at.push_back(path.points.size() - 1);
    }
  }
  return path;
}

std::string describe(std::int64_t replica, const RestartRecord& rec, double t, std::int64_t a,
                      std::int64_t b) {
  std::ostringstream os;
  os << "restart mismatch: replica " << replica << " restart " << rec.n << " at Y=" << rec.y
     << " t=" << t << " restarted r=" << a << " half-line r=" << b;
  return os.str();
}

// Checks r(zeta^n) == r(half line) on [from, until) (or through `until`
// when `inclusive`), and returns the maximum of the half-line r there.
std::int64_t compare_edges(const EdgePath& path, std::size_t from, const Trajectory& restart,
                           double until, bool inclusive, std::int64_t replica,
                           const RestartRecord& rec) {
  auto in_range = [&](double t) { return inclusive ? t <= until : t < until; };
  std::int64_t max_r = path.points[from].r;
  std::size_t i = from;
  std::size_t j = 0;
  const auto& re = restart.edges;
  // Current values; both start at Y at time T_Y.
  std::int64_t a = rec.y;
  std::int64_t b = path.points[from].r;
  double t = path.points[from].time;
  ++i;
  while (j < re.size() && re[j].time <= t) {
    if (re[j].r) a = *re[j].r;
    ++j;
  }
  for (;;) {
    if (a != b) throw EngineViolation(describe(replica, rec, t, a, b));
    const double ti = i < path.points.size() ? path.points[i].time : INFINITY;
    const double tj = j < re.size() ? re[j].time : INFINITY;
    t = std::min(ti, tj);
    if (!in_range(t)) break;
    while (i < path.points.size() && path.points[i].time == t) b = path.points[i++].r;
    while (j < re.size() && re[j].time == t) {
      // At the death time the record has no r; that instant is out of range.
      if (re[j].r) a = *re[j].r;
      ++j;
    }
    max_r = std::max(max_r, b);
  }
  return max_r;
}

BreakpointRun search(const Construction& construction, std::int64_t replica_id,
                     const BreakpointOptions& options) {
  BreakpointRun run;
  run.replica_id = replica_id;
  run.horizon = options.horizon;
  run.survival_horizon = options.survival_horizon;

  EvolveRequest half;
  half.replica_id = replica_id;
  half.initial = Configuration::left_half_line();
  half.t_max = options.horizon;
  half.snapshots = false;
  half.window = options.window;
  const Trajectory half_line = evolve(construction, half);
  const EdgePath path = edge_path(half_line);
  run.half_line_edge = path.points;

  EvolveRequest origin;
  origin.replica_id = replica_id;
  origin.t_max = options.survival_horizon;
  origin.snapshots = false;
  origin.record_edges = false;
  run.origin_survives = !evolve(construction, origin).died_at.has_value();

  run.breakpoints.push_back({0, 0, 0.0, false});
  std::int64_t y = 1;
  std::int64_t restart_index = 0;
  while (static_cast<std::int64_t>(run.breakpoints.size()) - 1 < options.max_points) {
    const auto hit = path.hit(y);
    const double start = hit ? path.points[*hit].time : INFINITY;
    if (!hit || start + options.survival_horizon > options.horizon) {
      run.dropped = 1;
      break;
    }
    RestartRecord rec;
    rec.n = ++restart_index;
    rec.y = y;
    rec.hit_time = start;

    EvolveRequest req;
    req.replica_id = replica_id;
    req.initial = Configuration::single_site(y);
    req.start_time = start;
    req.t_max = start + options.survival_horizon;
    req.snapshots = false;
    const Trajectory restart = evolve(construction, req);
    rec.rho = restart.died_at;
    const double until = rec.rho ? *rec.rho : req.t_max;
    rec.max_r = compare_edges(path, *hit, restart, until, !rec.rho, replica_id, rec);
    run.restarts.push_back(rec);

    if (rec.rho) {
      y = rec.max_r + 1;
      continue;
    }
    // Declared break point.
    const BreakPointRecord& prev = run.breakpoints.back();
    BreakPointRecord bp{static_cast<std::int64_t>(run.breakpoints.size()), y, start, true};
    std::int64_t min_r = prev.k;
    {
      const std::size_t from = *path.hit(prev.k);
      for (std::size_t i = from; i < path.points.size() && path.points[i].time < bp.tau; ++i) {
        min_r = std::min(min_r, path.points[i].r);
      }
    }
    run.increments.push_back({bp.n, bp.k - prev.k, bp.tau - prev.tau, prev.k - min_r});
    run.breakpoints.push_back(bp);
    restart_index = 0;
    y = bp.k + 1;
  }
  return run;
}

}  // namespace

BreakpointRun detect_breakpoints(const Construction& construction, std::int64_t replica_id,
                                 const BreakpointOptions& options) {
  construction.validate();
  if (!(options.horizon > 0.0)) throw InputError("horizon must be positive");
  if (!(options.survival_horizon > 0.0)) throw InputError("survival horizon must be positive");
  if (options.survival_horizon > options.horizon) {
    throw InputError("survival horizon exceeds the horizon");
  }
  if (options.max_points < 0) throw InputError("max_points must be nonnegative");
  if (options.horizon_extensions < 0) throw InputError("horizon_extensions must be nonnegative");

  BreakpointOptions o = options;
  for (int extension = 0;; ++extension) {
    BreakpointRun run = search(construction, replica_id, o);
    run.extensions = extension;
    const bool complete = static_cast<std::int64_t>(run.increments.size()) >= o.max_points;
    if (complete || extension == options.horizon_extensions) return run;
    o.horizon *= 2.0;
  }
}

std::vector<BreakpointRun> run_breakpoint_batch(const Construction& construction,
                                                std::int64_t first_replica, std::int64_t count,
                                                const BreakpointOptions& options, int workers) {
  if (count < 0) throw InputError("replica count must be nonnegative");
  return map_replicas(first_replica, count, workers, [&](std::int64_t replica) {
    return detect_breakpoints(construction, replica, options);
  });
}

std::vector<Increment> regeneration_increments(const BreakpointRun& run) {
  std::vector<Increment> out;
  for (const Increment& inc : run.increments) {
    if (inc.n >= 2 || run.origin_survives) out.push_back(inc);
  }
  return out;
}

void write_breakpoints_csv(std::ostream& out, std::span<const BreakpointRun> runs) {
  out.precision(12);
  out << "replica,n,K_n,tau_Kn,X_n,Psi_n,M_prev,censored,origin_survives\n";
  for (const BreakpointRun& run : runs) {
    for (const BreakPointRecord& bp : run.breakpoints) {
      out << run.replica_id << ',' << bp.n << ',' << bp.k << ',' << bp.tau << ',';
      if (bp.n > 0) {
        const Increment& inc = run.increments[static_cast<std::size_t>(bp.n - 1)];
        out << inc.x << ',' << inc.psi << ',' << inc.m_prev;
      } else {
        out << ",,";
      }
      out << ',' << (bp.censored ? 1 : 0) << ',' << (run.origin_survives ? 1 : 0) << '\n';
    }
  }
}

}  // namespace tscp
