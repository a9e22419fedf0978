#include "tscp/couplings.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "tscp/breakpoints.hpp"
#include "tscp/errors.hpp"
#include "tscp/replicas.hpp"

namespace tscp {

const char* to_string(CouplingKind kind) {
  switch (kind) {
    case CouplingKind::Monotone: return "Monotone";
    case CouplingKind::RightmostIdentity: return "RightmostIdentity";
    case CouplingKind::Sandwich: return "Sandwich";
    case CouplingKind::RestartDomination: return "RestartDomination";
  }
  return "?";
}

CouplingKind coupling_kind_from_string(const std::string& name) {
  for (CouplingKind k : kAllCouplingKinds) {
    if (name == to_string(k)) return k;
  }
  throw InputError("unknown coupling kind: " + name);
}

std::pair<Configuration, Configuration> random_comparable_pair(std::uint64_t seed,
                                                               std::int64_t replica,
                                                               std::int64_t radius) {
  const std::uint64_t key = detail::stream_key(seed ^ 0x6d6f6e6f746f6e65ULL, replica, 0);
  Configuration lower(State::NeverInfected, State::NeverInfected, 0);
  Configuration upper = lower;
  std::uint64_t counter = 0;
  auto draw = [&] { return detail::mix64(key + (++counter) * 0x9e3779b97f4a7c15ULL) % 3; };
  for (std::int64_t x = -radius; x <= radius; ++x) {
    const int a = static_cast<int>(draw()) - 1;
    const int b = static_cast<int>(draw()) - 1;
    lower.set(x, state_from_int(std::min(a, b)));
    upper.set(x, state_from_int(std::max(a, b)));
  }
  // Keep the lower configuration alive at time 0.
  lower.set(0, State::Infected);
  upper.set(0, State::Infected);
  return {lower, upper};
}

namespace {

constexpr std::size_t kMaxViolationsPerReplica = 20;

struct ReplicaOutcome {
  std::int64_t times_checked = 0;
  std::vector<Violation> violations;

  void add(std::int64_t replica, double t, std::int64_t site, std::string detail) {
    if (violations.size() < kMaxViolationsPerReplica) {
      violations.push_back({replica, t, site, std::move(detail)});
    }
  }
};

std::string pair_detail(const char* relation, std::optional<State> a, std::optional<State> b) {
  std::ostringstream os;
  os << relation << " failed: " << (a ? value(*a) : 9) << " vs " << (b ? value(*b) : 9);
  return os.str();
}

// Checks lower(x) <= upper(x) on every site certified in both snapshots.
void check_order(const Snapshot& lower, const Snapshot& upper, std::int64_t replica,
                 ReplicaOutcome& out) {
  const std::int64_t lo = std::min(lower.lo, upper.lo) - 1;
  const std::int64_t hi = std::max(lower.hi(), upper.hi()) + 1;
  for (std::int64_t x = lo; x <= hi; ++x) {
    const auto a = lower.at(x);
    const auto b = upper.at(x);
    if (a && b && value(*a) > value(*b)) out.add(replica, lower.time, x, pair_detail("order", a, b));
  }
}

std::vector<double> grid_for(const CouplingOptions& o) {
  if (!o.sample_grid.empty()) {
    std::vector<double> g = o.sample_grid;
    std::sort(g.begin(), g.end());
    for (double t : g) {
      if (t < 0.0 || t > o.t_max) throw InputError("sample grid outside [0, t_max]");
    }
    return g;
  }
  std::vector<double> g;
  for (int i = 0; i <= static_cast<int>(std::floor(o.t_max)); ++i) g.push_back(i);
  return g;
}

// Grid times merged with every edge-change time of the standard process
// while it is alive, plus the range of sites it visits.
struct StandardPath {
  std::vector<double> times;
  std::int64_t l_min = 0;
  std::int64_t r_max = 0;
};

StandardPath standard_path(const Construction& c, std::int64_t replica, double t_max,
                           const std::vector<double>& grid) {
  EvolveRequest req;
  req.replica_id = replica;
  req.t_max = t_max;
  req.snapshots = false;
  const Trajectory t = evolve(c, req);
  StandardPath p;
  p.times = grid;
  for (const ProcessState& e : t.edges) {
    if (!e.r) continue;
    p.times.push_back(e.time);
    p.r_max = std::max(p.r_max, *e.r);
    p.l_min = std::min(p.l_min, *e.l);
  }
  std::sort(p.times.begin(), p.times.end());
  p.times.erase(std::unique(p.times.begin(), p.times.end()), p.times.end());
  return p;
}

ReplicaOutcome check_monotone(const Construction& c, std::int64_t replica,
                              const CouplingOptions& o, const std::vector<double>& grid) {
  const auto pair = o.monotone_pair ? *o.monotone_pair : random_comparable_pair(c.master_seed, replica);
  ReplicaOutcome out;
  const Trajectory a = evolve(c, replica, pair.first, 0.0, o.t_max, grid);
  const Trajectory b = evolve(c, replica, pair.second, 0.0, o.t_max, grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    check_order(a.snapshots[i], b.snapshots[i], replica, out);
    ++out.times_checked;
  }
  return out;
}

ReplicaOutcome check_rightmost(const Construction& c, std::int64_t replica,
                               const CouplingOptions& o, const std::vector<double>& grid) {
  const StandardPath p = standard_path(c, replica, o.t_max, grid);
  EvolveRequest req;
  req.replica_id = replica;
  req.t_max = o.t_max;
  req.sample_times = p.times;
  req.query = SiteInterval{p.l_min, p.r_max + 1};
  const Trajectory standard = evolve(c, req);
  req.initial = Configuration::left_half_line();
  const Trajectory half = evolve(c, req);
  ReplicaOutcome out;
  for (std::size_t i = 0; i < p.times.size(); ++i) {
    const ProcessState& s = standard.samples[i];
    if (!s.r) continue;
    ++out.times_checked;
    if (half.samples[i].r != s.r) {
      out.add(replica, s.time, *s.r, "rightmost sites differ");
    }
    const Snapshot& a = standard.snapshots[i];
    const Snapshot& b = half.snapshots[i];
    for (std::int64_t x = *s.l; x <= p.r_max + 1; ++x) {
      if (a.at(x) != b.at(x)) out.add(replica, s.time, x, pair_detail("identity", a.at(x), b.at(x)));
    }
  }
  return out;
}

ReplicaOutcome check_sandwich(const Construction& c, std::int64_t replica,
                              const CouplingOptions& o, const std::vector<double>& grid) {
  const StandardPath p = standard_path(c, replica, o.t_max, grid);
  EvolveRequest req;
  req.replica_id = replica;
  req.t_max = o.t_max;
  req.sample_times = p.times;
  req.query = SiteInterval{p.l_min, p.r_max};
  const Trajectory standard = evolve(c, req);
  const Trajectory all = contact_evolve(c, replica, ContactStart::all(), 0.0, o.t_max, p.times,
                                        {}, SiteInterval{p.l_min, p.r_max});
  ReplicaOutcome out;
  for (std::size_t i = 0; i < p.times.size(); ++i) {
    const ProcessState& s = standard.samples[i];
    if (!s.r) continue;
    ++out.times_checked;
    const auto mine = standard.snapshots[i].infected_in(*s.l, *s.r);
    const auto theirs = all.snapshots[i].infected_in(*s.l, *s.r);
    if (mine != theirs) {
      std::int64_t site = *s.l;
      for (std::int64_t x = *s.l; x <= *s.r; ++x) {
        if (mine.count(x) != theirs.count(x)) {
          site = x;
          break;
        }
      }
      out.add(replica, s.time, site, "infected set differs from the all-infected process");
    }
  }
  return out;
}

ReplicaOutcome check_restart(const Construction& c, std::int64_t replica,
                             const CouplingOptions& o, const std::vector<double>& grid) {
  const Trajectory standard = evolve(c, replica, Configuration::standard(), 0.0, o.t_max, grid);
  ReplicaOutcome out;
  for (const auto& [k, tau] : hitting_times(standard, o.k_cap)) {
    if (k < 1) continue;
    std::vector<double> later;
    std::size_t first = 0;
    while (first < grid.size() && grid[first] < tau) ++first;
    later.assign(grid.begin() + static_cast<std::ptrdiff_t>(first), grid.end());
    const Trajectory restart =
        evolve(c, replica, Configuration::single_site(k), tau, o.t_max, later);
    for (std::size_t i = 0; i < later.size(); ++i) {
      check_order(restart.snapshots[i], standard.snapshots[first + i], replica, out);
      ++out.times_checked;
    }
  }
  return out;
}

ReplicaOutcome check_reduction(const Construction& c, std::int64_t replica,
                               const CouplingOptions& o, const std::vector<double>& grid) {
  const Trajectory three = evolve(c, replica, Configuration::standard(), 0.0, o.t_max, grid);
  const Trajectory plain = contact_evolve(c, replica, ContactStart::of({0}), 0.0, o.t_max, grid);
  ReplicaOutcome out;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    ++out.times_checked;
    const Snapshot& a = three.snapshots[i];
    const Snapshot& b = plain.snapshots[i];
    for (std::int64_t x = std::min(a.lo, b.lo) - 1; x <= std::max(a.hi(), b.hi()) + 1; ++x) {
      const bool left = a.at(x) == State::Infected;
      const bool right = b.at(x) == State::Infected;
      if (left != right) out.add(replica, grid[i], x, "infected sets differ");
    }
  }
  return out;
}

void check_options(const CouplingOptions& options) {
  if (options.replicas < 0) throw InputError("replica count must be nonnegative");
  if (!(options.t_max > 0.0)) throw InputError("t_max must be positive");
  if (options.k_cap < 1) throw InputError("k_cap must be at least 1");
}

}  // namespace

ReductionVerdict verify_reduction(const Construction& construction,
                                  const CouplingOptions& options) {
  construction.validate();
  if (construction.lambda != construction.mu) {
    throw ParameterError("the reduction check needs lambda == mu");
  }
  check_options(options);
  const std::vector<double> grid = grid_for(options);
  const auto outcomes =
      map_replicas(options.first_replica, options.replicas, options.workers,
                   [&](std::int64_t replica) { return check_reduction(construction, replica, options, grid); });
  ReductionVerdict v;
  v.replicas_checked = options.replicas;
  for (const ReplicaOutcome& o : outcomes) {
    v.sample_times_checked += o.times_checked;
    v.violations.insert(v.violations.end(), o.violations.begin(), o.violations.end());
  }
  return v;
}

Verdict verify_coupling(CouplingKind kind, const Construction& construction,
                        const CouplingOptions& options) {
  construction.validate();
  check_options(options);
  if (kind == CouplingKind::Monotone && options.monotone_pair &&
      !options.monotone_pair->first.dominated_by(options.monotone_pair->second)) {
    throw InputError("monotone pair is not ordered");
  }
  const std::vector<double> grid = grid_for(options);

  const auto outcomes = map_replicas(
      options.first_replica, options.replicas, options.workers, [&](std::int64_t replica) {
        switch (kind) {
          case CouplingKind::Monotone: return check_monotone(construction, replica, options, grid);
          case CouplingKind::RightmostIdentity:
            return check_rightmost(construction, replica, options, grid);
          case CouplingKind::Sandwich: return check_sandwich(construction, replica, options, grid);
          case CouplingKind::RestartDomination:
            return check_restart(construction, replica, options, grid);
        }
        return ReplicaOutcome{};
      });

  Verdict v;
  v.kind = kind;
  v.replicas_checked = options.replicas;
  for (const ReplicaOutcome& o : outcomes) {
    v.sample_times_checked += o.times_checked;
    v.violations.insert(v.violations.end(), o.violations.begin(), o.violations.end());
  }
  return v;
}

}  // namespace tscp
