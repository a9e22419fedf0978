#include "tscp/process.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "tscp/errors.hpp"

namespace tscp {

Configuration apply_event(const Configuration& config, const Event& event, Dynamics dynamics) {
  Configuration out = config;
  const State source = config.at(event.site);
  if (event.kind == EventKind::Recovery) {
    out.set(event.site, transition(source, source, event.kind, dynamics));
  } else {
    const std::int64_t y = event.target();
    out.set(y, transition(source, config.at(y), event.kind, dynamics));
  }
  return out;
}

std::int64_t default_window_width(double mu, double duration) {
  const double m = mu * std::max(duration, 0.0);
  return static_cast<std::int64_t>(std::ceil(m + 6.0 * std::sqrt(m) + 16.0));
}

std::optional<State> Snapshot::at(std::int64_t x) const {
  if (x < lo) return left_outside;
  if (x > hi()) return right_outside;
  return states[static_cast<std::size_t>(x - lo)];
}

std::set<std::int64_t> Snapshot::infected_in(std::int64_t a, std::int64_t b) const {
  std::set<std::int64_t> out;
  for (std::int64_t x = a; x <= b; ++x) {
    auto s = at(x);
    if (!s) throw WindowBreach("snapshot does not certify site " + std::to_string(x));
    if (*s == State::Infected) out.insert(x);
  }
  return out;
}

const ProcessState& Trajectory::edge_state_at(double t) const {
  if (edges.empty()) throw InputError("trajectory has no edge records");
  auto it = std::upper_bound(edges.begin(), edges.end(), t,
                             [](double v, const ProcessState& s) { return v < s.time; });
  if (it == edges.begin()) return edges.front();
  return *std::prev(it);
}

Configuration ContactStart::configuration() const {
  if (everything) return Configuration(State::Infected, State::Infected, 0);
  return Configuration::from_set(sites, State::Recovered);
}

namespace {

struct BreachSignal {
  std::string what;
};

struct Slot {
  double next_time;
  std::uint64_t key;
  std::uint64_t counter;
  EventKind kind;
  State state;
  bool queued;
};

struct HeapEntry {
  double time;
  std::int64_t site;
};

struct Later {
  bool operator()(const HeapEntry& a, const HeapEntry& b) const {
    return a.time > b.time || (a.time == b.time && a.site > b.site);
  }
};

class Engine {
 public:
  Engine(const Construction& c, const EvolveRequest& req, std::int64_t width)
      : req_(req), sampler_(c), width_(width) {
    traj_.construction = c;
    traj_.replica_id = req.replica_id;
    traj_.initial = req.initial;
    traj_.start_time = req.start_time;
    traj_.t_max = req.t_max;
    traj_.dynamics = req.dynamics;
    left_infinite_ = req.initial.infinite_left_infection();
    right_infinite_ = req.initial.infinite_right_infection();
    traj_.window_width = (left_infinite_ || right_infinite_) ? width : 0;
  }

  Trajectory run() {
    init();
    while (!heap_.empty() && !dead_) {
      const HeapEntry top = heap_.front();
      if (top.time > req_.t_max) break;
      flush_samples(top.time, /*inclusive=*/false);
      std::pop_heap(heap_.begin(), heap_.end(), Later{});
      heap_.pop_back();
      step(top.site);
    }
    flush_samples(req_.t_max, /*inclusive=*/true);
    traj_.final_state = current_state(dead_ ? *traj_.died_at : req_.t_max);
    return std::move(traj_);
  }

 private:
  // ---- lattice storage ----

  Slot& slot(std::int64_t x) { return slots_[static_cast<std::size_t>(x - base_)]; }
  std::int64_t top_site() const { return base_ + static_cast<std::int64_t>(slots_.size()) - 1; }

  Slot fresh_slot(std::int64_t x, State s) const {
    Slot sl{};
    sl.key = sampler_.key(req_.replica_id, x);
    sl.counter = 0;
    sl.next_time = sampler_.interarrival(sl.key, 0);
    sl.kind = sampler_.mark(sl.key, 0);
    sl.state = s;
    sl.queued = false;
    return sl;
  }

  void advance(Slot& s) const {
    ++s.counter;
    s.next_time += sampler_.interarrival(s.key, s.counter);
    s.kind = sampler_.mark(s.key, s.counter);
  }

  // Finite sides grow on demand with the initial configuration's states.
  void ensure(std::int64_t x) {
    if (x < base_) {
      const std::int64_t grow = std::max<std::int64_t>(base_ - x, static_cast<std::int64_t>(slots_.size()) / 2 + 16);
      std::vector<Slot> fresh;
      fresh.reserve(slots_.size() + static_cast<std::size_t>(grow));
      for (std::int64_t y = base_ - grow; y < base_; ++y) fresh.push_back(fresh_slot(y, req_.initial.at(y)));
      fresh.insert(fresh.end(), slots_.begin(), slots_.end());
      slots_.swap(fresh);
      base_ -= grow;
    } else if (x > top_site()) {
      const std::int64_t grow = std::max<std::int64_t>(x - top_site(), static_cast<std::int64_t>(slots_.size()) / 2 + 16);
      const std::int64_t from = top_site() + 1;
      slots_.reserve(slots_.size() + static_cast<std::size_t>(grow));
      for (std::int64_t y = from; y < from + grow; ++y) slots_.push_back(fresh_slot(y, req_.initial.at(y)));
    }
  }

  void push(std::int64_t x) {
    Slot& s = slot(x);
    s.queued = true;
    heap_.push_back({s.next_time, x});
    std::push_heap(heap_.begin(), heap_.end(), Later{});
  }

  // Skip every event ordered before (t, site) in the merged order.
  void catch_up(Slot& s, std::int64_t x, double t, std::int64_t site) {
    while (s.next_time < t || (s.next_time == t && x < site)) advance(s);
  }

  bool certain(std::int64_t x) const {
    return (!frontier_left_ || x > *frontier_left_) && (!frontier_right_ || x < *frontier_right_);
  }

  // ---- setup ----

  void init() {
    const Configuration& init = req_.initial;
    std::int64_t lo = init.span_lo() - 1;
    std::int64_t hi = init.span_hi() + 1;
    if (req_.query) {
      lo = std::min(lo, req_.query->lo);
      hi = std::max(hi, req_.query->hi);
    }
    if (left_infinite_) {
      lo -= width_;
      frontier_left_ = lo - 1;
      lo -= 1;
    }
    if (right_infinite_) {
      hi += width_;
      frontier_right_ = hi + 1;
      hi += 1;
    }
    base_ = lo;
    slots_.reserve(static_cast<std::size_t>(hi - lo + 1));
    for (std::int64_t x = lo; x <= hi; ++x) slots_.push_back(fresh_slot(x, init.at(x)));

    heap_.reserve(slots_.size() + 64);
    for (std::int64_t x = lo; x <= hi; ++x) {
      Slot& s = slot(x);
      const bool frontier = !certain(x);
      if (!frontier && s.state == State::Infected) ++count_;
      if (frontier || s.state == State::Infected) {
        while (s.next_time <= req_.start_time) advance(s);
        push(x);
      }
    }
    if (!left_infinite_ || !right_infinite_) {
      for (std::int64_t x = lo; x <= hi; ++x) {
        if (certain(x) && slot(x).state == State::Infected) {
          if (!right_infinite_) r_ = x;
          if (!left_infinite_ && !l_) l_ = x;
        }
      }
    }
    if (left_infinite_ && !right_infinite_ && !r_) {
      throw BreachSignal{"no certified infected site to the right of the window"};
    }
    if (right_infinite_ && !left_infinite_ && !l_) {
      throw BreachSignal{"no certified infected site to the left of the window"};
    }
    for (std::size_t i = 1; i < req_.sample_times.size(); ++i) {
      if (req_.sample_times[i] < req_.sample_times[i - 1]) {
        throw InputError("sample times must be nondecreasing");
      }
    }
    record_edge(req_.start_time);
    if (count_ == 0 && !left_infinite_ && !right_infinite_) die(req_.start_time);
  }

  // ---- event processing ----

  void step(std::int64_t x) {
    Slot& s = slot(x);
    const double t = s.next_time;
    const EventKind kind = s.kind;

    if (!certain(x)) {
      if (frontier_left_ && x == *frontier_left_ && points_right(kind)) {
        advance_left_frontier(t, x);
      } else if (frontier_right_ && x == *frontier_right_ && points_left(kind)) {
        advance_right_frontier(t, x);
      }
      Slot& again = slot(x);
      advance(again);
      if ((frontier_left_ && x == *frontier_left_) || (frontier_right_ && x == *frontier_right_)) {
        push(x);
      } else {
        again.queued = false;
      }
      return;
    }
    if (s.state != State::Infected) {
      s.queued = false;
      return;
    }
    if (kind == EventKind::Recovery) {
      s.state = State::Recovered;
      s.queued = false;
      advance(s);
      ++traj_.events_applied;
      --count_;
      on_recovery(x, t);
      return;
    }

    ++traj_.arrow_events;
    advance(s);
    push(x);
    const std::int64_t y = points_right(kind) ? x + 1 : x - 1;
    if (!certain(y)) return;
    ensure(y);
    Slot& ts = slot(y);
    const State next = transition(State::Infected, ts.state, kind, req_.dynamics);
    if (next == ts.state) return;
    ts.state = next;
    ++traj_.events_applied;
    ++count_;
    catch_up(ts, y, t, x);
    push(y);
    bool changed = false;
    if (!right_infinite_ && (!r_ || y > *r_)) {
      r_ = y;
      changed = true;
    }
    if (!left_infinite_ && (!l_ || y < *l_)) {
      l_ = y;
      changed = true;
    }
    if (changed) record_edge(t);
  }

  void on_recovery(std::int64_t x, double t) {
    if (count_ == 0 && !left_infinite_ && !right_infinite_) {
      r_.reset();
      l_.reset();
      record_edge(t);
      die(t);
      return;
    }
    bool changed = false;
    if (r_ && *r_ == x) {
      r_ = scan_left(x - 1);
      if (!r_) throw BreachSignal{"rightmost infected site lost to the window frontier"};
      changed = true;
    }
    if (l_ && *l_ == x) {
      l_ = scan_right(x + 1);
      if (!l_) throw BreachSignal{"leftmost infected site lost to the window frontier"};
      changed = true;
    }
    if (changed) record_edge(t);
  }

  std::optional<std::int64_t> scan_left(std::int64_t from) {
    const std::int64_t stop = frontier_left_ ? *frontier_left_ + 1 : base_;
    for (std::int64_t y = std::min(from, top_site()); y >= stop; --y) {
      if (slot(y).state == State::Infected) return y;
    }
    return std::nullopt;
  }

  std::optional<std::int64_t> scan_right(std::int64_t from) {
    const std::int64_t stop = frontier_right_ ? *frontier_right_ - 1 : top_site();
    for (std::int64_t y = std::max(from, base_); y <= stop; ++y) {
      if (slot(y).state == State::Infected) return y;
    }
    return std::nullopt;
  }

  void advance_left_frontier(double t, std::int64_t x) {
    const std::int64_t f = x + 1;
    frontier_left_ = f;
    Slot& s = slot(f);
    if (s.state == State::Infected) --count_;
    if (r_ && *r_ <= f) throw BreachSignal{"window frontier reached the rightmost infected site"};
    if (frontier_right_ && f >= *frontier_right_ - 1) {
      throw BreachSignal{"window frontiers met"};
    }
    if (!s.queued) {
      catch_up(s, f, t, x);
      push(f);
    }
  }

  void advance_right_frontier(double t, std::int64_t x) {
    const std::int64_t f = x - 1;
    frontier_right_ = f;
    Slot& s = slot(f);
    if (s.state == State::Infected) --count_;
    if (l_ && *l_ >= f) throw BreachSignal{"window frontier reached the leftmost infected site"};
    if (frontier_left_ && f <= *frontier_left_ + 1) {
      throw BreachSignal{"window frontiers met"};
    }
    if (!s.queued) {
      catch_up(s, f, t, x);
      push(f);
    }
  }

  // ---- recording ----

  ProcessState current_state(double t) const { return {t, r_, l_, count_}; }

  void record_edge(double t) {
    if (req_.record_edges || traj_.edges.empty()) traj_.edges.push_back(current_state(t));
  }

  void die(double t) {
    dead_ = true;
    traj_.died_at = t;
  }

  void flush_samples(double t, bool inclusive) {
    const auto& times = req_.sample_times;
    while (next_sample_ < times.size() &&
           (times[next_sample_] < t || (inclusive && times[next_sample_] <= t))) {
      take_sample(times[next_sample_]);
      ++next_sample_;
    }
  }

  void take_sample(double when) {
    if (req_.query && !dead_) {
      if (!certain(req_.query->lo) || !certain(req_.query->hi)) {
        throw BreachSignal{"query region left the certified window"};
      }
    }
    traj_.samples.push_back(current_state(when));
    if (!req_.snapshots) return;
    Snapshot snap;
    snap.time = when;
    std::int64_t a = frontier_left_ ? *frontier_left_ + 1 : base_;
    std::int64_t b = frontier_right_ ? *frontier_right_ - 1 : top_site();
    if (req_.query) {
      a = req_.query->lo;
      b = req_.query->hi;
    }
    snap.lo = a;
    snap.states.reserve(static_cast<std::size_t>(std::max<std::int64_t>(b - a + 1, 0)));
    for (std::int64_t x = a; x <= b; ++x) {
      if (x < base_ || x > top_site()) {
        snap.states.push_back(req_.initial.at(x));
      } else {
        snap.states.push_back(slot(x).state);
      }
    }
    if (!left_infinite_) snap.left_outside = req_.initial.left_default();
    if (!right_infinite_) snap.right_outside = req_.initial.right_default();
    if (req_.query) {
      // Sites beyond an explicit query are only certified on finite sides
      // when they were never touched.
      if (!left_infinite_ && a > base_) snap.left_outside.reset();
      if (!right_infinite_ && b < top_site()) snap.right_outside.reset();
    }
    traj_.snapshots.push_back(std::move(snap));
  }

  const EvolveRequest& req_;
  StreamSampler sampler_;
  std::int64_t width_;
  Trajectory traj_;

  bool left_infinite_ = false;
  bool right_infinite_ = false;
  std::int64_t base_ = 0;
  std::vector<Slot> slots_;
  std::vector<HeapEntry> heap_;
  std::optional<std::int64_t> frontier_left_;
  std::optional<std::int64_t> frontier_right_;
  std::optional<std::int64_t> r_;
  std::optional<std::int64_t> l_;
  std::int64_t count_ = 0;
  bool dead_ = false;
  std::size_t next_sample_ = 0;
};

void check_request(const EvolveRequest& req) {
  if (!(req.start_time >= 0.0)) throw InputError("start time must be nonnegative");
  if (!(req.t_max >= req.start_time)) throw InputError("t_max must be >= start time");
  for (double s : req.sample_times) {
    if (s < req.start_time || s > req.t_max) {
      throw InputError("sample time " + std::to_string(s) + " outside [start_time, t_max]");
    }
  }
  if (req.query && req.query->lo > req.query->hi) throw InputError("query interval is empty");
  if (!(req.window.growth > 1.0)) throw InputError("window growth must exceed 1");
}

}  // namespace

Trajectory evolve(const Construction& construction, const EvolveRequest& request) {
  construction.validate();
  check_request(request);
  std::int64_t width = request.window.width.value_or(
      default_window_width(construction.mu, request.t_max - request.start_time));
  if (width < 0) throw InputError("window width must be nonnegative");
  for (int attempt = 0;; ++attempt) {
    try {
      Trajectory t = Engine(construction, request, width).run();
      t.expansions = attempt;
      return t;
    } catch (const BreachSignal& b) {
      if (!request.window.expandable || attempt >= request.window.max_expansions) {
        throw WindowBreach("window breach (width " + std::to_string(width) + "): " + b.what);
      }
      width = static_cast<std::int64_t>(std::ceil(static_cast<double>(std::max<std::int64_t>(width, 1)) *
                                                  request.window.growth));
    }
  }
}

Trajectory evolve(const Construction& construction, std::int64_t replica_id,
                  const Configuration& initial, double start_time, double t_max,
                  std::vector<double> sample_times, WindowPolicy policy) {
  EvolveRequest req;
  req.replica_id = replica_id;
  req.initial = initial;
  req.start_time = start_time;
  req.t_max = t_max;
  req.sample_times = std::move(sample_times);
  req.window = policy;
  return evolve(construction, req);
}

Trajectory contact_evolve(const Construction& construction, EvolveRequest request) {
  request.dynamics = Dynamics::Contact;
  return evolve(construction, request);
}

Trajectory contact_evolve(const Construction& construction, std::int64_t replica_id,
                          const ContactStart& start, double start_time, double t_max,
                          std::vector<double> sample_times, WindowPolicy policy,
                          std::optional<SiteInterval> query) {
  EvolveRequest req;
  req.replica_id = replica_id;
  req.initial = start.configuration();
  req.start_time = start_time;
  req.t_max = t_max;
  req.sample_times = std::move(sample_times);
  req.window = policy;
  req.query = query;
  req.dynamics = Dynamics::Contact;
  return evolve(construction, req);
}

namespace {

void write_opt(std::ostream& out, const std::optional<std::int64_t>& v) {
  if (v) out << *v;
}

}  // namespace

void write_trajectory_csv(std::ostream& out, std::span<const Trajectory> trajectories,
                          bool snapshots) {
  out.precision(12);
  out << "replica,t,r,l,infected_count,died";
  if (snapshots) out << ",snapshot_lo,snapshot";
  out << '\n';
  for (const auto& tr : trajectories) {
    std::size_t i = 0;
    std::size_t j = 0;
    auto row = [&](const ProcessState& s, const Snapshot* snap) {
      out << tr.replica_id << ',' << s.time << ',';
      write_opt(out, s.r);
      out << ',';
      write_opt(out, s.l);
      out << ',' << s.infected_count << ',' << (tr.died_at && s.time >= *tr.died_at ? 1 : 0);
      if (snapshots) {
        out << ',';
        if (snap) {
          out << snap->lo << ',';
          std::int64_t x = snap->lo;
          bool first = true;
          while (x <= snap->hi()) {
            const State st = *snap->at(x);
            std::int64_t run = 0;
            while (x <= snap->hi() && *snap->at(x) == st) {
              ++run;
              ++x;
            }
            out << (first ? "" : ";") << run << 'x' << value(st);
            first = false;
          }
        } else {
          out << ',';
        }
      }
      out << '\n';
    };
    while (i < tr.samples.size() || j < tr.edges.size()) {
      const bool take_sample =
          j >= tr.edges.size() || (i < tr.samples.size() && tr.samples[i].time <= tr.edges[j].time);
      if (take_sample) {
        row(tr.samples[i], i < tr.snapshots.size() ? &tr.snapshots[i] : nullptr);
        ++i;
      } else {
        row(tr.edges[j], nullptr);
        ++j;
      }
    }
  }
}

}  // namespace tscp
