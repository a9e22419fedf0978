#include <doctest.h>

#include <random>
#include <sstream>

#include "reference_engine.hpp"
#include "tscp/errors.hpp"
#include "tscp/process.hpp"
#include "tscp/stats.hpp"

using namespace tscp;

namespace {

Event arrow(std::int64_t site, EventKind kind) { return {1.0, site, kind, 0}; }

std::vector<double> grid(double t_max, double step) {
  std::vector<double> g;
  for (double t = 0.0; t <= t_max + 1e-12; t += step) g.push_back(t);
  return g;
}

Configuration random_finite(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> len(1, 12);
  std::uniform_int_distribution<int> st(-1, 1);
  std::uniform_int_distribution<int> bg(-1, 0);
  const State background = state_from_int(bg(rng));
  Configuration c(background, background, 0);
  const int n = len(rng);
  for (int i = 0; i < n; ++i) c.set(i - n / 2, state_from_int(st(rng)));
  c.set(0, State::Infected);
  return c;
}

}  // namespace

TEST_CASE("apply_event follows the three-state rules") {
  Configuration c = Configuration::standard();
  SUBCASE("lambda arrow infects a never-infected target") {
    CHECK(apply_event(c, arrow(0, EventKind::LambdaArrowRight)).at(1) == State::Infected);
    CHECK(apply_event(c, arrow(0, EventKind::LambdaArrowLeft)).at(-1) == State::Infected);
  }
  SUBCASE("mu-lambda arrow does not infect a never-infected target") {
    CHECK(apply_event(c, arrow(0, EventKind::MuLambdaArrowRight)).at(1) == State::NeverInfected);
  }
  SUBCASE("mu-lambda arrow infects a recovered target") {
    c.set(1, State::Recovered);
    CHECK(apply_event(c, arrow(0, EventKind::MuLambdaArrowRight)).at(1) == State::Infected);
  }
  SUBCASE("recovery only acts on infected sites") {
    c.set(3, State::Recovered);
    CHECK(apply_event(c, arrow(3, EventKind::Recovery)) == c);
    CHECK(apply_event(c, arrow(0, EventKind::Recovery)).at(0) == State::Recovered);
  }
  SUBCASE("arrows from non-infected sources do nothing") {
    CHECK(apply_event(c, arrow(5, EventKind::LambdaArrowRight)) == c);
  }
  SUBCASE("contact dynamics ignores the -1/0 distinction") {
    CHECK(apply_event(c, arrow(0, EventKind::MuLambdaArrowRight), Dynamics::Contact).at(1) ==
          State::Infected);
  }
}

TEST_CASE("an initial configuration without infection is dead at the start") {
  const Construction c{1, 1.0, 2.0, 1.0};
  const auto tr = evolve(c, 0, Configuration(State::Recovered, State::NeverInfected, 3), 2.0,
                         10.0, {2.0, 5.0, 10.0});
  REQUIRE(tr.died_at);
  CHECK(*tr.died_at == 2.0);
  for (const auto& s : tr.samples) {
    CHECK(s.infected_count == 0);
    CHECK_FALSE(s.r);
  }
}

TEST_CASE("engine matches the merge-everything oracle on finite configurations") {
  std::mt19937_64 rng(12345);
  std::uniform_real_distribution<double> lam(0.3, 2.5);
  std::uniform_real_distribution<double> extra(0.0, 1.5);
  for (int trial = 0; trial < 40; ++trial) {
    const double l = lam(rng);
    const Construction c{rng(), l, l + (trial % 4 == 0 ? 0.0 : extra(rng)), 1.0};
    const Configuration init = random_finite(rng);
    const double start = trial % 3 == 0 ? 1.5 : 0.0;
    const std::vector<double> samples = {start, start + 0.5, start + 1.0, start + 2.5, start + 4.0};
    const auto tr = evolve(c, trial, init, start, start + 4.0, samples);
    const auto ref = testing::reference_evolve(c, trial, init, start, start + 4.0, samples, 60);
    REQUIRE(tr.snapshots.size() == samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
      const auto& snap = tr.snapshots[i];
      for (std::int64_t x = -70; x <= 70; ++x) {
        REQUIRE(snap.at(x).has_value());
        CAPTURE(trial);
        CAPTURE(x);
        CHECK(*snap.at(x) == ref.at_samples[i].at(x));
      }
      CHECK(tr.samples[i].infected_count == ref.at_samples[i].infected_count());
      CHECK(tr.samples[i].r == ref.at_samples[i].rightmost_infected());
      CHECK(tr.samples[i].l == ref.at_samples[i].leftmost_infected());
    }
  }
}

TEST_CASE("engine matches the oracle away from a truncated infinite side") {
  const Construction c{99, 1.0, 2.0, 1.0};
  const std::vector<double> samples = {0.0, 1.0, 3.0, 6.0};
  for (std::int64_t replica = 0; replica < 6; ++replica) {
    EvolveRequest req;
    req.replica_id = replica;
    req.initial = Configuration::left_half_line();
    req.t_max = 6.0;
    req.sample_times = samples;
    req.query = SiteInterval{-10, 20};
    const auto tr = evolve(c, req);
    const auto ref = testing::reference_evolve(c, replica, req.initial, 0.0, 6.0, samples, 150);
    for (std::size_t i = 0; i < samples.size(); ++i) {
      for (std::int64_t x = -10; x <= 20; ++x) {
        CHECK(*tr.snapshots[i].at(x) == ref.at_samples[i].at(x));
      }
      CHECK(tr.samples[i].r == ref.at_samples[i].rightmost_infected());
      CHECK_FALSE(tr.samples[i].l);
    }
  }
}

TEST_CASE("contact dynamics from all of Z matches the oracle in the middle") {
  const Construction c{4242, 1.0, 2.0, 1.0};
  const std::vector<double> samples = {0.5, 2.0, 5.0};
  for (std::int64_t replica = 0; replica < 4; ++replica) {
    const auto tr = contact_evolve(c, replica, ContactStart::all(), 0.0, 5.0, samples, {},
                                   SiteInterval{-15, 15});
    const auto ref = testing::reference_evolve(c, replica, ContactStart::all().configuration(), 0.0,
                                               5.0, samples, 150, Dynamics::Contact);
    for (std::size_t i = 0; i < samples.size(); ++i) {
      for (std::int64_t x = -15; x <= 15; ++x) {
        CHECK((*tr.snapshots[i].at(x) == State::Infected) ==
              (ref.at_samples[i].at(x) == State::Infected));
      }
    }
  }
}

TEST_CASE("lambda == mu reduces to the contact process pathwise") {
  const Construction c{555, 2.0, 2.0, 1.0};
  const auto samples = grid(60.0, 2.0);
  for (std::int64_t replica = 0; replica < 100; ++replica) {
    const auto three = evolve(c, replica, Configuration::standard(), 0.0, 60.0, samples);
    const auto plain = contact_evolve(c, replica, ContactStart::of({0}), 0.0, 60.0, samples);
    for (std::size_t i = 0; i < samples.size(); ++i) {
      CHECK(three.samples[i] == plain.samples[i]);
      const auto& a = three.snapshots[i];
      const auto& b = plain.snapshots[i];
      for (std::int64_t x = std::min(a.lo, b.lo); x <= std::max(a.hi(), b.hi()); ++x) {
        CHECK((*a.at(x) == State::Infected) == (*b.at(x) == State::Infected));
      }
    }
  }
}

TEST_CASE("trajectory invariants: absorption, no return to -1, finite speed, determinism") {
  const Construction c{2718, 1.0, 2.0, 1.0};
  const auto samples = grid(80.0, 1.0);
  for (std::int64_t replica = 0; replica < 60; ++replica) {
    const auto tr = evolve(c, replica, Configuration::standard(), 0.0, 80.0, samples);
    const auto again = evolve(c, replica, Configuration::standard(), 0.0, 80.0, samples);
    CHECK(tr.edges == again.edges);
    CHECK(tr.samples == again.samples);

    if (tr.died_at) {
      for (const auto& s : tr.samples) {
        if (s.time >= *tr.died_at) CHECK(s.infected_count == 0);
      }
      CHECK(tr.final_state.infected_count == 0);
    }
    std::int64_t r_max = 0;
    for (const auto& e : tr.edges) {
      if (e.r) r_max = std::max(r_max, *e.r);
      CHECK((e.infected_count == 0) == (!e.r && !e.l));
    }
    CHECK(r_max <= tr.arrow_events);

    for (std::int64_t x = -40; x <= 40; ++x) {
      bool left_never = false;
      for (const auto& snap : tr.snapshots) {
        const State s = *snap.at(x);
        if (s != State::NeverInfected) left_never = true;
        if (left_never) CHECK(s != State::NeverInfected);
      }
    }
  }
}

TEST_CASE("fixed windows report breaches instead of wrong answers") {
  const Construction c{8, 1.0, 2.0, 1.0};
  EvolveRequest req;
  req.initial = Configuration::left_half_line();
  req.t_max = 50.0;
  req.sample_times = {50.0};
  req.query = SiteInterval{-5, 5};
  req.window = WindowPolicy::fixed(3);
  CHECK_THROWS_AS(evolve(c, req), WindowBreach);

  req.window = WindowPolicy{};
  req.window.width = 3;
  const auto tr = evolve(c, req);
  CHECK(tr.expansions > 0);
  CHECK(tr.window_width > 3);

  req.window = WindowPolicy{};
  const auto wide = evolve(c, req);
  CHECK(wide.snapshots.back().states == tr.snapshots.back().states);
}

TEST_CASE("input validation") {
  const Construction c{8, 1.0, 2.0, 1.0};
  CHECK_THROWS_AS(evolve(c, 0, Configuration::standard(), 5.0, 1.0, {}), InputError);
  CHECK_THROWS_AS(evolve(c, 0, Configuration::standard(), 0.0, 1.0, {2.0}), InputError);
  CHECK_THROWS_AS(evolve(c, 0, Configuration::standard(), 0.0, 3.0, {2.0, 1.0}), InputError);
  CHECK_THROWS_AS(evolve(Construction{8, 2.0, 1.0, 1.0}, 0, Configuration::standard(), 0.0, 1.0, {}),
                  ParameterError);
}

TEST_CASE("contact process: empty start and monotonicity in the initial set") {
  const Construction c{31337, 1.0, 2.0, 1.0};
  const auto samples = grid(30.0, 3.0);
  const auto none = contact_evolve(c, 0, ContactStart::of({}), 0.0, 30.0, samples);
  for (const auto& s : none.samples) CHECK(s.infected_count == 0);

  for (std::int64_t replica = 0; replica < 30; ++replica) {
    const auto small = contact_evolve(c, replica, ContactStart::of({-2, 0, 3}), 0.0, 30.0, samples);
    std::int64_t lo = -3;
    std::int64_t hi = 4;
    for (const auto& s : small.samples) {
      if (s.l) lo = std::min(lo, *s.l);
      if (s.r) hi = std::max(hi, *s.r);
    }
    const auto all = contact_evolve(c, replica, ContactStart::all(), 0.0, 30.0, samples, {},
                                    SiteInterval{lo, hi});
    for (std::size_t i = 0; i < samples.size(); ++i) {
      for (std::int64_t x = lo; x <= hi; ++x) {
        if (*small.snapshots[i].at(x) == State::Infected) {
          CHECK(*all.snapshots[i].at(x) == State::Infected);
        }
      }
    }
  }
}

TEST_CASE("trajectory CSV export") {
  const Construction c{1, 1.0, 2.0, 1.0};
  const auto tr = evolve(c, 3, Configuration::standard(), 0.0, 2.0, {0.0, 1.0, 2.0});
  std::ostringstream out;
  write_trajectory_csv(out, std::span(&tr, 1), true);
  const std::string csv = out.str();
  CHECK(csv.rfind("replica,t,r,l,infected_count,died,snapshot_lo,snapshot\n", 0) == 0);
  CHECK(csv.find("\n3,0,0,0,1,0,") != std::string::npos);
}

TEST_CASE("survival at (1, 2) is positive and stable across batches" * doctest::timeout(600)) {
  const Construction c{20261019, 1.0, 2.0, 1.0};
  auto survival = [&](std::int64_t first) {
    int alive = 0;
    for (std::int64_t r = first; r < first + 2500; ++r) {
      EvolveRequest req;
      req.replica_id = r;
      req.t_max = 200.0;
      req.snapshots = false;
      req.record_edges = false;
      alive += !evolve(c, req).died_at;
    }
    return alive / 2500.0;
  };
  const double a = survival(0);
  const double b = survival(100000);
  MESSAGE("survival fractions " << a << " " << b);
  CHECK(a > 0.0);
  CHECK(b > 0.0);
  CHECK(std::abs(a - b) <= 0.03);
}

TEST_CASE("occupancy from all of Z is symmetric" * doctest::timeout(600)) {
  const Construction c{77, 1.0, 2.0, 1.0};
  double left = 0.0;
  double right = 0.0;
  const int replicas = 200;
  for (int r = 0; r < replicas; ++r) {
    const auto tr = contact_evolve(c, r, ContactStart::all(), 0.0, 150.0, {150.0}, {},
                                   SiteInterval{-300, 300});
    left += static_cast<double>(tr.snapshots[0].infected_in(-300, 0).size()) / 301.0;
    right += static_cast<double>(tr.snapshots[0].infected_in(0, 300).size()) / 301.0;
  }
  left /= replicas;
  right /= replicas;
  MESSAGE("occupancy " << left << " " << right);
  CHECK(left > 0.1);
  CHECK(left < 0.9);
  CHECK(std::abs(left - right) <= 0.02);
}
