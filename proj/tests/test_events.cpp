#include <doctest.h>

#include <cmath>
#include <map>

#include "tscp/errors.hpp"
#include "tscp/events.hpp"
#include "tscp/stats.hpp"

using namespace tscp;

namespace {

Construction reference(std::uint64_t seed = 7) { return {seed, 1.0, 2.0, 1.0}; }

}  // namespace

TEST_CASE("mu-lambda streams are empty when lambda equals mu") {
  const Construction c{3, 1.0, 1.0, 1.0};
  CHECK(site_streams(c, {0, 0, EventKind::MuLambdaArrowRight}, 100.0).empty());
  CHECK(site_streams(c, {0, 5, EventKind::MuLambdaArrowLeft}, 100.0).empty());
  CHECK_FALSE(site_streams(c, {0, 0, EventKind::LambdaArrowRight}, 100.0).empty());
}

TEST_CASE("tiny horizons produce no events") {
  const Construction c = reference();
  int nonempty = 0;
  for (std::int64_t r = 0; r < 200; ++r) {
    nonempty += !site_streams(c, {r, 0, EventKind::Recovery}, 1e-9).empty();
  }
  CHECK(nonempty == 0);
}

TEST_CASE("mu below lambda is a parameter error") {
  const Construction c{1, 2.0, 1.0, 1.0};
  CHECK_THROWS_AS(site_streams(c, {0, 0, EventKind::Recovery}, 1.0), ParameterError);
  CHECK_THROWS_AS(window_events(c, 0, 0, 3, 1.0), ParameterError);
  CHECK_THROWS_AS(window_events(reference(), 0, 3, 0, 1.0), InputError);
}

TEST_CASE("streams are deterministic, strictly increasing and prefix stable") {
  const Construction c = reference(11);
  for (EventKind kind : kAllEventKinds) {
    const StreamKey key{4, -17, kind};
    const auto a = site_streams(c, key, 50.0);
    const auto b = site_streams(c, key, 50.0);
    const auto longer = site_streams(c, key, 80.0);
    REQUIRE(a.size() == b.size());
    REQUIRE(a.size() <= longer.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a[i].time == b[i].time);
      CHECK(a[i].time == longer[i].time);
      CHECK(a[i].kind == kind);
      CHECK(a[i].time <= 50.0);
      if (i > 0) CHECK(a[i].time > a[i - 1].time);
    }
  }
}

TEST_CASE("recovery counts match the Poisson mean") {
  const Construction c = reference(2024);
  const double horizon = 1e4;
  std::vector<double> counts;
  for (std::int64_t r = 0; r < 200; ++r) {
    counts.push_back(static_cast<double>(site_streams(c, {r, 3, EventKind::Recovery}, horizon).size()));
  }
  const auto m = stats::moments(counts);
  // Poisson: variance equals the mean, so the standard error is sqrt(1e4/200).
  const double se = std::sqrt(horizon / 200.0);
  CHECK(std::abs(m.mean - horizon) < 3.0 * se);
}

TEST_CASE("window merge: kinds, ordering and associativity") {
  SUBCASE("lambda == mu leaves only lambda arrows and recoveries") {
    const Construction c{5, 2.0, 2.0, 1.0};
    for (const Event& e : window_events(c, 0, 0, 0, 50.0)) {
      CHECK((is_lambda_arrow(e.kind) || e.kind == EventKind::Recovery));
    }
  }
  SUBCASE("merging disjoint windows is the sorted union") {
    const Construction c = reference(9);
    auto left = window_events(c, 1, -5, -1, 20.0);
    auto right = window_events(c, 1, 0, 4, 20.0);
    auto both = window_events(c, 1, -5, 4, 20.0);
    std::vector<Event> merged = left;
    merged.insert(merged.end(), right.begin(), right.end());
    std::sort(merged.begin(), merged.end(), event_before);
    REQUIRE(merged.size() == both.size());
    for (std::size_t i = 0; i < both.size(); ++i) {
      CHECK(merged[i].time == both[i].time);
      CHECK(merged[i].site == both[i].site);
      CHECK(merged[i].kind == both[i].kind);
    }
  }
  SUBCASE("window event count matches the summed intensities") {
    const Construction c = reference(31);
    std::vector<double> counts;
    for (std::int64_t r = 0; r < 100; ++r) {
      counts.push_back(static_cast<double>(window_events(c, r, -50, 50, 100.0).size()));
    }
    const double expected = 101.0 * (2.0 * 1.0 + 2.0 * 1.0 + 1.0) * 100.0;
    const auto m = stats::moments(counts);
    CHECK(std::abs(m.mean - expected) < 3.0 * std::sqrt(expected / 100.0));
  }
}

TEST_CASE("counts of distinct keys are uncorrelated") {
  const Construction c = reference(77);
  const int replicas = 1000;
  const std::vector<StreamKey> keys = {
      {0, 0, EventKind::LambdaArrowRight}, {0, 0, EventKind::Recovery},
      {0, 1, EventKind::LambdaArrowRight}, {0, 0, EventKind::MuLambdaArrowLeft},
      {0, -1, EventKind::MuLambdaArrowRight}};
  std::vector<std::vector<double>> counts(keys.size());
  for (int r = 0; r < replicas; ++r) {
    for (std::size_t k = 0; k < keys.size(); ++k) {
      StreamKey key = keys[k];
      key.replica_id = r;
      counts[k].push_back(static_cast<double>(site_streams(c, key, 10.0).size()));
    }
  }
  const double bound = 4.0 / std::sqrt(static_cast<double>(replicas));
  for (std::size_t a = 0; a < keys.size(); ++a) {
    for (std::size_t b = a + 1; b < keys.size(); ++b) {
      CHECK(std::abs(stats::correlation(counts[a], counts[b])) < bound);
    }
  }
}

TEST_CASE("interarrival times are exponential for every kind") {
  const Construction c = reference(5150);
  for (EventKind kind : kAllEventKinds) {
    const double rate = c.rate(kind);
    std::vector<double> gaps;
    for (std::int64_t site = 0; gaps.size() < 12000; ++site) {
      double prev = 0.0;
      for (const Event& e : site_streams(c, {0, site, kind}, 400.0)) {
        gaps.push_back(e.time - prev);
        prev = e.time;
      }
    }
    const auto ks = stats::ks_one_sample(gaps, [rate](double x) { return 1.0 - std::exp(-rate * x); });
    CAPTURE(to_string(kind));
    CHECK(ks.statistic < stats::ks_critical_value(ks.n, 0.001));
  }
}
