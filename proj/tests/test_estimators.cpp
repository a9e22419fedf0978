#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "tscp/errors.hpp"
#include "tscp/estimators.hpp"
#include "tscp/synthetic.hpp"

using namespace tscp;

namespace {

std::vector<Increment> pairs(std::initializer_list<std::pair<std::int64_t, double>> xs) {
  std::vector<Increment> out;
  std::int64_t n = 0;
  for (auto [x, psi] : xs) out.push_back({++n, x, psi, 0});
  return out;
}

// Rejection rate consistent with the nominal level: the Wilson interval of
// the observed rate reaches down to it.
bool calibrated(std::int64_t rejections, std::int64_t trials, double nominal) {
  return stats::wilson_interval(rejections, trials, 0.01).lo <= nominal;
}

}  // namespace

TEST_CASE("edge speed is a ratio of means") {
  const auto equal = pairs({{2, 1.0}, {2, 1.0}, {2, 1.0}, {2, 1.0}});
  const auto e = estimate_alpha(equal);
  CHECK(e.alpha_hat == 2.0);
  CHECK(e.std_error == 0.0);
  CHECK(e.n_increments == 4);
  CHECK(estimate_alpha(pairs({{1, 1.0}, {3, 1.0}})).alpha_hat == 2.0);
  CHECK(estimate_alpha(pairs({{1, 1.0}, {1, 3.0}})).alpha_hat == doctest::Approx(0.5));
  CHECK_THROWS_AS(estimate_alpha(std::vector<Increment>{}), InsufficientData);
  CHECK_THROWS_AS(estimate_alpha(pairs({{1, 1.0}})), InsufficientData);
}

TEST_CASE("edge speed is invariant under permutation") {
  auto series = synthetic::increments(3, 1, 400);
  std::vector<Increment> incs = series[0].increments;
  const auto base = estimate_alpha(incs);
  synthetic::UniformStream u(5, 0);
  for (int round = 0; round < 10; ++round) {
    for (std::size_t i = incs.size() - 1; i > 0; --i) {
      std::swap(incs[i], incs[static_cast<std::size_t>(u.next() * static_cast<double>(i + 1))]);
    }
    const auto e = estimate_alpha(incs);
    CHECK(e.alpha_hat == doctest::Approx(base.alpha_hat).epsilon(1e-12));
    CHECK(e.std_error == doctest::Approx(base.std_error).epsilon(1e-9));
  }
}

TEST_CASE("variance estimate") {
  CHECK(estimate_sigma2(pairs({{2, 1.0}, {2, 1.0}}), 2.0) == 0.0);
  CHECK(estimate_sigma2(pairs({{1, 1.0}, {3, 1.0}}), 2.0) == doctest::Approx(1.0));
}

TEST_CASE("CLT test preconditions and inconclusive sizes") {
  const std::vector<double> times{1.0};
  const std::vector<std::vector<double>> few{synthetic::normal_samples(1, 0, 50)};
  CHECK_THROWS_AS(clt_from_samples(times, few, 0.0, 0.0, 0.01), InputError);
  const auto r = clt_from_samples(times, few, 0.0, 1.0, 0.01);
  CHECK(r.status == Status::Inconclusive);
}

TEST_CASE("CLT test is calibrated under the null") {
  const std::vector<double> times{1.0, 4.0, 9.0};
  const int trials = 200;
  int fails = 0;
  for (int trial = 0; trial < trials; ++trial) {
    std::vector<std::vector<double>> samples;
    for (std::size_t i = 0; i < times.size(); ++i) {
      // Edge values r with mean 0 and variance t.
      auto z = synthetic::normal_samples(100 + trial, i, 400);
      for (double& v : z) v *= std::sqrt(times[i]);
      samples.push_back(std::move(z));
    }
    const auto r = clt_from_samples(times, samples, 0.0, 1.0, 0.01);
    REQUIRE(r.status != Status::Inconclusive);
    fails += r.status == Status::Fail;
  }
  CAPTURE(fails);
  CHECK(calibrated(fails, trials, 0.01));
}

TEST_CASE("CLT test detects a wrong variance") {
  const std::vector<double> times{1.0};
  const std::vector<std::vector<double>> samples{synthetic::normal_samples(9, 0, 2000)};
  CHECK(clt_from_samples(times, samples, 0.0, 2.0, 0.01).status == Status::Fail);
}

TEST_CASE("tail fit recovers an exponential rate") {
  const auto xs = synthetic::exponential_samples(11, 0, 20000, 2.0);
  std::vector<std::optional<double>> samples(xs.begin(), xs.end());
  const auto fit = tail_fit("exp", samples, tail_thresholds(samples, 10, 0.0, 0.99));
  CHECK(fit.gamma_hat == doctest::Approx(2.0).epsilon(0.10));
  CHECK(fit.r2 > 0.99);
  CHECK(fit.status == Status::Pass);
}

TEST_CASE("tail fit degenerate inputs") {
  std::vector<std::optional<double>> constant(100, 3.0);
  CHECK_THROWS_AS(tail_fit("c", constant, tail_thresholds(constant)), InsufficientData);
  CHECK_THROWS_AS(tail_fit("c", constant, {1, 2, 3, 3.5, 4, 5}), InsufficientData);
  std::vector<std::optional<double>> censored(100);
  CHECK_THROWS_AS(tail_fit("c", censored, {1, 2, 3, 4, 5}), InsufficientData);
}

TEST_CASE("censored samples count only in the denominator") {
  std::vector<std::optional<double>> samples;
  const auto xs = synthetic::exponential_samples(2, 0, 4000, 1.0);
  for (double x : xs) samples.emplace_back(x);
  samples.resize(8000);  // as many censored entries
  const auto fit = tail_fit("half", samples, {0.0, 0.5, 1.0, 1.5, 2.0, 2.5});
  CHECK(fit.censored == 4000);
  CHECK(fit.log_survival.front() == doctest::Approx(std::log(0.5)));
}

TEST_CASE("i.i.d. report inconclusive without enough data") {
  CHECK(iid_report(synthetic::increments(1, 10, 20)).status == Status::Inconclusive);
}

TEST_CASE("i.i.d. report is calibrated on synthetic nulls") {
  const int trials = 120;
  int fails = 0;
  for (int trial = 0; trial < trials; ++trial) {
    const auto report = iid_report(synthetic::increments(1000 + trial, 50, 40));
    REQUIRE(report.status != Status::Inconclusive);
    REQUIRE(report.tests.size() == 9);
    fails += report.status == Status::Fail;
  }
  CAPTURE(fails);
  CHECK(calibrated(fails, trials, 0.03));
  CHECK(calibrated(fails, trials, 0.01));
}

TEST_CASE("i.i.d. report rejects AR(1) increments") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto report = iid_report(synthetic::increments(seed, 50, 40, 0.5));
    CHECK(report.status == Status::Fail);
  }
}

TEST_CASE("occupancy without recoveries is full") {
  const Construction c{3, 1.0, 2.0, 0.0};
  const auto theta = estimate_theta(c, 20.0, {-20, 20}, 0, 5);
  CHECK(theta.theta_hat == 1.0);
}

TEST_CASE("occupancy increases with mu") {
  double previous = 0.0;
  for (double mu : {2.0, 3.0, 4.0}) {
    const Construction c{8, 1.0, mu, 1.0};
    const auto theta = estimate_theta(c, 40.0, {-60, 60}, 0, 30);
    CAPTURE(mu);
    CHECK(theta.theta_hat > previous);
    CHECK(theta.theta_hat > 0.1);
    CHECK(theta.theta_hat < 1.0);
    previous = theta.theta_hat;
  }
}

TEST_CASE("occupancy is reproducible across disjoint batches") {
  const Construction c{41, 1.0, 2.0, 1.0};
  const auto a = estimate_theta(c, 60.0, {-80, 80}, 0, 150);
  const auto b = estimate_theta(c, 60.0, {-80, 80}, 150, 150);
  CAPTURE(a.theta_hat);
  CAPTURE(b.theta_hat);
  CHECK(std::abs(a.theta_hat - b.theta_hat) < 4.0 * std::hypot(a.std_error, b.std_error));
  CHECK(std::abs(a.theta_hat - b.theta_hat) < 0.03);
  CHECK(std::abs(a.left_half - a.right_half) < 0.04);
}

TEST_CASE("density report without survivors is inconclusive") {
  std::vector<ReplicaSummary> runs(3);
  for (auto& r : runs) {
    r.died_at = 1.0;
    r.samples.push_back({10.0, std::nullopt, std::nullopt, 0});
  }
  const std::vector<double> times{10.0};
  const auto report = density_report(runs, times, {0.3, 0.01, 100}, 0.6, 0.3, 5.0);
  REQUIRE(report.entries.size() == 1);
  CHECK(report.entries[0].status == Status::Inconclusive);
  CHECK(report.status == Status::Inconclusive);
}

TEST_CASE("complete convergence: empty and far sets") {
  const Construction c{12, 1.0, 2.0, 1.0};
  BatchRequest req;
  req.replicas = 60;
  req.t_max = 10.0;
  req.sample_times = {10.0};
  req.query = SiteInterval{-2, 200};
  const auto standard = run_standard_batch(c, req);
  const auto all = run_all_infected_batch(c, req);
  const std::vector<std::set<std::int64_t>> f_sets{{}, {150, 190}};
  const auto report = complete_convergence_report(standard, all, f_sets, 10.0, 5.0);
  REQUIRE(report.entries.size() == 2);
  CHECK(report.entries[0].left.value == 1.0);
  CHECK(report.entries[0].right == 1.0);
  CHECK(report.entries[0].overlap);
  // Far sites: never reached by the standard process at t = 10, while the
  // process from all of Z still occupies them; the identity is asymptotic.
  CHECK(report.entries[1].left.value == 1.0);
  CHECK(report.entries[1].phi.value < 1.0);
  CHECK(report.entries[1].right <= 1.0);
}

TEST_CASE("density and speed at the contact process point") {
  // lambda == mu: the comparison must also hold for the plain contact process.
  const Construction c{77, 2.0, 2.0, 1.0};
  std::vector<Increment> incs;
  BreakpointOptions o;
  o.horizon = 250.0;
  o.survival_horizon = 50.0;
  std::vector<BreakpointRun> bp;
  for (std::int64_t r = 0; r < 30; ++r) bp.push_back(detect_breakpoints(c, r, o));
  const auto alpha = estimate_alpha(regeneration_sample(bp, 8).pooled());
  const auto theta = estimate_theta(c, 60.0, {-60, 60}, 1000, 40);
  BatchRequest req;
  req.replicas = 300;
  req.t_max = 100.0;
  req.sample_times = {100.0};
  const auto runs = run_standard_batch(c, req);
  const auto beta = estimate_beta(runs, 50.0);
  const std::vector<double> times{100.0};
  const auto report = density_report(runs, times, alpha, theta.theta_hat, beta.value, 50.0);
  REQUIRE(report.entries.size() == 1);
  const auto& e = report.entries[0];
  CAPTURE(alpha.alpha_hat);
  CAPTURE(alpha.std_error);
  CAPTURE(e.mean_ratio);
  CAPTURE(e.target);
  CAPTURE(e.mean_left);
  CHECK(e.survivors > 100);
  // Small batches: compare in standard error units rather than the fixed
  // relative tolerance.
  const double target_se = 2.0 * theta.theta_hat * alpha.std_error;
  CHECK(std::abs(e.mean_ratio - e.target) < 3.0 * std::hypot(e.ratio_stderr, target_se));
  CHECK(std::abs(e.mean_left + alpha.alpha_hat) < 3.0 * std::hypot(e.left_stderr, alpha.std_error));
}
