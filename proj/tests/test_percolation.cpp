#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "tscp/errors.hpp"
#include "tscp/percolation.hpp"
#include "tscp/synthetic.hpp"

using namespace tscp;

namespace {

bool subset(const std::vector<std::int64_t>& a, const std::vector<std::int64_t>& b) {
  return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

double survival_fraction(double p, std::uint64_t seed, std::int64_t first, std::int64_t count,
                         std::int64_t n_max) {
  std::int64_t alive = 0;
  for (std::int64_t f = first; f < first + count; ++f) {
    const auto slices = grow_cluster(SiteField(p, seed, f), n_max);
    alive += (static_cast<std::int64_t>(slices.size()) == n_max + 1 && !slices.back().empty());
  }
  return static_cast<double>(alive) / static_cast<double>(count);
}

}  // namespace

TEST_CASE("all sites open fills the light cone") {
  const auto slices = grow_cluster(SiteField(1.0, 3), 20);
  REQUIRE(slices.size() == 21);
  for (const ClusterSlice& s : slices) {
    std::vector<std::int64_t> expected;
    for (std::int64_t y = -s.n; y <= s.n; y += 2) expected.push_back(y);
    CHECK(s.sites == expected);
    CHECK(s.rightmost == s.n);
  }
}

TEST_CASE("no open sites leaves only the starting point") {
  const auto slices = grow_cluster(SiteField(0.0, 3), 20);
  REQUIRE(slices.size() == 2);
  CHECK(slices[0].sites == std::vector<std::int64_t>{0});
  CHECK(slices[1].empty());
  CHECK_FALSE(slices[1].rightmost);
}

TEST_CASE("cluster inputs are validated") {
  CHECK_THROWS_AS(SiteField(1.5, 0), InputError);
  CHECK_THROWS_AS(SiteField(-0.1, 0), InputError);
  CHECK_THROWS_AS(grow_cluster(SiteField(0.5, 0), -1), InputError);
  CHECK_THROWS_AS(bond_site_coupling_check(2.0, 0, 10), InputError);
}

TEST_CASE("clusters live on the even lattice") {
  for (std::int64_t f = 0; f < 20; ++f) {
    for (ClusterStart start : {ClusterStart::Origin, ClusterStart::LeftHalfLine}) {
      for (const ClusterSlice& s : grow_cluster(SiteField(0.7, 5, f), 40, start)) {
        CHECK(std::is_sorted(s.sites.begin(), s.sites.end()));
        for (std::int64_t y : s.sites) CHECK((y + s.n) % 2 == 0);
        if (!s.empty()) CHECK(s.rightmost == s.sites.back());
      }
    }
  }
}

TEST_CASE("clusters grow monotonically in p on shared draws") {
  synthetic::UniformStream u(17, 0);
  for (int trial = 0; trial < 60; ++trial) {
    double p1 = u.next();
    double p2 = u.next();
    if (p1 > p2) std::swap(p1, p2);
    const auto start = trial % 2 == 0 ? ClusterStart::Origin : ClusterStart::LeftHalfLine;
    const auto small = grow_cluster(SiteField(p1, 8, trial), 60, start);
    const auto large = grow_cluster(SiteField(p2, 8, trial), 60, start);
    CAPTURE(p1);
    CAPTURE(p2);
    REQUIRE(small.size() <= large.size());
    for (std::size_t n = 0; n < small.size(); ++n) CHECK(subset(small[n].sites, large[n].sites));
  }
}

TEST_CASE("half-line truncation keeps exact sites") {
  for (std::int64_t f = 0; f < 10; ++f) {
    const SiteField field(0.75, 2, f);
    const auto short_run = grow_cluster(field, 30, ClusterStart::LeftHalfLine);
    const auto long_run = grow_cluster(field, 80, ClusterStart::LeftHalfLine);
    for (std::size_t n = 0; n < short_run.size(); ++n) {
      const std::int64_t lo = -(2 * 30 + 2) + static_cast<std::int64_t>(n);
      std::vector<std::int64_t> restricted;
      for (std::int64_t y : long_run[n].sites) {
        if (y >= lo) restricted.push_back(y);
      }
      CHECK(short_run[n].sites == restricted);
    }
  }
}

TEST_CASE("survival at p = 0.9 is positive and stable across batches") {
  const double a = survival_fraction(0.9, 21, 0, 500, 200);
  const double b = survival_fraction(0.9, 21, 500, 500, 200);
  CAPTURE(a);
  CAPTURE(b);
  CHECK(a > 0.0);
  CHECK(std::abs(a - b) <= 0.03);
}

TEST_CASE("bond to site containment") {
  SUBCASE("all bonds open") {
    const auto v = bond_site_coupling_check(1.0, 1, 50, 3);
    CHECK(v.p_site == 1.0);
    CHECK(v.passed());
    CHECK(v.generations_checked == 150);
  }
  SUBCASE("no bonds open") {
    const auto v = bond_site_coupling_check(0.0, 1, 50, 3);
    CHECK(v.p_site == 0.0);
    CHECK(v.passed());
    // Both clusters are empty after generation 0.
    CHECK(v.generations_checked == 3);
  }
  SUBCASE("p_tilde = 0.8 over many fields") {
    const auto v = bond_site_coupling_check(0.8, 7, 500, 100);
    CHECK(v.p_site == doctest::Approx(0.96));
    CHECK(v.fields_checked == 100);
    CHECK(v.passed());
  }
}

TEST_CASE("edge speed with every site open") {
  const auto s = percolation_edge_speed(1.0, 4, 20, 50);
  CHECK(s.survivors == 20);
  CHECK(s.a_hat == 1.0);
  CHECK(s.half_line_mismatches == 0);
  CHECK(s.status == Status::Pass);
}

TEST_CASE("edge speed and lower deviations at p = 0.95") {
  const auto s = percolation_edge_speed(0.95, 42, 1000, 300);
  CAPTURE(s.a_hat);
  CHECK(s.survivors > 900);
  CHECK(s.a_hat > 0.0);
  CHECK(s.a_hat < 1.0);
  CHECK(s.half_line_mismatches == 0);
  REQUIRE(s.tail);
  CAPTURE(s.tail->r2);
  CHECK(s.tail->gamma_hat > 0.0);
  CHECK(s.tail->r2 >= 0.9);
  CHECK(s.status == Status::Pass);
}

TEST_CASE("edge speed without survivors is inconclusive") {
  const auto s = percolation_edge_speed(0.0, 4, 20, 50);
  CHECK(s.survivors == 0);
  CHECK(s.status == Status::Inconclusive);
}

TEST_CASE("phi bound examples and domain") {
  CHECK(phi_bound(1.0, 1.0, 3.0) == doctest::Approx(0.5));
  CHECK(phi_bound(0.5, 2.0, 2.5) == doctest::Approx(2.0 / 4.5));
  CHECK(phi_bound(3.0 - 1e-9, 1.0, 3.0) < 1e-9);
  CHECK_THROWS_AS(phi_bound(3.0, 1.0, 3.0), ParameterError);
  CHECK_THROWS_AS(phi_bound(4.0, 1.0, 3.0), ParameterError);
  CHECK_THROWS_AS(phi_bound(1.0, 0.0, 3.0), InputError);
}

TEST_CASE("phi bound gives the interval inclusion") {
  synthetic::UniformStream u(29, 0);
  for (int trial = 0; trial < 200; ++trial) {
    const double c = 0.1 + 5.0 * u.next();
    const double a = c * (0.01 + 0.98 * u.next());
    const double b = 0.1 + 5.0 * u.next();
    const double phi = 0.99 * phi_bound(a, b, c);
    for (double t : {1.0, 10.0, 100.0}) {
      for (int i = 0; i <= 200; ++i) {
        const double x = -b * phi * t + 2.0 * b * phi * t * i / 200.0;
        CAPTURE(a);
        CAPTURE(b);
        CAPTURE(c);
        CHECK(x - c * (1.0 - phi) * t <= -a * t);
        CHECK(x + c * (1.0 - phi) * t >= a * t);
      }
    }
  }
}

TEST_CASE("cluster CSV layout") {
  std::vector<std::vector<ClusterSlice>> clusters{grow_cluster(SiteField(0.0, 1), 3)};
  std::ostringstream os;
  write_cluster_csv(os, clusters, 5);
  CHECK(os.str() == "replica,n,size,R_n\n5,0,1,0\n5,1,0,\n");
}
