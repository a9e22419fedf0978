#pragma once

// Oriented site percolation on the even lattice {(y, n): n >= 0, y + n even},
// the bond-to-site domination coupling, and the geometric bound on phi.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "tscp/couplings.hpp"
#include "tscp/estimators.hpp"

namespace tscp {

/// Bernoulli(p) sites realized lazily from a hash of (seed, field, y, n).
/// Fields with different p but the same (seed, field) share their uniforms,
/// so openness is monotone in p site by site.
class SiteField {
 public:
  SiteField(double p, std::uint64_t seed, std::int64_t field = 0);

  double uniform(std::int64_t y, std::int64_t n) const;
  bool open(std::int64_t y, std::int64_t n) const { return uniform(y, n) < p_; }

  double p() const { return p_; }
  std::uint64_t seed() const { return seed_; }
  std::int64_t field() const { return field_; }

 private:
  double p_;
  std::uint64_t seed_;
  std::int64_t field_;
  std::uint64_t key_;
};

enum class ClusterStart : std::uint8_t {
  /// A_0 = {0}.
  Origin,
  /// A_0 = all even x <= 0.
  LeftHalfLine,
};

struct ClusterSlice {
  std::int64_t n = 0;
  /// Sorted. For the left half line only sites known exactly are kept (see
  /// grow_cluster).
  std::vector<std::int64_t> sites;
  std::optional<std::int64_t> rightmost;

  bool empty() const { return sites.empty(); }
};

/// Slices n = 0 .. n_max (fewer when the cluster dies out; an empty slice is
/// absorbing and is the last one returned). A_{n+1} holds the open sites y of
/// generation n+1 with y - 1 or y + 1 in A_n. The generation-0 sites are the
/// starting set and need not be open.
///
/// The left half line is truncated at x >= -(2 n_max + 2); slice n keeps the
/// sites y >= -(2 n_max + 2) + n, which the truncation cannot affect.
std::vector<ClusterSlice> grow_cluster(const SiteField& field, std::int64_t n_max,
                                       ClusterStart start = ClusterStart::Origin);

struct ContainmentVerdict {
  double p_tilde = 0.0;
  double p_site = 0.0;
  std::int64_t fields_checked = 0;
  std::int64_t generations_checked = 0;
  /// replica = field index, time = generation, site = y.
  std::vector<Violation> violations;

  bool passed() const { return violations.empty(); }
};

/// Bond percolation with parameter p_tilde and the derived site percolation
/// (a site is open when one of its two incoming bonds is, so
/// p = p_tilde (2 - p_tilde)), both grown from the left half line on shared
/// bonds. Checks B'_n within A'_n for every n <= n_max.
ContainmentVerdict bond_site_coupling_check(double p_tilde, std::uint64_t seed,
                                            std::int64_t n_max, std::int64_t fields = 1,
                                            std::int64_t first_field = 0, int workers = 1);

struct PercolationSpeed {
  double p = 0.0;
  std::int64_t n_max = 0;
  std::int64_t replicas = 0;
  std::int64_t survivors = 0;
  double a_hat = 0.0;
  double std_error = 0.0;
  /// Deviation slope a = a_hat / 2.
  double deviation_slope = 0.0;
  /// P(R_n < a n, cluster reaches n_max) for n = 0 .. n_max.
  std::vector<double> deviation_fraction;
  /// Log-linear fit of P(L >= n, cluster reaches n_max), L being the last
  /// generation with R_L < a L. It bounds the per-generation probability
  /// from above and, unlike it, is monotone in n.
  std::optional<TailFit> tail;
  /// Origin clusters that reached n_max and whose R_n differed from the
  /// left-half-line R'_n (must be zero).
  std::int64_t half_line_mismatches = 0;
  Status status = Status::Inconclusive;
};

/// a_hat = mean(R_{n_max} / n_max) over fields whose origin cluster reaches
/// n_max, plus a log-linear fit of the lower deviation tail. Also checks
/// R_n = R'_n pathwise on surviving clusters.
PercolationSpeed percolation_edge_speed(double p, std::uint64_t seed, std::int64_t replicas,
                                        std::int64_t n_max, int workers = 1,
                                        double min_r2 = 0.9);

/// (c - a) / (c + b). Throws ParameterError when a >= c and InputError for
/// nonpositive arguments.
double phi_bound(double a, double b, double c);

/// CSV rows (replica, n, size, R_n) for origin clusters; `header` lets a
/// caller stream one replica at a time.
void write_cluster_csv(std::ostream& out, std::span<const std::vector<ClusterSlice>> clusters,
                       std::int64_t first_replica = 0, bool header = true);

}  // namespace tscp
