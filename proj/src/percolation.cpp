#include "tscp/percolation.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "tscp/errors.hpp"
#include "tscp/replicas.hpp"
#include "tscp/stats.hpp"

namespace tscp {

namespace {

constexpr std::uint64_t kSiteTag = 0x7a3f5c19e2d4b681ULL;
constexpr std::uint64_t kBondTag = 0x31c8e5a9d70f2b46ULL;

std::uint64_t field_key(std::uint64_t seed, std::int64_t field, std::uint64_t tag) {
  std::uint64_t h = detail::mix64(seed ^ tag);
  return detail::mix64(h ^ (static_cast<std::uint64_t>(field) * 0xd1342543de82ef95ULL));
}

double lattice_uniform(std::uint64_t key, std::int64_t y, std::int64_t n, std::uint64_t extra) {
  std::uint64_t h = detail::mix64(key ^ (static_cast<std::uint64_t>(y) * 0xa0761d6478bd642fULL));
  h = detail::mix64(h ^ (static_cast<std::uint64_t>(n) * 0xe7037ed1a0b428dbULL + extra));
  return detail::open_unit(h);
}

void check_probability(double p, const char* name) {
  if (!(p >= 0.0 && p <= 1.0)) throw InputError(std::string(name) + " must lie in [0, 1]");
}

std::int64_t truncation(std::int64_t n_max) { return -(2 * n_max + 2); }

std::vector<std::int64_t> initial_sites(ClusterStart start, std::int64_t n_max) {
  if (start == ClusterStart::Origin) return {0};
  std::vector<std::int64_t> sites;
  for (std::int64_t x = truncation(n_max); x <= 0; x += 2) sites.push_back(x);
  return sites;
}

// Candidate sites of the next generation, sorted and distinct.
std::vector<std::int64_t> neighbours(const std::vector<std::int64_t>& current, std::int64_t lo) {
  std::vector<std::int64_t> out;
  out.reserve(current.size() + 1);
  for (std::int64_t x : current) {
    for (std::int64_t y : {x - 1, x + 1}) {
      if (y < lo) continue;
      if (out.empty() || out.back() < y) out.push_back(y);
    }
  }
  return out;
}

bool contains(const std::vector<std::int64_t>& sorted, std::int64_t x) {
  return std::binary_search(sorted.begin(), sorted.end(), x);
}

ClusterSlice make_slice(std::int64_t n, std::vector<std::int64_t> sites) {
  ClusterSlice s;
  s.n = n;
  if (!sites.empty()) s.rightmost = sites.back();
  s.sites = std::move(sites);
  return s;
}

}  // namespace

SiteField::SiteField(double p, std::uint64_t seed, std::int64_t field)
    : p_(p), seed_(seed), field_(field), key_(field_key(seed, field, kSiteTag)) {
  check_probability(p, "site probability");
}

double SiteField::uniform(std::int64_t y, std::int64_t n) const {
  return lattice_uniform(key_, y, n, 0);
}

std::vector<ClusterSlice> grow_cluster(const SiteField& field, std::int64_t n_max,
                                       ClusterStart start) {
  if (n_max < 0) throw InputError("n_max must be nonnegative");
  const bool half_line = start == ClusterStart::LeftHalfLine;
  std::vector<ClusterSlice> slices;
  slices.push_back(make_slice(0, initial_sites(start, n_max)));
  for (std::int64_t n = 1; n <= n_max && !slices.back().empty(); ++n) {
    const std::int64_t lo = half_line ? truncation(n_max) + n : INT64_MIN;
    std::vector<std::int64_t> next;
    for (std::int64_t y : neighbours(slices.back().sites, lo)) {
      if (field.open(y, n)) next.push_back(y);
    }
    slices.push_back(make_slice(n, std::move(next)));
  }
  return slices;
}

ContainmentVerdict bond_site_coupling_check(double p_tilde, std::uint64_t seed,
                                            std::int64_t n_max, std::int64_t fields,
                                            std::int64_t first_field, int workers) {
  check_probability(p_tilde, "bond probability");
  if (n_max < 0) throw InputError("n_max must be nonnegative");
  if (fields < 0) throw InputError("field count must be nonnegative");
  ContainmentVerdict verdict;
  verdict.p_tilde = p_tilde;
  verdict.p_site = p_tilde * (2.0 - p_tilde);

  auto per_field = map_replicas(first_field, fields, workers, [&](std::int64_t f) {
    const std::uint64_t key = field_key(seed, f, kBondTag);
    // Bond from (x, n) to (x + d, n + 1), d = -1 or +1.
    auto bond = [&](std::int64_t x, std::int64_t n, std::int64_t d) {
      return lattice_uniform(key, x, n, d > 0 ? 1 : 2) < p_tilde;
    };
    std::vector<Violation> found;
    std::vector<std::int64_t> bonds = initial_sites(ClusterStart::LeftHalfLine, n_max);
    std::vector<std::int64_t> sites = bonds;
    std::int64_t generations = 0;
    for (std::int64_t n = 0; n < n_max; ++n) {
      const std::int64_t lo = truncation(n_max) + n + 1;
      std::vector<std::int64_t> next_bonds;
      for (std::int64_t y : neighbours(bonds, lo)) {
        const bool from_left = contains(bonds, y - 1) && bond(y - 1, n, +1);
        const bool from_right = contains(bonds, y + 1) && bond(y + 1, n, -1);
        if (from_left || from_right) next_bonds.push_back(y);
      }
      std::vector<std::int64_t> next_sites;
      for (std::int64_t y : neighbours(sites, lo)) {
        if (bond(y - 1, n, +1) || bond(y + 1, n, -1)) next_sites.push_back(y);
      }
      ++generations;
      for (std::int64_t y : next_bonds) {
        if (!contains(next_sites, y) && found.size() < 20) {
          found.push_back({f, static_cast<double>(n + 1), y, "bond cluster site missing from site cluster"});
        }
      }
      bonds = std::move(next_bonds);
      sites = std::move(next_sites);
      if (bonds.empty()) break;
    }
    return std::make_pair(generations, std::move(found));
  });
  for (auto& [generations, found] : per_field) {
    ++verdict.fields_checked;
    verdict.generations_checked += generations;
    verdict.violations.insert(verdict.violations.end(), found.begin(), found.end());
  }
  return verdict;
}

PercolationSpeed percolation_edge_speed(double p, std::uint64_t seed, std::int64_t replicas,
                                        std::int64_t n_max, int workers, double min_r2) {
  check_probability(p, "site probability");
  if (n_max < 1) throw InputError("n_max must be positive");
  if (replicas < 0) throw InputError("replica count must be nonnegative");

  struct Outcome {
    // Empty unless the origin cluster reaches n_max.
    std::vector<std::int64_t> rightmost;
    bool mismatch = false;
  };
  const auto outcomes = map_replicas(0, replicas, workers, [&](std::int64_t r) {
    const SiteField field(p, seed, r);
    Outcome o;
    const auto origin = grow_cluster(field, n_max, ClusterStart::Origin);
    if (static_cast<std::int64_t>(origin.size()) != n_max + 1 || origin.back().empty()) return o;
    const auto half = grow_cluster(field, n_max, ClusterStart::LeftHalfLine);
    for (std::int64_t n = 0; n <= n_max; ++n) {
      const auto& a = origin[static_cast<std::size_t>(n)];
      o.rightmost.push_back(*a.rightmost);
      if (n > 0 && half[static_cast<std::size_t>(n)].rightmost != a.rightmost) o.mismatch = true;
    }
    return o;
  });

  PercolationSpeed out;
  out.p = p;
  out.n_max = n_max;
  out.replicas = replicas;
  std::vector<double> slopes;
  for (const Outcome& o : outcomes) {
    if (o.rightmost.empty()) continue;
    slopes.push_back(static_cast<double>(o.rightmost.back()) / static_cast<double>(n_max));
    out.half_line_mismatches += o.mismatch ? 1 : 0;
  }
  out.survivors = static_cast<std::int64_t>(slopes.size());
  if (slopes.empty()) return out;
  const auto m = stats::moments(slopes);
  out.a_hat = m.mean;
  out.std_error = slopes.size() > 1 ? m.std_error() : 0.0;
  out.deviation_slope = out.a_hat / 2.0;

  out.deviation_fraction.assign(static_cast<std::size_t>(n_max) + 1, 0.0);
  std::vector<std::optional<double>> last_deviation;
  for (const Outcome& o : outcomes) {
    std::int64_t last = 0;
    for (std::int64_t n = 1; n <= n_max && !o.rightmost.empty(); ++n) {
      if (static_cast<double>(o.rightmost[static_cast<std::size_t>(n)]) <
          out.deviation_slope * static_cast<double>(n)) {
        out.deviation_fraction[static_cast<std::size_t>(n)] += 1.0 / static_cast<double>(replicas);
        last = n;
      }
    }
    // Clusters without a deviation, dead or alive, count in the denominator.
    if (last > 0) {
      last_deviation.emplace_back(static_cast<double>(last));
    } else {
      last_deviation.emplace_back();
    }
  }
  try {
    out.tail = tail_fit("percolation last lower deviation", last_deviation,
                        tail_thresholds(last_deviation, 8, 0.0, 0.99, true), min_r2);
  } catch (const InsufficientData&) {
  }
  if (out.half_line_mismatches > 0) {
    out.status = Status::Fail;
  } else if (out.tail) {
    out.status = out.tail->status;
  } else if (out.a_hat == 1.0) {
    // No deviations at all: R_n = n on every survivor.
    out.status = Status::Pass;
  }
  return out;
}

double phi_bound(double a, double b, double c) {
  if (!(a > 0.0) || !(b > 0.0) || !(c > 0.0)) throw InputError("a, b and c must be positive");
  if (a >= c) throw ParameterError("phi bound needs a < c");
  return (c - a) / (c + b);
}

void write_cluster_csv(std::ostream& out, std::span<const std::vector<ClusterSlice>> clusters,
                       std::int64_t first_replica, bool header) {
  if (header) out << "replica,n,size,R_n\n";
  for (std::size_t i = 0; i < clusters.size(); ++i) {
    for (const ClusterSlice& s : clusters[i]) {
      out << first_replica + static_cast<std::int64_t>(i) << ',' << s.n << ',' << s.sites.size()
          << ',';
      if (s.rightmost) out << *s.rightmost;
      out << '\n';
    }
  }
}

}  // namespace tscp
