#include "tscp/synthetic.hpp"

#include <algorithm>
#include <cmath>

#include "tscp/stats.hpp"

namespace tscp::synthetic {

UniformStream::UniformStream(std::uint64_t seed, std::uint64_t stream)
    : key_(detail::stream_key(seed ^ 0x73796e7468657469ULL, static_cast<std::int64_t>(stream), -1)) {}

double UniformStream::next() {
  return detail::open_unit(detail::mix64(key_ + (++counter_) * 0x9e3779b97f4a7c15ULL));
}

std::vector<double> normal_samples(std::uint64_t seed, std::uint64_t stream, std::size_t n) {
  UniformStream u(seed, stream);
  std::vector<double> out(n);
  for (double& v : out) v = stats::normal_quantile(u.next());
  return out;
}

std::vector<double> exponential_samples(std::uint64_t seed, std::uint64_t stream, std::size_t n,
                                        double rate) {
  UniformStream u(seed, stream);
  std::vector<double> out(n);
  for (double& v : out) v = -std::log(u.next()) / rate;
  return out;
}

namespace {

// Geometric on {1, 2, ...} with success probability p, by inversion.
std::int64_t geometric(double u, double p) {
  return 1 + static_cast<std::int64_t>(std::floor(std::log(u) / std::log1p(-p)));
}

}  // namespace

std::vector<IncrementSeries> increments(std::uint64_t seed, std::int64_t replicas,
                                        std::int64_t per_replica, double ar) {
  std::vector<IncrementSeries> out;
  const double innovation = std::sqrt(1.0 - ar * ar);
  for (std::int64_t r = 0; r < replicas; ++r) {
    UniformStream u(seed, static_cast<std::uint64_t>(r));
    IncrementSeries s;
    s.replica_id = r;
    double zx = stats::normal_quantile(u.next());
    double zp = stats::normal_quantile(u.next());
    double zm = stats::normal_quantile(u.next());
    for (std::int64_t n = 1; n <= per_replica; ++n) {
      if (n > 1) {
        zx = ar * zx + innovation * stats::normal_quantile(u.next());
        zp = ar * zp + innovation * stats::normal_quantile(u.next());
        zm = ar * zm + innovation * stats::normal_quantile(u.next());
      }
      auto unit = [](double z) { return std::clamp(stats::normal_cdf(z), 1e-300, 1.0 - 1e-16); };
      Increment inc;
      inc.n = n;
      inc.x = geometric(unit(zx), 0.35);
      inc.psi = -std::log(unit(zp)) * 8.0;
      inc.m_prev = geometric(unit(zm), 0.5) - 1;
      s.increments.push_back(inc);
    }
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace tscp::synthetic
