#pragma once

// Deterministic synthetic samples for calibrating the statistical tests
// under their null hypotheses (and under simple alternatives).

#include <cstdint>
#include <vector>

#include "tscp/estimators.hpp"

namespace tscp::synthetic {

/// Counter-based uniform draws in (0, 1), deterministic in (seed, stream, i).
class UniformStream {
 public:
  UniformStream(std::uint64_t seed, std::uint64_t stream);
  double next();

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

std::vector<double> normal_samples(std::uint64_t seed, std::uint64_t stream, std::size_t n);
std::vector<double> exponential_samples(std::uint64_t seed, std::uint64_t stream, std::size_t n,
                                        double rate);

/// Increment sequences with geometric X and M, exponential Psi, coupled
/// through a Gaussian AR(1) latent process with lag-1 coefficient `ar`
/// (0 gives i.i.d. increments).
std::vector<IncrementSeries> increments(std::uint64_t seed, std::int64_t replicas,
                                        std::int64_t per_replica, double ar = 0.0);

}  // namespace tscp::synthetic
