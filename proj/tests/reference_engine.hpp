#pragma once

// Test-only oracle: evolves a configuration by literally merging every
// event in a fixed window (window_events) and applying apply_event one at a
// time. Slow and independent of the engine's heap and lazy cursors.

#include <cstdint>
#include <vector>

#include "tscp/configuration.hpp"
#include "tscp/events.hpp"
#include "tscp/process.hpp"

namespace tscp::testing {

struct ReferenceRun {
  std::vector<Configuration> at_samples;
};

/// Infinite infected sides are replaced by infected stretches of length
/// `pad` followed by state `far` (a truncation the caller must keep far
/// from the sites it compares).
inline ReferenceRun reference_evolve(const Construction& c, std::int64_t replica,
                                     Configuration initial, double start, double t_max,
                                     const std::vector<double>& samples, std::int64_t pad,
                                     Dynamics dynamics = Dynamics::ThreeState) {
  const std::int64_t lo = initial.span_lo() - pad;
  const std::int64_t hi = initial.span_hi() + pad;
  Configuration config(State::NeverInfected, State::NeverInfected, 0);
  if (!initial.finitely_infected()) {
    for (std::int64_t x = lo; x <= hi; ++x) config.set(x, initial.at(x));
  } else {
    config = initial;
  }
  ReferenceRun run;
  std::size_t next = 0;
  for (const Event& e : window_events(c, replica, lo - pad, hi + pad, t_max)) {
    while (next < samples.size() && samples[next] < e.time) {
      run.at_samples.push_back(config);
      ++next;
    }
    if (e.time <= start) continue;
    config = apply_event(config, e, dynamics);
  }
  while (next < samples.size()) {
    run.at_samples.push_back(config);
    ++next;
  }
  return run;
}

}  // namespace tscp::testing
