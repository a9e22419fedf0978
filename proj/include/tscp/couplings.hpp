#pragma once

// Pathwise checks of the coupling identities on a shared construction. Any
// violation is an engine bug, never a statistical event.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tscp/configuration.hpp"
#include "tscp/events.hpp"
#include "tscp/process.hpp"

namespace tscp {

enum class CouplingKind : std::uint8_t {
  /// eta <= eta' initially implies eta_t <= eta'_t.
  Monotone,
  /// The standard process agrees with the left-infected half line on
  /// x >= l_t while alive.
  RightmostIdentity,
  /// I_t equals the all-infected contact process restricted to [l_t, r_t].
  Sandwich,
  /// The standard process dominates every restart from (eta_k, tau_k).
  RestartDomination,
};

inline constexpr CouplingKind kAllCouplingKinds[] = {
    CouplingKind::Monotone, CouplingKind::RightmostIdentity, CouplingKind::Sandwich,
    CouplingKind::RestartDomination};

const char* to_string(CouplingKind kind);
CouplingKind coupling_kind_from_string(const std::string& name);

struct Violation {
  std::int64_t replica = 0;
  double time = 0.0;
  std::int64_t site = 0;
  std::string detail;
};

struct Verdict {
  CouplingKind kind = CouplingKind::Monotone;
  std::int64_t replicas_checked = 0;
  std::int64_t sample_times_checked = 0;
  std::vector<Violation> violations;

  bool passed() const { return violations.empty(); }
};

struct CouplingOptions {
  std::int64_t first_replica = 0;
  std::int64_t replicas = 300;
  double t_max = 100.0;
  /// Empty means 0, 1, ..., floor(t_max).
  std::vector<double> sample_grid;
  /// Monotone: the pair (eta, eta'); unset draws a random comparable pair
  /// of finite configurations per replica.
  std::optional<std::pair<Configuration, Configuration>> monotone_pair;
  /// RestartDomination: restarts checked per replica.
  std::int64_t k_cap = 50;
  int workers = 1;
};

/// Throws ParameterError when mu < lambda and InputError for a
/// non-comparable Monotone pair.
Verdict verify_coupling(CouplingKind kind, const Construction& construction,
                        const CouplingOptions& options);

struct ReductionVerdict {
  std::int64_t replicas_checked = 0;
  std::int64_t sample_times_checked = 0;
  std::vector<Violation> violations;

  bool passed() const { return violations.empty(); }
};

/// With lambda == mu the process from the standard configuration and the
/// contact process from {0} have the same infected set at every grid time.
/// Throws ParameterError unless lambda == mu.
ReductionVerdict verify_reduction(const Construction& construction,
                                  const CouplingOptions& options);

/// A random pair eta <= eta' on [-radius, radius], deterministic in
/// (seed, replica).
std::pair<Configuration, Configuration> random_comparable_pair(std::uint64_t seed,
                                                               std::int64_t replica,
                                                               std::int64_t radius = 8);

}  // namespace tscp
