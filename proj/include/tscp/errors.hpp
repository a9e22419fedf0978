#pragma once

#include <stdexcept>
#include <string>

namespace tscp {

/// Rates or model parameters outside the supported domain (e.g. mu < lambda).
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed caller input: bad intervals, horizons, non-comparable pairs.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// The truncated lattice could not certify a queried site or tracked edge.
class WindowBreach : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A pathwise identity that must hold by construction was violated.
class EngineViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Not enough data for a statistical procedure to reach a verdict.
class InsufficientData : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace tscp
