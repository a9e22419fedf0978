#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>

namespace tscp {

/// Site states: -1 never infected, 0 previously infected, 1 infected.
enum class State : std::int8_t { NeverInfected = -1, Recovered = 0, Infected = 1 };

constexpr int value(State s) { return static_cast<int>(s); }
State state_from_int(int v);

/// A {-1,0,1}-valued lattice configuration that differs from two default
/// states at finitely many sites. `left_default` holds on x < boundary and
/// `right_default` on x >= boundary unless overridden by a deviation.
class Configuration {
 public:
  Configuration() = default;
  Configuration(State left_default, State right_default, std::int64_t boundary = 0);

  /// Origin infected, every other site never infected.
  static Configuration standard();
  /// Site k infected, every other site never infected.
  static Configuration single_site(std::int64_t k);
  /// Infected on x <= 0, never infected on x >= 1.
  static Configuration left_half_line();
  /// Every site infected (the contact process started from Z).
  static Configuration all_infected();
  /// `sites` infected, all others in state `background`.
  static Configuration from_set(const std::set<std::int64_t>& sites,
                                State background = State::NeverInfected);

  State at(std::int64_t x) const;
  void set(std::int64_t x, State s);

  State left_default() const { return left_default_; }
  State right_default() const { return right_default_; }
  std::int64_t boundary() const { return boundary_; }
  const std::map<std::int64_t, State>& deviations() const { return deviations_; }

  /// Smallest and largest sites at which the configuration is not simply
  /// "left default" or "right default" (boundary and deviations).
  std::int64_t span_lo() const;
  std::int64_t span_hi() const;

  bool infinite_left_infection() const { return left_default_ == State::Infected; }
  bool infinite_right_infection() const { return right_default_ == State::Infected; }
  bool finitely_infected() const {
    return !infinite_left_infection() && !infinite_right_infection();
  }

  std::optional<std::int64_t> rightmost_infected() const;
  std::optional<std::int64_t> leftmost_infected() const;
  /// Number of infected sites; only meaningful when finitely_infected().
  std::int64_t infected_count() const;
  std::set<std::int64_t> infected_sites() const;

  /// Component-wise partial order.
  bool dominated_by(const Configuration& other) const;

  /// Run-length encoding of the states on [lo, hi], e.g. "3x-1,1x1,2x0".
  std::string run_length(std::int64_t lo, std::int64_t hi) const;

  friend bool operator==(const Configuration& a, const Configuration& b);

 private:
  State default_at(std::int64_t x) const {
    return x < boundary_ ? left_default_ : right_default_;
  }

  State left_default_ = State::NeverInfected;
  State right_default_ = State::NeverInfected;
  std::int64_t boundary_ = 0;
  std::map<std::int64_t, State> deviations_;
};

}  // namespace tscp
