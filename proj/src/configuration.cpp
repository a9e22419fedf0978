#include "tscp/configuration.hpp"

#include <algorithm>
#include <sstream>

#include "tscp/errors.hpp"

namespace tscp {

State state_from_int(int v) {
  if (v < -1 || v > 1) throw InputError("site state must be -1, 0 or 1");
  return static_cast<State>(v);
}

Configuration::Configuration(State left_default, State right_default, std::int64_t boundary)
    : left_default_(left_default), right_default_(right_default), boundary_(boundary) {}

Configuration Configuration::standard() { return single_site(0); }

Configuration Configuration::single_site(std::int64_t k) {
  Configuration c(State::NeverInfected, State::NeverInfected, 0);
  c.set(k, State::Infected);
  return c;
}

Configuration Configuration::left_half_line() {
  return Configuration(State::Infected, State::NeverInfected, 1);
}

Configuration Configuration::all_infected() {
  return Configuration(State::Infected, State::Infected, 0);
}

Configuration Configuration::from_set(const std::set<std::int64_t>& sites, State background) {
  Configuration c(background, background, 0);
  for (auto x : sites) c.set(x, State::Infected);
  return c;
}

State Configuration::at(std::int64_t x) const {
  if (auto it = deviations_.find(x); it != deviations_.end()) return it->second;
  return default_at(x);
}

void Configuration::set(std::int64_t x, State s) {
  if (s == default_at(x)) {
    deviations_.erase(x);
  } else {
    deviations_[x] = s;
  }
}

std::int64_t Configuration::span_lo() const {
  std::int64_t lo = boundary_ - 1;
  if (!deviations_.empty()) lo = std::min(lo, deviations_.begin()->first);
  return lo;
}

std::int64_t Configuration::span_hi() const {
  std::int64_t hi = boundary_;
  if (!deviations_.empty()) hi = std::max(hi, deviations_.rbegin()->first);
  return hi;
}

std::optional<std::int64_t> Configuration::rightmost_infected() const {
  if (infinite_right_infection()) return std::nullopt;
  for (std::int64_t x = span_hi(); x >= span_lo(); --x) {
    if (at(x) == State::Infected) return x;
  }
  return std::nullopt;
}

std::optional<std::int64_t> Configuration::leftmost_infected() const {
  if (infinite_left_infection()) return std::nullopt;
  for (std::int64_t x = span_lo(); x <= span_hi(); ++x) {
    if (at(x) == State::Infected) return x;
  }
  return std::nullopt;
}

std::int64_t Configuration::infected_count() const {
  std::int64_t n = 0;
  for (std::int64_t x = span_lo(); x <= span_hi(); ++x) n += at(x) == State::Infected;
  return n;
}

std::set<std::int64_t> Configuration::infected_sites() const {
  if (!finitely_infected()) throw InputError("infinitely many infected sites");
  std::set<std::int64_t> out;
  for (std::int64_t x = span_lo(); x <= span_hi(); ++x) {
    if (at(x) == State::Infected) out.insert(x);
  }
  return out;
}

bool Configuration::dominated_by(const Configuration& other) const {
  if (value(left_default_) > value(other.left_default_)) return false;
  if (value(right_default_) > value(other.right_default_)) return false;
  const std::int64_t lo = std::min(span_lo(), other.span_lo()) - 1;
  const std::int64_t hi = std::max(span_hi(), other.span_hi()) + 1;
  for (std::int64_t x = lo; x <= hi; ++x) {
    if (value(at(x)) > value(other.at(x))) return false;
  }
  return true;
}

std::string Configuration::run_length(std::int64_t lo, std::int64_t hi) const {
  std::ostringstream out;
  std::int64_t x = lo;
  bool first = true;
  while (x <= hi) {
    const State s = at(x);
    std::int64_t run = 0;
    while (x <= hi && at(x) == s) {
      ++run;
      ++x;
    }
    if (!first) out << ',';
    out << run << 'x' << value(s);
    first = false;
  }
  return out.str();
}

bool operator==(const Configuration& a, const Configuration& b) {
  if (a.left_default_ != b.left_default_ || a.right_default_ != b.right_default_) return false;
  const std::int64_t lo = std::min(a.span_lo(), b.span_lo());
  const std::int64_t hi = std::max(a.span_hi(), b.span_hi());
  for (std::int64_t x = lo; x <= hi; ++x) {
    if (a.at(x) != b.at(x)) return false;
  }
  return true;
}

}  // namespace tscp
