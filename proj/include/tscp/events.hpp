#pragma once

// Graphical construction: per-site Poisson streams of lambda-arrows,
// (mu - lambda)-arrows and recovery marks, realized lazily from a
// counter-based hash so any stream can be replayed without storage.

#include <array>
#include <cmath>
#include <cstdint>
#include <string_view>
#include <vector>

namespace tscp {

enum class EventKind : std::uint8_t {
  LambdaArrowRight = 0,
  LambdaArrowLeft = 1,
  MuLambdaArrowRight = 2,
  MuLambdaArrowLeft = 3,
  Recovery = 4,
};

inline constexpr std::array<EventKind, 5> kAllEventKinds = {
    EventKind::LambdaArrowRight, EventKind::LambdaArrowLeft,
    EventKind::MuLambdaArrowRight, EventKind::MuLambdaArrowLeft,
    EventKind::Recovery};

std::string_view to_string(EventKind kind);

constexpr bool is_arrow(EventKind k) { return k != EventKind::Recovery; }
constexpr bool is_lambda_arrow(EventKind k) {
  return k == EventKind::LambdaArrowRight || k == EventKind::LambdaArrowLeft;
}
constexpr bool points_right(EventKind k) {
  return k == EventKind::LambdaArrowRight || k == EventKind::MuLambdaArrowRight;
}
constexpr bool points_left(EventKind k) {
  return k == EventKind::LambdaArrowLeft || k == EventKind::MuLambdaArrowLeft;
}

struct StreamKey {
  std::int64_t replica_id = 0;
  std::int64_t site = 0;
  EventKind kind = EventKind::Recovery;
};

struct Event {
  double time = 0.0;
  std::int64_t site = 0;
  EventKind kind = EventKind::Recovery;
  /// Position of the event in its site's superposed stream.
  std::uint64_t counter = 0;

  std::int64_t target() const {
    return points_right(kind) ? site + 1 : points_left(kind) ? site - 1 : site;
  }
};

/// Total order used whenever streams are merged: time, then site, then kind,
/// then counter.
bool event_before(const Event& a, const Event& b);

struct Construction {
  std::uint64_t master_seed = 0;
  double lambda = 1.0;
  double mu = 2.0;
  /// Intensity of recovery marks. Always 1 for the model; other values exist
  /// only as an engine test hook.
  double recovery_rate = 1.0;

  /// Throws ParameterError unless 0 < lambda <= mu and recovery_rate >= 0.
  void validate() const;
  double rate(EventKind kind) const;
  double total_rate() const { return 2.0 * mu + recovery_rate; }

  friend bool operator==(const Construction&, const Construction&) = default;
};

namespace detail {

constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

/// Uniform on the open interval (0, 1) with 53 bits of resolution.
inline double open_unit(std::uint64_t bits) {
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

constexpr std::uint64_t stream_key(std::uint64_t seed, std::int64_t replica,
                                   std::int64_t site) {
  std::uint64_t h = mix64(seed ^ 0x5851f42d4c957f2dULL);
  h = mix64(h ^ (static_cast<std::uint64_t>(replica) * 0xd1342543de82ef95ULL));
  h = mix64(h ^ (static_cast<std::uint64_t>(site) * 0xa0761d6478bd642fULL +
                 0xe7037ed1a0b428dbULL));
  return h;
}

}  // namespace detail

/// Precomputed rates for drawing from a construction's site streams.
class StreamSampler {
 public:
  explicit StreamSampler(const Construction& c);

  std::uint64_t key(std::int64_t replica, std::int64_t site) const {
    return detail::stream_key(seed_, replica, site);
  }

  /// Waiting time between point `counter - 1` and point `counter`.
  double interarrival(std::uint64_t key, std::uint64_t counter) const {
    const std::uint64_t bits =
        detail::mix64(key + (2 * counter + 1) * detail::kGolden);
    return -std::log(detail::open_unit(bits)) * inv_total_;
  }

  EventKind mark(std::uint64_t key, std::uint64_t counter) const {
    const std::uint64_t bits =
        detail::mix64(key + (2 * counter + 2) * detail::kGolden);
    const double v = detail::open_unit(bits) * total_;
    for (int i = 0; i < 4; ++i) {
      if (v < cumulative_[i]) return static_cast<EventKind>(i);
    }
    return EventKind::Recovery;
  }

  double total_rate() const { return total_; }

 private:
  std::uint64_t seed_;
  double total_;
  double inv_total_;
  std::array<double, 4> cumulative_{};
};

/// Forward cursor over one site's superposed stream (all five kinds).
class SiteStream {
 public:
  SiteStream(const Construction& c, std::int64_t replica_id, std::int64_t site);

  const Event& peek() const { return current_; }
  void advance();

 private:
  StreamSampler sampler_;
  std::uint64_t key_;
  Event current_;
};

/// Events of one stream with time <= horizon, in increasing time.
std::vector<Event> site_streams(const Construction& c, const StreamKey& key,
                                double horizon);

/// All events of every site in [x_lo, x_hi] up to `horizon`, merged in
/// event_before order.
std::vector<Event> window_events(const Construction& c, std::int64_t replica_id,
                                 std::int64_t x_lo, std::int64_t x_hi,
                                 double horizon);

}  // namespace tscp
