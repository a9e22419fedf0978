#include "tscp/events.hpp"

#include <algorithm>
#include <string>
#include <tuple>

#include "tscp/errors.hpp"

namespace tscp {

std::string_view to_string(EventKind kind) {
  switch (kind) {
    case EventKind::LambdaArrowRight: return "lambda_right";
    case EventKind::LambdaArrowLeft: return "lambda_left";
    case EventKind::MuLambdaArrowRight: return "mu_lambda_right";
    case EventKind::MuLambdaArrowLeft: return "mu_lambda_left";
    case EventKind::Recovery: return "recovery";
  }
  return "unknown";
}

bool event_before(const Event& a, const Event& b) {
  return std::tie(a.time, a.site, a.kind, a.counter) <
         std::tie(b.time, b.site, b.kind, b.counter);
}

void Construction::validate() const {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw ParameterError("lambda must be positive and finite");
  }
  if (!(mu >= lambda) || !std::isfinite(mu)) {
    throw ParameterError("mu must be >= lambda (the mu - lambda arrow rate would be negative), got lambda=" +
                         std::to_string(lambda) + " mu=" + std::to_string(mu));
  }
  if (!(recovery_rate >= 0.0) || !std::isfinite(recovery_rate)) {
    throw ParameterError("recovery rate must be nonnegative");
  }
}

double Construction::rate(EventKind kind) const {
  switch (kind) {
    case EventKind::LambdaArrowRight:
    case EventKind::LambdaArrowLeft: return lambda;
    case EventKind::MuLambdaArrowRight:
    case EventKind::MuLambdaArrowLeft: return mu - lambda;
    case EventKind::Recovery: return recovery_rate;
  }
  return 0.0;
}

StreamSampler::StreamSampler(const Construction& c)
    : seed_(c.master_seed), total_(c.total_rate()), inv_total_(1.0 / c.total_rate()) {
  c.validate();
  double acc = 0.0;
  for (int i = 0; i < 4; ++i) {
    acc += c.rate(static_cast<EventKind>(i));
    cumulative_[i] = acc;
  }
}

SiteStream::SiteStream(const Construction& c, std::int64_t replica_id, std::int64_t site)
    : sampler_(c), key_(sampler_.key(replica_id, site)) {
  current_.site = site;
  current_.counter = 0;
  current_.time = sampler_.interarrival(key_, 0);
  current_.kind = sampler_.mark(key_, 0);
}

void SiteStream::advance() {
  ++current_.counter;
  current_.time += sampler_.interarrival(key_, current_.counter);
  current_.kind = sampler_.mark(key_, current_.counter);
}

std::vector<Event> site_streams(const Construction& c, const StreamKey& key,
                                double horizon) {
  c.validate();
  if (!(horizon > 0.0)) throw InputError("horizon must be positive");
  std::vector<Event> out;
  if (c.rate(key.kind) == 0.0) return out;
  SiteStream stream(c, key.replica_id, key.site);
  for (; stream.peek().time <= horizon; stream.advance()) {
    if (stream.peek().kind == key.kind) out.push_back(stream.peek());
  }
  return out;
}

std::vector<Event> window_events(const Construction& c, std::int64_t replica_id,
                                 std::int64_t x_lo, std::int64_t x_hi,
                                 double horizon) {
  c.validate();
  if (x_lo > x_hi) throw InputError("window requires x_lo <= x_hi");
  if (!(horizon > 0.0)) throw InputError("horizon must be positive");
  std::vector<Event> out;
  for (std::int64_t x = x_lo; x <= x_hi; ++x) {
    for (SiteStream s(c, replica_id, x); s.peek().time <= horizon; s.advance()) {
      out.push_back(s.peek());
    }
  }
  std::sort(out.begin(), out.end(), event_before);
  return out;
}

}  // namespace tscp
