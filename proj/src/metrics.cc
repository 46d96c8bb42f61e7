#include "meshweave/metrics.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <boost/math/distributions/students_t.hpp>

namespace meshweave {

double JoiningPeersAverage(const BatchIntegrals& b, double batch_seconds) {
  return b.joined_time / batch_seconds;
}

std::optional<double> CongestionAverage(const BatchIntegrals& b) {
  if (!(b.traffic_time > 0.0)) return std::nullopt;
  return b.ratio_time / b.traffic_time;
}

MetricsAccumulator::MetricsAccumulator(double warmup_seconds,
                                       double batch_seconds,
                                       std::size_t batch_count)
    : warmup_(warmup_seconds), batch_(batch_seconds), batches_(batch_count) {
  if (warmup_seconds < 0.0 || !(batch_seconds > 0.0)) {
    throw std::invalid_argument("bad batch layout");
  }
}

void MetricsAccumulator::Advance(double now, std::int64_t joined_pairs,
                                 std::int64_t weighted_traffic,
                                 std::int64_t total_traffic) {
  if (now < last_) throw std::logic_error("metrics time went backwards");
  const double ratio =
      total_traffic > 0
          ? static_cast<double>(weighted_traffic) / static_cast<double>(total_traffic)
          : 0.0;
  while (last_ < now) {
    if (last_ < warmup_) {
      const double end = std::min(now, warmup_);
      warmup_covered_ += end - last_;
      last_ = end;
      continue;
    }
    if (cursor_ >= batches_.size()) {
      last_ = now;
      break;
    }
    const double boundary = warmup_ + static_cast<double>(cursor_ + 1) * batch_;
    const double end = std::min(now, boundary);
    const double dt = end - last_;
    BatchIntegrals& b = batches_[cursor_];
    b.joined_time += static_cast<double>(joined_pairs) * dt;
    if (total_traffic > 0) {
      b.ratio_time += ratio * dt;
      b.traffic_time += dt;
    }
    b.covered += dt;
    last_ = end;
    if (end >= boundary) ++cursor_;
  }
}

std::vector<BatchResult> MetricsAccumulator::Results() const {
  std::vector<BatchResult> out;
  for (std::size_t i = 0; i < batches_.size(); ++i) {
    BatchResult r;
    r.index = i;
    r.joining_peers = JoiningPeersAverage(batches_[i], batch_);
    const auto c = CongestionAverage(batches_[i]);
    r.has_traffic = c.has_value();
    r.congestion_degree = c.value_or(1.0);
    out.push_back(r);
  }
  return out;
}

ConfidenceInterval BatchMeansCi(std::span<const double> values,
                                double confidence) {
  ConfidenceInterval ci;
  ci.samples = values.size();
  if (values.empty()) return ci;
  double sum = 0.0;
  for (double v : values) sum += v;
  const double n = static_cast<double>(values.size());
  ci.mean = sum / n;
  if (values.size() < 2) return ci;
  double ss = 0.0;
  for (double v : values) ss += (v - ci.mean) * (v - ci.mean);
  const double sd = std::sqrt(ss / (n - 1.0));
  boost::math::students_t dist(n - 1.0);
  const double t = boost::math::quantile(
      boost::math::complement(dist, (1.0 - confidence) / 2.0));
  ci.half_width = t * sd / std::sqrt(n);
  return ci;
}

}  // namespace meshweave
