#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace meshweave {

// Raw integrals for one batch. The integrands are piecewise constant between
// events, so each integral is an exact sum of value * interval length.
struct BatchIntegrals {
  double joined_time = 0.0;   // integral of the fully-served pair count
  double ratio_time = 0.0;    // integral of sum(d x) / sum(x) while traffic > 0
  double traffic_time = 0.0;  // time with positive traffic
  double covered = 0.0;       // total integrated time
};

struct BatchResult {
  std::size_t index = 0;
  double joining_peers = 0.0;
  double congestion_degree = 1.0;
  bool has_traffic = false;
};

// Time average over the batch of the number of fully served (peer, content)
// pairs.
double JoiningPeersAverage(const BatchIntegrals& b, double batch_seconds);

// Time average of the traffic-weighted mean physical distance, taken over the
// part of the batch that carried traffic. nullopt when no traffic flowed.
std::optional<double> CongestionAverage(const BatchIntegrals& b);

class MetricsAccumulator {
 public:
  MetricsAccumulator(double warmup_seconds, double batch_seconds,
                     std::size_t batch_count);

  // Integrates the current values over [last, now]. `now` must not decrease.
  void Advance(double now, std::int64_t joined_pairs,
               std::int64_t weighted_traffic, std::int64_t total_traffic);

  double last_time() const { return last_; }
  double warmup_covered() const { return warmup_covered_; }
  const std::vector<BatchIntegrals>& integrals() const { return batches_; }
  std::vector<BatchResult> Results() const;

 private:
  double warmup_;
  double batch_;
  double last_ = 0.0;
  double warmup_covered_ = 0.0;
  std::size_t cursor_ = 0;
  std::vector<BatchIntegrals> batches_;
};

struct ConfidenceInterval {
  double mean = 0.0;
  std::optional<double> half_width;  // needs at least two samples
  std::size_t samples = 0;
};

// Student-t interval over i.i.d. batch values.
ConfidenceInterval BatchMeansCi(std::span<const double> values,
                                double confidence = 0.95);

}  // namespace meshweave
