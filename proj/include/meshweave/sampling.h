#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "meshweave/selection.h"
#include "meshweave/world.h"

namespace meshweave {

// Probability P(V) for each requested content set V. Sets are ascending
// zero-based content ids; the empty set never appears.
struct ContentCatalog {
  std::size_t content_count = 2;
  std::vector<std::pair<std::vector<ContentId>, double>> distribution;

  // P({1}) = P({2}) = P({1,2}) = 1/3.
  static ContentCatalog TwoContentDefault();
  // Throws std::invalid_argument unless the support is valid and sums to 1.
  void Validate() const;
};

std::vector<ContentId> SampleContentSet(const ContentCatalog& catalog, Rng& rng);

struct LogNormalParams {
  double mu = 0.0;
  double sigma = 0.0;
};

// Moment inversion: sigma^2 = ln(1 + cv^2), mu = ln(mean) - sigma^2 / 2.
LogNormalParams LogNormalFromMoments(double mean, double cv);

double SampleViewingTime(double mean_s, double cv, Rng& rng);

// Exponential with the given mean. An infinite mean never fires and returns
// +infinity.
double SampleWaitingTime(double mean_s, Rng& rng);

// SplitMix64 finalizer over base ^ salt; used for every derived seed.
std::uint64_t MixSeed(std::uint64_t base, std::uint64_t salt);

}  // namespace meshweave
