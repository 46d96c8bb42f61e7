#include "meshweave/sampling.h"

#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include <fmt/format.h>

namespace meshweave {

ContentCatalog ContentCatalog::TwoContentDefault() {
  ContentCatalog c;
  c.content_count = 2;
  c.distribution = {{{0}, 1.0 / 3.0}, {{1}, 1.0 / 3.0}, {{0, 1}, 1.0 / 3.0}};
  return c;
}

void ContentCatalog::Validate() const {
  if (content_count == 0) throw std::invalid_argument("no contents");
  if (distribution.empty()) throw std::invalid_argument("empty request distribution");
  double sum = 0.0;
  for (const auto& [set, p] : distribution) {
    if (set.empty()) throw std::invalid_argument("empty content set has P = 0");
    for (std::size_t i = 0; i < set.size(); ++i) {
      if (set[i] >= content_count) {
        throw std::invalid_argument(fmt::format("content {} out of range", set[i] + 1));
      }
      if (i > 0 && set[i] <= set[i - 1]) {
        throw std::invalid_argument("content sets must be ascending and distinct");
      }
    }
    if (!(p >= 0.0)) throw std::invalid_argument("negative probability");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw std::invalid_argument(fmt::format("request probabilities sum to {}", sum));
  }
}

std::vector<ContentId> SampleContentSet(const ContentCatalog& catalog, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double draw = u(rng);
  double acc = 0.0;
  for (const auto& [set, p] : catalog.distribution) {
    acc += p;
    if (draw < acc) return set;
  }
  // Rounding left a sliver above the last cumulative value.
  for (auto it = catalog.distribution.rbegin(); it != catalog.distribution.rend(); ++it) {
    if (it->second > 0.0) return it->first;
  }
  return catalog.distribution.back().first;
}

LogNormalParams LogNormalFromMoments(double mean, double cv) {
  if (!(mean > 0.0) || !(cv > 0.0)) {
    throw std::invalid_argument("log-normal needs mean > 0 and cv > 0");
  }
  const double s2 = std::log1p(cv * cv);
  return {std::log(mean) - s2 / 2.0, std::sqrt(s2)};
}

double SampleViewingTime(double mean_s, double cv, Rng& rng) {
  const auto p = LogNormalFromMoments(mean_s, cv);
  std::lognormal_distribution<double> dist(p.mu, p.sigma);
  return dist(rng);
}

double SampleWaitingTime(double mean_s, Rng& rng) {
  if (!(mean_s > 0.0)) throw std::invalid_argument("waiting mean must be > 0");
  if (std::isinf(mean_s)) return std::numeric_limits<double>::infinity();
  std::exponential_distribution<double> dist(1.0 / mean_s);
  return dist(rng);
}

std::uint64_t MixSeed(std::uint64_t base, std::uint64_t salt) {
  std::uint64_t z = base ^ (salt * 0x9E3779B97F4A7C15ULL);
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace meshweave
