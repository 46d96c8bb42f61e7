#include <cmath>
#include <map>
#include <set>

#include <doctest.h>

#include "meshweave/sampling.h"

namespace meshweave {
namespace {

TEST_CASE("log-normal moment inversion") {
  const auto p = LogNormalFromMoments(10800.0, 6.0);
  CHECK(p.sigma == doctest::Approx(std::sqrt(std::log(37.0))).epsilon(1e-12));
  CHECK(p.sigma == doctest::Approx(1.9003).epsilon(1e-4));
  CHECK(p.mu == doctest::Approx(7.4818).epsilon(1e-4));
  // The inversion reproduces the requested moments.
  const double mean = std::exp(p.mu + p.sigma * p.sigma / 2);
  const double var = (std::exp(p.sigma * p.sigma) - 1) * mean * mean;
  CHECK(mean == doctest::Approx(10800.0));
  CHECK(std::sqrt(var) / mean == doctest::Approx(6.0));
  CHECK_THROWS_AS(LogNormalFromMoments(0.0, 1.0), std::invalid_argument);
}

TEST_CASE("viewing-time samples") {
  const auto p = LogNormalFromMoments(10800.0, 6.0);
  Rng rng(123);
  const int n = 1000000;
  double sum = 0.0, log_sum = 0.0, log_sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = SampleViewingTime(10800.0, 6.0, rng);
    sum += x;
    log_sum += std::log(x);
    log_sq += std::log(x) * std::log(x);
  }
  const double log_mean = log_sum / n;
  const double log_sd = std::sqrt(log_sq / n - log_mean * log_mean);
  CHECK(std::abs(log_mean - p.mu) <= 3 * p.sigma / std::sqrt(double(n)));
  CHECK(std::abs(log_sd - p.sigma) <= 0.02 * p.sigma);
  // Standard error of the sample mean is 6 * 10800 / 1000 = 64.8 s.
  CHECK(std::abs(sum / n - 10800.0) <= 5 * 64.8);
}

TEST_CASE("viewing time collapses to the mean as cv vanishes") {
  Rng rng(5);
  for (int i = 0; i < 1000; ++i) {
    CHECK(std::abs(SampleViewingTime(3600.0, 1e-6, rng) - 3600.0) <= 3.6);
  }
}

TEST_CASE("waiting-time samples") {
  Rng rng(77);
  const int n = 1000000;
  const double mean = 3600.0;
  double sum = 0.0;
  int above = 0;
  for (int i = 0; i < n; ++i) {
    const double x = SampleWaitingTime(mean, rng);
    sum += x;
    above += x > mean;
  }
  CHECK(std::abs(sum / n - mean) <= 0.01 * mean);
  CHECK(std::abs(double(above) / n - std::exp(-1.0)) <= 0.005);
  CHECK(std::isinf(SampleWaitingTime(INFINITY, rng)));
  CHECK_THROWS_AS(SampleWaitingTime(0.0, rng), std::invalid_argument);
}

TEST_CASE("samplers repeat under a seed") {
  Rng a(9), b(9);
  for (int i = 0; i < 100; ++i) {
    CHECK(SampleWaitingTime(100.0, a) == SampleWaitingTime(100.0, b));
    CHECK(SampleViewingTime(100.0, 2.0, a) == SampleViewingTime(100.0, 2.0, b));
  }
  const auto cat = ContentCatalog::TwoContentDefault();
  Rng c(4), d(4);
  for (int i = 0; i < 100; ++i) CHECK(SampleContentSet(cat, c) == SampleContentSet(cat, d));
}

TEST_CASE("content-set sampling") {
  SUBCASE("degenerate") {
    ContentCatalog cat{2, {{{0}, 1.0}}};
    cat.Validate();
    Rng rng(1);
    for (int i = 0; i < 100; ++i) CHECK(SampleContentSet(cat, rng) == std::vector<ContentId>{0});
  }
  SUBCASE("default frequencies") {
    const auto cat = ContentCatalog::TwoContentDefault();
    cat.Validate();
    Rng rng(2);
    std::map<std::vector<ContentId>, int> count;
    const int n = 300000;
    for (int i = 0; i < n; ++i) ++count[SampleContentSet(cat, rng)];
    CHECK(count.size() == 3);
    for (const auto& [set, c] : count) {
      CHECK(std::abs(double(c) / n - 1.0 / 3.0) <= 0.01 / 3.0);
    }
  }
  SUBCASE("validation") {
    CHECK_THROWS_AS((ContentCatalog{2, {{{0}, 0.5}}}.Validate()), std::invalid_argument);
    CHECK_THROWS_AS((ContentCatalog{2, {{{}, 1.0}}}.Validate()), std::invalid_argument);
    CHECK_THROWS_AS((ContentCatalog{2, {{{2}, 1.0}}}.Validate()), std::invalid_argument);
    CHECK_THROWS_AS((ContentCatalog{2, {{{1, 0}, 1.0}}}.Validate()), std::invalid_argument);
  }
}

TEST_CASE("MixSeed separates streams") {
  std::set<std::uint64_t> seen;
  for (std::uint64_t base = 0; base < 50; ++base)
    for (std::uint64_t salt = 0; salt < 50; ++salt) seen.insert(MixSeed(base, salt));
  CHECK(seen.size() == 2500);
  CHECK(MixSeed(7, 3) == MixSeed(7, 3));
}

}  // namespace
}  // namespace meshweave
