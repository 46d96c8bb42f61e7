#include <cmath>
#include <sstream>
#include <string>

#include <doctest.h>

#include "meshweave/sweep.h"

namespace meshweave {
namespace {

std::size_t CountLines(const std::string& s, const std::string& needle = "") {
  std::istringstream in(s);
  std::size_t n = 0;
  for (std::string line; std::getline(in, line);) {
    if (needle.empty() || line.find(needle) != std::string::npos) ++n;
  }
  return n;
}

const char* kSmall =
    "peer_count = 60\n"
    "as_count = 4\n"
    "edges_per_node = 2\n"
    "policies = mlh+ex\n"
    "lambda_inv_seconds = 3600\n";

TEST_CASE("empty config yields the defaults") {
  const SweepSpec s = ParseConfigText("");
  const ScenarioConfig& c = s.base;
  CHECK(c.peer_count == 1000);
  CHECK(c.as_count == 15);
  CHECK(c.content_count() == 2);
  CHECK(c.view_rate_mbps == 2.0);
  CHECK(c.hop_limit == 4);
  CHECK(c.peer_bandwidth_min_mbps == 0.5);
  CHECK(c.peer_bandwidth_max_mbps == 10.0);
  CHECK(c.oss_bandwidth_mbps == 30.0);
  CHECK(c.mean_viewing_seconds == 10800.0);
  CHECK(c.viewing_cv == 6.0);
  CHECK(c.sim_days == 12.0);
  CHECK(c.warmup_days == 2.0);
  CHECK(c.batch_count() == 10);
  CHECK(s.policies.size() == 6);
  CHECK(s.lambda_inv_values == std::vector<double>{1800, 3600, 7200, 14400, 28800});
  CHECK(s.replications == 1);
}

TEST_CASE("config errors name the key and line") {
  try {
    ParseConfigText("# comment\npeer_count = -5\n");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.line() == 2);
    CHECK(std::string(e.what()).find("peer_count") != std::string::npos);
  }
  CHECK_THROWS_AS(ParseConfigText("peers = 5"), ConfigError);
  CHECK_THROWS_AS(ParseConfigText("peer_count"), ConfigError);
  CHECK_THROWS_AS(ParseConfigText("peer_count = 5\npeer_count = 6"), ConfigError);
  CHECK_THROWS_AS(ParseConfigText("policies = mlh, bogus"), ConfigError);
  CHECK_THROWS_AS(ParseConfigText("hop_limit = 2.5"), ConfigError);
  CHECK_THROWS_AS(ParseConfigText("request_distribution = 1:0.5"), ConfigError);
  CHECK_THROWS_AS(ParseConfigText("request_distribution = 3:1"), ConfigError);
  CHECK_THROWS_AS(ParseConfigText("sim_days = 12.5"), ConfigError);
  CHECK_THROWS_AS(ParseConfigFile("/nonexistent/meshweave.cfg"), ConfigError);
}

TEST_CASE("config values and lists") {
  const SweepSpec s = ParseConfigText(
      "policies = mlh+ex, scamp-like   # two of them\n"
      "lambda_inv_seconds = 3600, inf\n"
      "request_distribution = 1:1/2, 1+2:1/2\n"
      "all_or_nothing = true\n"
      "placement = round-robin\n"
      "seed = 77\n");
  CHECK(s.policies == std::vector<Policy>{Policy::kMlhEx, Policy::kScampLike});
  CHECK(s.lambda_inv_values.size() == 2);
  CHECK(std::isinf(s.lambda_inv_values[1]));
  CHECK(s.base.catalog.distribution.size() == 2);
  CHECK(s.base.catalog.distribution[1].first == std::vector<ContentId>{0, 1});
  CHECK(s.base.all_or_nothing);
  CHECK(s.base.placement == PlacementRule::kRoundRobin);
  CHECK(s.base.seed == 77);
}

TEST_CASE("more contents default to a uniform request distribution") {
  const SweepSpec s = ParseConfigText("content_count = 3");
  CHECK(s.base.catalog.distribution.size() == 7);
  for (const auto& [set, p] : s.base.catalog.distribution) CHECK(p == doctest::Approx(1.0 / 7));
}

TEST_CASE("per-run seeds ignore the policy") {
  const SweepSpec s = ParseConfigText("policies = mlh, mph\nlambda_inv_seconds = 1, 2\nreplications = 2");
  CHECK(CellConfig(s, 0, 1, 1).seed == CellConfig(s, 1, 1, 1).seed);
  CHECK(CellConfig(s, 0, 0, 1).seed != CellConfig(s, 0, 1, 1).seed);
  CHECK(CellConfig(s, 0, 1, 0).seed != CellConfig(s, 0, 1, 1).seed);
  CHECK(CellConfig(s, 1, 1, 0).policy == Policy::kMph);
  CHECK(CellConfig(s, 1, 1, 0).mean_waiting_seconds == 2.0);
  CHECK(RunSeed(1, 0, 0) == CellConfig(s, 0, 0, 0).seed);
}

TEST_CASE("one cell gives ten batch rows and one summary") {
  const SweepSpec s = ParseConfigText(kSmall);
  const auto reports = RunSweep(s, 1);
  std::ostringstream csv;
  WriteCsv(csv, s, reports);
  CHECK(CountLines(csv.str()) == 1 + 10 + 1);
  CHECK(csv.str().rfind("policy,lambda_inv_s,seed,batch_index,joining_peers,congestion_degree\n", 0) == 0);
  CHECK(CountLines(csv.str(), ",summary,10,") == 1);

  std::ostringstream again;
  WriteCsv(again, s, RunSweep(s, 1));
  CHECK(again.str() == csv.str());

  std::ostringstream table;
  WriteSummary(table, s, reports);
  CHECK(CountLines(table.str()) == 2);
}

TEST_CASE("replications pool their batches and threads keep the order") {
  const SweepSpec spec = ParseConfigText(
      "peer_count = 60\nas_count = 4\nedges_per_node = 2\n"
      "policies = mlh, scamp-like\nlambda_inv_seconds = 3600\nreplications = 2\n");
  std::ostringstream one, two;
  WriteCsv(one, spec, RunSweep(spec, 1));
  WriteCsv(two, spec, RunSweep(spec, 3));
  CHECK(one.str() == two.str());
  CHECK(CountLines(one.str()) == 1 + 2 * 2 * 10 + 2);
  CHECK(CountLines(one.str(), ",summary,20,") == 2);
}

TEST_CASE("no demand within the horizon") {
  const SweepSpec s = ParseConfigText(
      "peer_count = 20\nas_count = 3\nedges_per_node = 1\npolicies = mlh\n"
      "lambda_inv_seconds = inf\n");
  const auto reports = RunSweep(s, 1);
  for (const auto& b : reports[0].batches) {
    CHECK(b.joining_peers == 0.0);
    CHECK(!b.has_traffic);
  }
  std::ostringstream csv;
  WriteCsv(csv, s, reports);
  CHECK(CountLines(csv.str(), "no-traffic") == 10);
}

}  // namespace
}  // namespace meshweave
