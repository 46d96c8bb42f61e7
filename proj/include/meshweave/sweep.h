#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "meshweave/simulator.h"

namespace meshweave {

class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::size_t line, const std::string& msg);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

struct SweepSpec {
  ScenarioConfig base;
  std::vector<Policy> policies;
  std::vector<double> lambda_inv_values;  // seconds
  std::size_t replications = 1;
  std::string output_path;  // empty: standard output

  std::size_t run_count() const {
    return policies.size() * lambda_inv_values.size() * replications;
  }
};

// Flat "key = value" lines, '#' starts a comment, lists are comma separated.
// Unset keys keep their defaults; unknown keys and malformed values throw
// ConfigError carrying the line number.
SweepSpec ParseConfigText(std::string_view text);
SweepSpec ParseConfigFile(const std::string& path);

// Per-run seed: MixSeed(MixSeed(base, lambda_index + 1), replication + 1).
// Policies share seeds so they face the same topology and demand stream.
std::uint64_t RunSeed(std::uint64_t base, std::size_t lambda_index,
                      std::size_t replication);

// The concrete scenario of one sweep cell.
ScenarioConfig CellConfig(const SweepSpec& spec, std::size_t policy_index,
                          std::size_t lambda_index, std::size_t replication);

// Runs every cell on `jobs` worker threads. Reports come back ordered by
// (policy, lambda, replication) regardless of completion order. The first
// failure (by that order) is rethrown after all workers stop.
std::vector<RunReport> RunSweep(const SweepSpec& spec, std::size_t jobs);

// Header, one row per batch, then one summary row per (policy, lambda) whose
// metric cells read "mean+/-half_width".
void WriteCsv(std::ostream& out, const SweepSpec& spec,
              const std::vector<RunReport>& reports);

// Human-readable table of the same summaries.
void WriteSummary(std::ostream& out, const SweepSpec& spec,
                  const std::vector<RunReport>& reports);

}  // namespace meshweave
