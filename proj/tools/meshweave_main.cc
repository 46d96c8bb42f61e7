// meshweave: run a policy x arrival-rate sweep of the overlay simulator.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "meshweave/sweep.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitInvariant = 2;

std::uint64_t ParseSeedEnv(const char* text) {
  std::size_t used = 0;
  const std::string s(text);
  const unsigned long long v = std::stoull(s, &used);
  if (used != s.size()) throw std::invalid_argument("trailing characters");
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-overlay streaming simulator"};
  std::string config_path;
  std::size_t jobs = 1;
  std::string out_path;
  std::string topology_path;
  app.add_option("--config", config_path, "Sweep configuration file")
      ->required();
  app.add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);
  app.add_option("--out", out_path, "CSV output path (default: stdout)");
  app.add_option("--dump-topology", topology_path,
                 "Write the topology of the first run to this path");
  CLI11_PARSE(app, argc, argv);

  meshweave::SweepSpec spec;
  try {
    spec = meshweave::ParseConfigFile(config_path);
    if (const char* env = std::getenv("MESHWEAVE_SEED")) {
      try {
        spec.base.seed = ParseSeedEnv(env);
      } catch (const std::exception&) {
        throw meshweave::ConfigError(0, fmt::format("bad MESHWEAVE_SEED '{}'", env));
      }
    }
  } catch (const meshweave::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  }
  if (out_path.empty()) out_path = spec.output_path;

  if (!topology_path.empty()) {
    const auto topo = meshweave::BuildTopology(meshweave::CellConfig(spec, 0, 0, 0));
    std::ofstream f(topology_path);
    if (!f) {
      std::cerr << "cannot write " << topology_path << '\n';
      return kExitConfig;
    }
    meshweave::WriteTopology(f, topo->graph(), topo->placement());
  }

  std::vector<meshweave::RunReport> reports;
  try {
    reports = meshweave::RunSweep(spec, jobs);
  } catch (const meshweave::InvariantViolation& e) {
    const std::string snap = "meshweave_snapshot.txt";
    std::ofstream f(snap);
    f << e.snapshot();
    std::cerr << e.what() << "\nsnapshot written to " << snap << '\n';
    return kExitInvariant;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  }

  if (out_path.empty()) {
    meshweave::WriteCsv(std::cout, spec, reports);
    meshweave::WriteSummary(std::cerr, spec, reports);
  } else {
    std::ofstream f(out_path);
    if (!f) {
      std::cerr << "cannot write " << out_path << '\n';
      return kExitConfig;
    }
    meshweave::WriteCsv(f, spec, reports);
    meshweave::WriteSummary(std::cout, spec, reports);
  }
  return kExitOk;
}
