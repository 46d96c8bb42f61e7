#include "meshweave/sweep.h"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <thread>

#include <fmt/format.h>

namespace meshweave {

ConfigError::ConfigError(std::size_t line, const std::string& msg)
    : std::runtime_error(line > 0 ? fmt::format("line {}: {}", line, msg) : msg),
      line_(line) {}

namespace {

std::string_view Trim(std::string_view s) {
  const auto ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

std::vector<std::string_view> SplitList(std::string_view s, char sep = ',') {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto at = s.find(sep, start);
    out.push_back(Trim(s.substr(start, at - start)));
    if (at == std::string_view::npos) break;
    start = at + 1;
  }
  return out;
}

struct Entry {
  std::string value;
  std::size_t line;
};

class Reader {
 public:
  Reader(std::string key, const Entry& e) : key_(std::move(key)), e_(e) {}

  [[noreturn]] void Fail(const std::string& why) const {
    throw ConfigError(e_.line, fmt::format("{}: {}", key_, why));
  }

  std::size_t Count(std::size_t min_value) const {
    std::string_view v = Trim(e_.value);
    std::int64_t out = 0;
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || p != v.data() + v.size()) Fail("expected an integer");
    if (out < static_cast<std::int64_t>(min_value)) {
      Fail(fmt::format("must be >= {}", min_value));
    }
    return static_cast<std::size_t>(out);
  }

  std::uint64_t Seed() const {
    std::string_view v = Trim(e_.value);
    std::uint64_t out = 0;
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || p != v.data() + v.size()) Fail("expected an unsigned integer");
    return out;
  }

  double Number(std::string_view v) const {
    v = Trim(v);
    if (v == "inf") return std::numeric_limits<double>::infinity();
    const auto slash = v.find('/');
    if (slash != std::string_view::npos) {
      return Number(v.substr(0, slash)) / Number(v.substr(slash + 1));
    }
    double out = 0.0;
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || p != v.data() + v.size() || std::isnan(out)) {
      Fail(fmt::format("'{}' is not a number", v));
    }
    return out;
  }

  double Positive() const {
    const double v = Number(e_.value);
    if (!(v > 0.0)) Fail("must be > 0");
    return v;
  }

  double NonNegative() const {
    const double v = Number(e_.value);
    if (!(v >= 0.0)) Fail("must be >= 0");
    return v;
  }

  bool Flag() const {
    const std::string_view v = Trim(e_.value);
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    Fail("expected true or false");
  }

  std::vector<double> PositiveList() const {
    std::vector<double> out;
    for (auto item : SplitList(e_.value)) {
      const double v = Number(item);
      if (!(v > 0.0)) Fail("list values must be > 0");
      out.push_back(v);
    }
    return out;
  }

  std::vector<Policy> Policies() const {
    std::vector<Policy> out;
    for (auto item : SplitList(e_.value)) {
      const auto p = ParsePolicy(item);
      if (!p) Fail(fmt::format("unknown policy '{}'", item));
      out.push_back(*p);
    }
    return out;
  }

  // "1:1/3, 2:1/3, 1+2:1/3" with one-based content ids.
  std::vector<std::pair<std::vector<ContentId>, double>> Distribution(
      std::size_t content_count) const {
    std::vector<std::pair<std::vector<ContentId>, double>> out;
    for (auto item : SplitList(e_.value)) {
      const auto colon = item.find(':');
      if (colon == std::string_view::npos) Fail("expected set:probability");
      std::vector<ContentId> set;
      for (auto c : SplitList(item.substr(0, colon), '+')) {
        const double id = Number(c);
        if (id < 1 || id > static_cast<double>(content_count) ||
            id != std::floor(id)) {
          Fail(fmt::format("content '{}' outside 1..{}", c, content_count));
        }
        set.push_back(static_cast<ContentId>(id) - 1);
      }
      std::sort(set.begin(), set.end());
      if (std::adjacent_find(set.begin(), set.end()) != set.end()) {
        Fail("repeated content in a set");
      }
      const double prob = Number(item.substr(colon + 1));
      if (!(prob >= 0.0)) Fail("probabilities must be >= 0");
      out.emplace_back(std::move(set), prob);
    }
    return out;
  }

  PlacementRule Placement() const {
    const std::string_view v = Trim(e_.value);
    if (v == "uniform") return PlacementRule::kUniform;
    if (v == "round-robin") return PlacementRule::kRoundRobin;
    Fail("expected uniform or round-robin");
  }

  std::string Text() const { return std::string(Trim(e_.value)); }

 private:
  std::string key_;
  const Entry& e_;
};

// Uniform over the non-empty subsets; the two-content case matches the
// default 1/3 split.
std::vector<std::pair<std::vector<ContentId>, double>> UniformSubsets(
    std::size_t content_count) {
  std::vector<std::pair<std::vector<ContentId>, double>> out;
  const std::size_t subsets = (std::size_t{1} << content_count) - 1;
  for (std::size_t mask = 1; mask <= subsets; ++mask) {
    std::vector<ContentId> set;
    for (ContentId k = 0; k < content_count; ++k) {
      if (mask & (std::size_t{1} << k)) set.push_back(k);
    }
    out.emplace_back(std::move(set), 1.0 / static_cast<double>(subsets));
  }
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return a.first.size() < b.first.size();
  });
  return out;
}

std::string Cell(double v) { return fmt::format("{:.6f}", v); }

std::string LambdaCell(double v) { return fmt::format("{}", v); }

std::string SummaryCell(const ConfidenceInterval& ci) {
  if (ci.samples == 0) return "na";
  return fmt::format("{:.6f}+/-{}", ci.mean,
                     ci.half_width ? fmt::format("{:.6f}", *ci.half_width) : "na");
}

struct CellSummary {
  ConfidenceInterval joining;
  ConfidenceInterval congestion;
  std::size_t batches = 0;
};

CellSummary Summarize(const std::vector<RunReport>& reports, std::size_t begin,
                      std::size_t count) {
  std::vector<double> joining, congestion;
  for (std::size_t r = begin; r < begin + count; ++r) {
    for (const auto& b : reports[r].batches) {
      joining.push_back(b.joining_peers);
      if (b.has_traffic) congestion.push_back(b.congestion_degree);
    }
  }
  return {BatchMeansCi(joining), BatchMeansCi(congestion), joining.size()};
}

}  // namespace

SweepSpec ParseConfigText(std::string_view text) {
  static const char* const kKeys[] = {
      "peer_count",          "as_count",
      "edges_per_node",      "content_count",
      "oss_per_content",     "oss_bandwidth_mbps",
      "peer_bandwidth_min_mbps", "peer_bandwidth_max_mbps",
      "view_rate_mbps",      "hop_limit",
      "reserve_budget",      "request_distribution",
      "mean_viewing_seconds", "viewing_cv",
      "lambda_inv_seconds",  "policies",
      "replications",        "sim_days",
      "warmup_days",         "batch_days",
      "day_seconds",         "seed",
      "bandwidth_class_mbps", "all_or_nothing",
      "placement",           "invariant_check_interval",
      "output_path"};

  std::map<std::string, Entry> entries;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto end = text.find('\n', start);
    std::string_view line = text.substr(start, end - start);
    start = end == std::string_view::npos ? text.size() + 1 : end + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = Trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError(line_no, "expected key = value");
    const std::string key(Trim(line.substr(0, eq)));
    const std::string_view value = Trim(line.substr(eq + 1));
    if (std::find(std::begin(kKeys), std::end(kKeys), key) == std::end(kKeys)) {
      throw ConfigError(line_no, fmt::format("unknown key '{}'", key));
    }
    if (value.empty()) throw ConfigError(line_no, fmt::format("{}: missing value", key));
    if (!entries.emplace(key, Entry{std::string(value), line_no}).second) {
      throw ConfigError(line_no, fmt::format("duplicate key '{}'", key));
    }
  }

  auto get = [&](const char* key) -> std::optional<Reader> {
    auto it = entries.find(key);
    if (it == entries.end()) return std::nullopt;
    return Reader(key, it->second);
  };

  SweepSpec spec;
  ScenarioConfig& c = spec.base;
  spec.policies.assign(std::begin(kAllPolicies), std::end(kAllPolicies));
  spec.lambda_inv_values = {1800.0, 3600.0, 7200.0, 14400.0, 28800.0};

  if (auto r = get("peer_count")) c.peer_count = r->Count(1);
  if (auto r = get("as_count")) c.as_count = r->Count(1);
  if (auto r = get("edges_per_node")) c.edges_per_node = r->Count(1);
  if (auto r = get("content_count")) {
    c.catalog.content_count = r->Count(1);
    if (c.catalog.content_count > 16) r->Fail("at most 16 contents");
    c.catalog.distribution = UniformSubsets(c.catalog.content_count);
  }
  if (auto r = get("request_distribution")) {
    c.catalog.distribution = r->Distribution(c.catalog.content_count);
  }
  if (auto r = get("oss_per_content")) c.oss_per_content = r->Count(1);
  if (auto r = get("oss_bandwidth_mbps")) c.oss_bandwidth_mbps = r->Positive();
  if (auto r = get("peer_bandwidth_min_mbps")) c.peer_bandwidth_min_mbps = r->Positive();
  if (auto r = get("peer_bandwidth_max_mbps")) c.peer_bandwidth_max_mbps = r->Positive();
  if (auto r = get("view_rate_mbps")) c.view_rate_mbps = r->Positive();
  if (auto r = get("hop_limit")) c.hop_limit = static_cast<int>(r->Count(1));
  if (auto r = get("reserve_budget")) c.reserve_budget = r->Count(1);
  if (auto r = get("mean_viewing_seconds")) c.mean_viewing_seconds = r->Positive();
  if (auto r = get("viewing_cv")) c.viewing_cv = r->Positive();
  if (auto r = get("lambda_inv_seconds")) spec.lambda_inv_values = r->PositiveList();
  if (auto r = get("policies")) spec.policies = r->Policies();
  if (auto r = get("replications")) spec.replications = r->Count(1);
  if (auto r = get("sim_days")) c.sim_days = r->Positive();
  if (auto r = get("warmup_days")) c.warmup_days = r->NonNegative();
  if (auto r = get("batch_days")) c.batch_days = r->Positive();
  if (auto r = get("day_seconds")) c.day_seconds = r->Positive();
  if (auto r = get("seed")) c.seed = r->Seed();
  if (auto r = get("bandwidth_class_mbps")) c.bandwidth_class_mbps = r->NonNegative();
  if (auto r = get("all_or_nothing")) c.all_or_nothing = r->Flag();
  if (auto r = get("placement")) c.placement = r->Placement();
  if (auto r = get("invariant_check_interval")) c.invariant_check_interval = r->Count(0);
  if (auto r = get("output_path")) spec.output_path = r->Text();

  c.mean_waiting_seconds = spec.lambda_inv_values.front();
  try {
    c.Validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(0, e.what());
  }
  return spec;
}

SweepSpec ParseConfigFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(0, fmt::format("cannot open config '{}'", path));
  std::ostringstream text;
  text << in.rdbuf();
  return ParseConfigText(text.str());
}

std::uint64_t RunSeed(std::uint64_t base, std::size_t lambda_index,
                      std::size_t replication) {
  return MixSeed(MixSeed(base, lambda_index + 1), replication + 1);
}

ScenarioConfig CellConfig(const SweepSpec& spec, std::size_t policy_index,
                          std::size_t lambda_index, std::size_t replication) {
  ScenarioConfig c = spec.base;
  c.policy = spec.policies.at(policy_index);
  c.mean_waiting_seconds = spec.lambda_inv_values.at(lambda_index);
  c.seed = RunSeed(spec.base.seed, lambda_index, replication);
  return c;
}

std::vector<RunReport> RunSweep(const SweepSpec& spec, std::size_t jobs) {
  const std::size_t lambdas = spec.lambda_inv_values.size();
  const std::size_t total = spec.run_count();
  std::vector<RunReport> reports(total);
  std::vector<std::exception_ptr> errors(total);
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (std::size_t cell = next++; cell < total; cell = next++) {
      const std::size_t rep = cell % spec.replications;
      const std::size_t lam = (cell / spec.replications) % lambdas;
      const std::size_t pol = cell / (spec.replications * lambdas);
      try {
        reports[cell] = Run(CellConfig(spec, pol, lam, rep));
      } catch (...) {
        errors[cell] = std::current_exception();
      }
    }
  };
  const std::size_t threads = std::clamp<std::size_t>(jobs, 1, std::max<std::size_t>(total, 1));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return reports;
}

void WriteCsv(std::ostream& out, const SweepSpec& spec,
              const std::vector<RunReport>& reports) {
  out << "policy,lambda_inv_s,seed,batch_index,joining_peers,congestion_degree\n";
  for (const auto& r : reports) {
    for (const auto& b : r.batches) {
      out << PolicyName(r.policy) << ',' << LambdaCell(r.lambda_inv_s) << ','
          << r.seed << ',' << b.index << ',' << Cell(b.joining_peers) << ','
          << (b.has_traffic ? Cell(b.congestion_degree) : "no-traffic") << '\n';
    }
  }
  const std::size_t lambdas = spec.lambda_inv_values.size();
  for (std::size_t p = 0; p < spec.policies.size(); ++p) {
    for (std::size_t l = 0; l < lambdas; ++l) {
      const std::size_t begin = (p * lambdas + l) * spec.replications;
      const CellSummary s = Summarize(reports, begin, spec.replications);
      out << PolicyName(spec.policies[p]) << ','
          << LambdaCell(spec.lambda_inv_values[l]) << ",summary," << s.batches
          << ',' << SummaryCell(s.joining) << ',' << SummaryCell(s.congestion)
          << '\n';
    }
  }
}

void WriteSummary(std::ostream& out, const SweepSpec& spec,
                  const std::vector<RunReport>& reports) {
  out << fmt::format("{:<14} {:>10} {:>8} {:>26} {:>22}\n", "policy",
                     "1/lambda_s", "batches", "joining peers (95% CI)",
                     "congestion (95% CI)");
  auto show = [](const ConfidenceInterval& ci) {
    if (ci.samples == 0) return std::string("n/a");
    return ci.half_width ? fmt::format("{:.3f} +/- {:.3f}", ci.mean, *ci.half_width)
                         : fmt::format("{:.3f}", ci.mean);
  };
  const std::size_t lambdas = spec.lambda_inv_values.size();
  for (std::size_t p = 0; p < spec.policies.size(); ++p) {
    for (std::size_t l = 0; l < lambdas; ++l) {
      const std::size_t begin = (p * lambdas + l) * spec.replications;
      const CellSummary s = Summarize(reports, begin, spec.replications);
      out << fmt::format("{:<14} {:>10} {:>8} {:>26} {:>22}\n",
                         PolicyName(spec.policies[p]),
                         LambdaCell(spec.lambda_inv_values[l]), s.batches,
                         show(s.joining), show(s.congestion));
    }
  }
}

}  // namespace meshweave
