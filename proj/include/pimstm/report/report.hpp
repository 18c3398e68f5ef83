#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pimstm/error.hpp"
#include "pimstm/stm/config.hpp"
#include "pimstm/stm/stats.hpp"

namespace pimstm::report {

enum class Bench { kArrayBench, kLinkedList, kKMeans, kLabyrinth };
enum class Format { kCsv, kJson };

const char* to_string(Bench b);
Bench parse_bench(std::string_view s);
Format parse_format(std::string_view s);

struct RunSpec {
  Bench bench = Bench::kArrayBench;
  // A/B, LC/HC or S/M/L depending on the benchmark.
  std::string workload = "A";
  std::vector<Variant> variants{kAllVariants.begin(), kAllVariants.end()};
  Tier placement = Tier::kMram;
  std::vector<int> tasklets{1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11};
  int dpus = 1;
  int runs = 10;
  std::uint64_t seed = 1;
  bool oracle = false;
  std::uint64_t retry_cap = 1'000'000;
  // Per run, in seconds; 0 = unlimited.
  double time_budget = 0;
  Mutation mutation = Mutation::kNone;
  std::uint32_t interleave = 0;
  // Benchmark scale knobs; 0 keeps the benchmark default.
  std::uint32_t txns_per_tasklet = 0;
  std::uint32_t points = 0;
  std::string labyrinth_file;
};

// Checks ranges and tags; applies the labyrinth WRAM coercion. Returns
// warnings. Throws kConfigInvalid.
std::vector<std::string> normalize(RunSpec& spec);

struct RunSample {
  std::uint64_t committed = 0;
  std::uint64_t aborted = 0;
  double elapsed_seconds = 0.0;
  double throughput = 0.0;
};

struct OracleSummary {
  std::uint64_t snapshot_violations = 0;
  std::uint64_t snapshots_checked = 0;
  std::vector<std::string> problems;
  // "pass", "fail" or "skipped".
  std::string serializable = "skipped";

  bool failed() const { return snapshot_violations > 0 || !problems.empty() || serializable == "fail"; }
};

struct Cell {
  std::string bench;
  std::string workload;
  std::string variant;
  std::string placement;
  int tasklets = 0;
  int dpus = 1;

  double throughput_mean = 0.0;
  double throughput_std = 0.0;
  double abort_rate = 0.0;
  std::array<double, kBreakdownCount> breakdown{};
  double mram_per_commit = 0.0;
  double wram_per_commit = 0.0;
  std::map<std::uint64_t, std::uint64_t> retries_histogram;
  std::vector<RunSample> samples;
  std::optional<OracleSummary> oracle;
};

struct RunReport {
  std::vector<Cell> cells;
  std::vector<std::string> warnings;

  bool oracle_failed() const;
};

// Fills the aggregate fields of a cell from per-run statistics.
void aggregate(Cell& cell, const std::vector<Stats>& runs);

// Executes every (variant, tasklets) cell `runs` times. Oracle failures are
// recorded in the report; see oracle_failed().
RunReport run(RunSpec spec);

std::string emit(const RunReport& report, Format format);
// Inverse of emit(report, kJson); restores every emitted field.
RunReport parse_json_report(std::string_view text);

inline const std::vector<std::string> kCsvColumns = {
    "bench",        "workload",  "variant",       "placement",   "tasklets",   "throughput_mean",
    "throughput_std", "abort_rate", "t_start",     "t_read",      "t_write",    "t_validate",
    "t_commit",     "t_wasted",  "t_other",       "mram_per_commit", "wram_per_commit"};

}  // namespace pimstm::report
