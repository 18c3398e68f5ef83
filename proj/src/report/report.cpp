#include "pimstm/report/report.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <memory>
#include <sstream>

#include "json.hpp"
#include "pimstm/bench/arraybench.hpp"
#include "pimstm/bench/kmeans.hpp"
#include "pimstm/bench/labyrinth.hpp"
#include "pimstm/bench/linked_list.hpp"
#include "pimstm/bench/multi_dpu.hpp"
#include "pimstm/oracle/serializability.hpp"

namespace pimstm::report {

namespace {

constexpr std::uint32_t kLabyrinthJobs = 100;

}  // namespace

const char* to_string(Bench b) {
  switch (b) {
    case Bench::kArrayBench: return "arraybench";
    case Bench::kLinkedList: return "linkedlist";
    case Bench::kKMeans: return "kmeans";
    case Bench::kLabyrinth: return "labyrinth";
  }
  return "?";
}

Bench parse_bench(std::string_view s) {
  for (Bench b : {Bench::kArrayBench, Bench::kLinkedList, Bench::kKMeans, Bench::kLabyrinth}) {
    if (s == to_string(b)) return b;
  }
  throw Error(ErrorCode::kConfigInvalid, "unknown benchmark '" + std::string(s) + "'");
}

Format parse_format(std::string_view s) {
  if (s == "csv") return Format::kCsv;
  if (s == "json") return Format::kJson;
  throw Error(ErrorCode::kConfigInvalid, "unknown format '" + std::string(s) + "'");
}

std::vector<std::string> normalize(RunSpec& spec) {
  std::vector<std::string> warnings;
  auto bad = [](const std::string& m) { throw Error(ErrorCode::kConfigInvalid, m); };
  std::vector<std::string> tags;
  switch (spec.bench) {
    case Bench::kArrayBench: tags = {"A", "B"}; break;
    case Bench::kLinkedList:
    case Bench::kKMeans: tags = {"LC", "HC"}; break;
    case Bench::kLabyrinth: tags = {"S", "M", "L"}; break;
  }
  if (std::find(tags.begin(), tags.end(), spec.workload) == tags.end()) {
    bad("workload '" + spec.workload + "' does not apply to " + to_string(spec.bench));
  }
  if (spec.runs < 1) bad("runs must be at least 1");
  if (spec.dpus < 1) bad("dpus must be at least 1");
  if (spec.dpus > 1 && spec.bench != Bench::kKMeans && spec.bench != Bench::kLabyrinth) {
    bad("multi-DPU mode supports kmeans and labyrinth only");
  }
  if (spec.variants.empty()) bad("no variant selected");
  if (spec.tasklets.empty()) bad("no tasklet count selected");
  for (int t : spec.tasklets) {
    if (t < 1 || t > kMaxTasklets) bad("tasklet count " + std::to_string(t) + " outside 1.." + std::to_string(kMaxTasklets));
  }
  if (spec.retry_cap == 0) bad("retry cap must be positive");
  if (!(spec.time_budget >= 0)) bad("time budget must be >= 0");
  if (spec.bench == Bench::kLabyrinth && spec.placement == Tier::kWram) {
    spec.placement = Tier::kMram;
    warnings.push_back("labyrinth metadata does not fit WRAM; placement coerced to mram");
  }
  return warnings;
}

void aggregate(Cell& cell, const std::vector<Stats>& runs) {
  Stats total;
  cell.samples.clear();
  for (const auto& s : runs) {
    total += s;
    cell.samples.push_back(RunSample{s.committed, s.aborted, s.elapsed_seconds, s.throughput()});
  }
  const double n = static_cast<double>(runs.size());
  double sum = 0.0;
  for (const auto& r : cell.samples) sum += r.throughput;
  cell.throughput_mean = runs.empty() ? 0.0 : sum / n;
  double sq = 0.0;
  for (const auto& r : cell.samples) sq += (r.throughput - cell.throughput_mean) * (r.throughput - cell.throughput_mean);
  cell.throughput_std = runs.size() > 1 ? std::sqrt(sq / (n - 1.0)) : 0.0;
  cell.abort_rate = total.abort_rate();
  cell.breakdown = total.breakdown_fractions();
  const double commits = static_cast<double>(total.committed);
  cell.mram_per_commit = commits > 0 ? static_cast<double>(total.accesses.tier_total(Tier::kMram)) / commits : 0.0;
  cell.wram_per_commit = commits > 0 ? static_cast<double>(total.accesses.tier_total(Tier::kWram)) / commits : 0.0;
  cell.retries_histogram = total.retries_histogram;
}

bool RunReport::oracle_failed() const {
  for (const auto& c : cells) {
    if (c.oracle && c.oracle->failed()) return true;
  }
  return false;
}

namespace {

struct Outcome {
  Stats stats;
  OracleSummary oracle;
};

// Upper bound on committed transactions, used to decide whether a history is
// small enough to record and check.
std::uint64_t commit_bound(const RunSpec& spec, int tasklets) {
  const auto t = static_cast<std::uint64_t>(tasklets);
  switch (spec.bench) {
    case Bench::kArrayBench: return t * (spec.txns_per_tasklet ? spec.txns_per_tasklet : 1000);
    case Bench::kLinkedList: return t * 100;
    default: return UINT64_MAX;
  }
}

void merge(OracleSummary& o, const bench::RunResult& r) {
  o.snapshot_violations += r.snapshot_violations;
  o.snapshots_checked += r.snapshots_checked;
  o.problems.insert(o.problems.end(), r.problems.begin(), r.problems.end());
  o.problems.insert(o.problems.end(), r.quiescent_issues.begin(), r.quiescent_issues.end());
}

Outcome run_once(const RunSpec& spec, Variant variant, int tasklets, std::uint64_t seed) {
  bench::RunOptions opt;
  opt.stm.variant = variant;
  opt.stm.metadata_tier = spec.placement;
  opt.stm.tasklets = tasklets;
  opt.stm.seed = seed;
  opt.stm.retry_cap = spec.retry_cap;
  opt.stm.time_budget_seconds = spec.time_budget;
  opt.stm.mutation = spec.mutation;
  opt.interleave = spec.interleave;
  opt.monitor_snapshots = spec.oracle;

  Outcome out;
  auto single = [&](bench::Workload& w) {
    HistoryLog log;
    const bool record = spec.oracle && commit_bound(spec, tasklets) <= kMaxCheckedTransactions;
    if (record) opt.recorder = &log;
    const bench::RunResult r = bench::run_workload(w, opt);
    out.stats = r.stats;
    merge(out.oracle, r);
    if (record) {
      const auto events = log.events();
      std::map<std::uint32_t, std::uint32_t> initial;
      for (const auto& e : events) {
        if (e.kind == EventKind::kRead || e.kind == EventKind::kWrite) initial[e.addr] = r.initial_word(e.addr);
      }
      try {
        out.oracle.serializable = check_serializable(events, initial).ok ? "pass" : "fail";
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kSearchSpaceExceeded) throw;
      }
    }
  };

  switch (spec.bench) {
    case Bench::kArrayBench: {
      auto cfg = spec.workload == "A" ? bench::ArrayBenchConfig::workload_a() : bench::ArrayBenchConfig::workload_b();
      if (spec.txns_per_tasklet) cfg.txns_per_tasklet = spec.txns_per_tasklet;
      bench::ArrayBench w(cfg);
      single(w);
      break;
    }
    case Bench::kLinkedList: {
      bench::LinkedList w(spec.workload == "LC" ? bench::LinkedListConfig::low_contention()
                                                : bench::LinkedListConfig::high_contention());
      single(w);
      break;
    }
    case Bench::kKMeans: {
      auto cfg = spec.workload == "LC" ? bench::KMeansConfig::low_contention() : bench::KMeansConfig::high_contention();
      if (spec.points) cfg.points = spec.points;
      const auto points = bench::generate_points(cfg, cfg.points * static_cast<std::uint32_t>(spec.dpus), seed);
      if (spec.dpus == 1) {
        bench::KMeans w(cfg, points);
        single(w);
      } else {
        auto r = bench::multi_dpu_kmeans(spec.dpus, cfg, points, opt);
        out.stats = r.stats;
        out.oracle.problems = r.problems;
      }
      break;
    }
    case Bench::kLabyrinth: {
      const bench::GridSize grid = spec.workload == "S"   ? bench::GridSize::small()
                                   : spec.workload == "M" ? bench::GridSize::medium()
                                                          : bench::GridSize::large();
      auto instance_for = [&](std::uint64_t s) {
        if (!spec.labyrinth_file.empty()) {
          std::ifstream in(spec.labyrinth_file);
          if (!in) throw Error(ErrorCode::kConfigInvalid, "cannot open " + spec.labyrinth_file);
          std::stringstream ss;
          ss << in.rdbuf();
          return bench::parse_labyrinth(ss.str());
        }
        return bench::generate_labyrinth(grid, kLabyrinthJobs, s);
      };
      if (spec.dpus == 1) {
        bench::Labyrinth w(instance_for(seed));
        single(w);
      } else {
        std::vector<bench::LabyrinthInstance> instances;
        for (int d = 0; d < spec.dpus; ++d) instances.push_back(instance_for(seed + static_cast<std::uint64_t>(d)));
        auto r = bench::multi_dpu_labyrinth(instances, opt);
        out.stats = r.stats;
        out.oracle.problems = r.problems;
      }
      break;
    }
  }
  return out;
}

}  // namespace

RunReport run(RunSpec spec) {
  RunReport report;
  report.warnings = normalize(spec);
  for (Variant v : spec.variants) {
    for (int t : spec.tasklets) {
      Cell cell;
      cell.bench = to_string(spec.bench);
      cell.workload = spec.workload;
      cell.variant = std::string(to_string(v));
      cell.placement = pimstm::to_string(spec.placement);
      cell.tasklets = t;
      cell.dpus = spec.dpus;
      std::vector<Stats> runs;
      OracleSummary oracle;
      for (int r = 0; r < spec.runs; ++r) {
        Outcome o = run_once(spec, v, t, spec.seed + static_cast<std::uint64_t>(r));
        runs.push_back(o.stats);
        oracle.snapshot_violations += o.oracle.snapshot_violations;
        oracle.snapshots_checked += o.oracle.snapshots_checked;
        oracle.problems.insert(oracle.problems.end(), o.oracle.problems.begin(), o.oracle.problems.end());
        if (o.oracle.serializable == "fail" || oracle.serializable == "skipped") {
          oracle.serializable = o.oracle.serializable;
        }
      }
      aggregate(cell, runs);
      if (spec.oracle) cell.oracle = std::move(oracle);
      report.cells.push_back(std::move(cell));
    }
  }
  return report;
}

namespace {

std::string fmt_double(double v) {
  std::ostringstream s;
  s << std::setprecision(17) << v;
  return s.str();
}

}  // namespace

std::string emit(const RunReport& report, Format format) {
  if (format == Format::kCsv) {
    std::string out;
    for (std::size_t i = 0; i < kCsvColumns.size(); ++i) out += (i ? "," : "") + kCsvColumns[i];
    out += '\n';
    for (const auto& c : report.cells) {
      out += c.bench + ',' + c.workload + ',' + c.variant + ',' + c.placement + ',' + std::to_string(c.tasklets);
      for (double v : {c.throughput_mean, c.throughput_std, c.abort_rate}) out += ',' + fmt_double(v);
      for (double v : c.breakdown) out += ',' + fmt_double(v);
      out += ',' + fmt_double(c.mram_per_commit) + ',' + fmt_double(c.wram_per_commit) + '\n';
    }
    return out;
  }

  nlohmann::json j;
  j["throughput_note"] = "simulation-relative; compare access counts across platforms";
  j["access_counting"] =
      "every simulated word access by a tasklet, including STM metadata, set logs and application data";
  j["warnings"] = report.warnings;
  j["cells"] = nlohmann::json::array();
  for (const auto& c : report.cells) {
    nlohmann::json cell = {{"bench", c.bench},           {"workload", c.workload}, {"variant", c.variant},
                           {"placement", c.placement},   {"tasklets", c.tasklets}, {"dpus", c.dpus}};
    nlohmann::json m = {{"throughput_mean", c.throughput_mean},
                        {"throughput_std", c.throughput_std},
                        {"abort_rate", c.abort_rate},
                        {"mram_per_commit", c.mram_per_commit},
                        {"wram_per_commit", c.wram_per_commit}};
    const char* names[] = {"t_start", "t_read", "t_write", "t_validate", "t_commit", "t_wasted", "t_other"};
    for (int i = 0; i < kBreakdownCount; ++i) m[names[i]] = c.breakdown[i];
    cell["metrics"] = m;
    nlohmann::json hist = nlohmann::json::object();
    for (const auto& [k, v] : c.retries_histogram) hist[std::to_string(k)] = v;
    cell["retries_histogram"] = hist;
    nlohmann::json samples = nlohmann::json::array();
    for (const auto& s : c.samples) {
      samples.push_back({{"committed", s.committed},
                         {"aborted", s.aborted},
                         {"elapsed_seconds", s.elapsed_seconds},
                         {"throughput", s.throughput}});
    }
    cell["runs"] = samples;
    if (c.oracle) {
      cell["oracle"] = {{"snapshot_violations", c.oracle->snapshot_violations},
                        {"snapshots_checked", c.oracle->snapshots_checked},
                        {"problems", c.oracle->problems},
                        {"serializable", c.oracle->serializable}};
    }
    j["cells"].push_back(std::move(cell));
  }
  return j.dump(2) + "\n";
}

RunReport parse_json_report(std::string_view text) {
  RunReport r;
  try {
    const auto j = nlohmann::json::parse(text);
    r.warnings = j.value("warnings", std::vector<std::string>{});
    const char* names[] = {"t_start", "t_read", "t_write", "t_validate", "t_commit", "t_wasted", "t_other"};
    for (const auto& jc : j.at("cells")) {
      Cell c;
      c.bench = jc.at("bench");
      c.workload = jc.at("workload");
      c.variant = jc.at("variant");
      c.placement = jc.at("placement");
      c.tasklets = jc.at("tasklets");
      c.dpus = jc.value("dpus", 1);
      const auto& m = jc.at("metrics");
      c.throughput_mean = m.at("throughput_mean");
      c.throughput_std = m.at("throughput_std");
      c.abort_rate = m.at("abort_rate");
      c.mram_per_commit = m.at("mram_per_commit");
      c.wram_per_commit = m.at("wram_per_commit");
      for (int i = 0; i < kBreakdownCount; ++i) c.breakdown[i] = m.at(names[i]);
      for (const auto& [k, v] : jc.at("retries_histogram").items()) c.retries_histogram[std::stoull(k)] = v;
      for (const auto& s : jc.at("runs")) {
        c.samples.push_back(RunSample{s.at("committed"), s.at("aborted"), s.at("elapsed_seconds"), s.at("throughput")});
      }
      if (jc.contains("oracle")) {
        const auto& o = jc["oracle"];
        c.oracle = OracleSummary{o.at("snapshot_violations"), o.at("snapshots_checked"),
                                 o.at("problems").get<std::vector<std::string>>(), o.at("serializable")};
      }
      r.cells.push_back(std::move(c));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParseError, std::string("report: ") + e.what());
  }
  return r;
}

}  // namespace pimstm::report
