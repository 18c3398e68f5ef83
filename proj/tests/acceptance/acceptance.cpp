// Acceptance suite: one PASS/FAIL line per criterion. Pass criterion numbers
// as arguments to run a subset.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "pimstm/bench/arraybench.hpp"
#include "pimstm/bench/kmeans.hpp"
#include "pimstm/bench/labyrinth.hpp"
#include "pimstm/bench/linked_list.hpp"
#include "pimstm/bench/multi_dpu.hpp"
#include "pimstm/bench/workload.hpp"
#include "pimstm/dpu/dpu.hpp"
#include "pimstm/dpu/tasklets.hpp"
#include "pimstm/oracle/history.hpp"
#include "pimstm/oracle/serializability.hpp"
#include "pimstm/oracle/snapshot_check.hpp"

using namespace pimstm;
using namespace pimstm::bench;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
  int failures = 0;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

void fail(Outcome& o, const std::string& why) {
  if (o.pass) o.detail.clear();
  if (o.pass || o.detail.size() < 400) o.detail += (o.detail.empty() ? "" : "; ") + why;
  o.pass = false;
  ++o.failures;
}

std::string vname(Variant v) { return std::string(to_string(v)); }

// Wall-clock limit for a single run in the contention criteria.
constexpr double kCellBudgetSeconds = 120;

RunOptions options(Variant v, int tasklets, std::uint64_t seed, std::uint32_t interleave) {
  RunOptions opt;
  opt.stm.variant = v;
  opt.stm.tasklets = tasklets;
  opt.stm.seed = seed;
  opt.interleave = interleave;
  return opt;
}

// Four pairs of words; a transaction reads two whole pairs and moves a random
// amount between the members of the first. Every pair sums to 2000, so any
// attempt that reads a full pair must see that sum.
class PairTransfers final : public Workload {
 public:
  explicit PairTransfers(int txns) : txns_(txns) {}

  std::string name() const override { return "pair-transfers"; }
  StmConfig size(StmConfig cfg) const override {
    cfg.readset_capacity = 16;
    cfg.writeset_capacity = 16;
    cfg.heap_bytes = 4096;
    return cfg;
  }
  void setup(Stm& stm) override {
    seed_ = stm.config().seed;
    base_ = stm.heap_alloc(8 * 4);
    for (std::uint32_t i = 0; i < 8; ++i) stm.host_store(base_ + 4 * i, 1000);
  }
  void tasklet_main(Transaction& tx, int) override {
    auto rng = tasklet_rng(seed_, tx.ctx().tasklet);
    for (int n = 0; n < txns_; ++n) {
      const std::uint32_t p = rng() % 4, q = rng() % 4;
      const auto delta = static_cast<std::uint32_t>(1 + rng() % 997);
      tx.run([&](Transaction& t) {
        const std::uint32_t a = t.load(word(2 * p)), b = t.load(word(2 * p + 1));
        t.load(word(2 * q));
        t.load(word(2 * q + 1));
        t.store(word(2 * p), a - delta);
        t.store(word(2 * p + 1), b + delta);
      });
    }
  }
  std::vector<std::string> verify(Stm& stm) override {
    std::vector<std::string> out;
    for (std::uint32_t p = 0; p < 4; ++p) {
      if (stm.host_load(word(2 * p)) + stm.host_load(word(2 * p + 1)) != 2000u) out.push_back("pair sum broken");
    }
    return out;
  }
  std::optional<SnapshotInvariant> snapshot_invariant() const override {
    const std::uint32_t base = base_;
    return [base](std::span<const ReadObservation> reads) {
      std::map<std::uint32_t, std::uint32_t> seen;
      for (const auto& r : reads) seen.emplace(r.addr, r.value);
      for (std::uint32_t p = 0; p < 4; ++p) {
        auto a = seen.find(base + 8 * p), b = seen.find(base + 8 * p + 4);
        if (a != seen.end() && b != seen.end() && a->second + b->second != 2000u) return false;
      }
      return true;
    };
  }

 private:
  std::uint32_t word(std::uint32_t i) const { return base_ + 4 * i; }

  int txns_;
  std::uint64_t seed_ = 0;
  std::uint32_t base_ = 0;
};

struct SmallHistory {
  bool serializable = true;
  bool opaque = true;
  bool intact = true;
};

SmallHistory small_history(Variant v, Mutation m, std::uint64_t seed, SlotHash hash = nullptr) {
  PairTransfers w(10);
  HistoryLog log;
  RunOptions opt = options(v, 3, seed, 2);
  opt.stm.mutation = m;
  opt.slot_hash = hash;
  opt.recorder = &log;
  const RunResult r = run_workload(w, opt);
  const auto events = log.events();
  std::map<std::uint32_t, std::uint32_t> initial;
  for (std::uint32_t i = 0; i < 8; ++i) initial[r.heap_base + 4 * i] = r.initial_word(r.heap_base + 4 * i);
  SmallHistory out;
  out.serializable = check_serializable(events, initial).ok;
  out.opaque = doomed_snapshot_check(*w.snapshot_invariant(), events).empty();
  out.intact = r.problems.empty() && r.quiescent_issues.empty() && validate_history(events).empty();
  return out;
}

// ------------------------------------------------------------------ criteria

Outcome opacity_suite() {
  Outcome o;
  std::uint64_t total_checked = 0, total_commits = 0;
  for (Variant v : kAllVariants) {
    for (Tier tier : {Tier::kWram, Tier::kMram}) {
      for (int t : {1, 4, 11}) {
        auto cfg = ArrayBenchConfig::workload_a();
        cfg.txns_per_tasklet = static_cast<std::uint32_t>((100'000 + t - 1) / t);
        ArrayBench w(cfg);
        RunOptions opt = options(v, t, 7, 256);
        opt.stm.metadata_tier = tier;
        opt.monitor_snapshots = true;
        const RunResult r = run_workload(w, opt);
        total_checked += r.snapshots_checked;
        total_commits += r.stats.committed;
        const std::string cell = fmt("%s/%s/%d", vname(v).c_str(), to_string(tier), t);
        if (r.stats.committed < 100'000) fail(o, cell + " committed " + std::to_string(r.stats.committed));
        if (r.snapshot_violations) fail(o, cell + fmt(" %llu violations", (unsigned long long)r.snapshot_violations));
        if (w.final_sum() != w.initial_sum()) fail(o, cell + " sum changed");
        if (!r.problems.empty()) fail(o, cell + " " + r.problems.front());
        if (!r.quiescent_issues.empty()) fail(o, cell + " " + r.quiescent_issues.front());
      }
    }
  }
  if (o.pass) {
    o.detail = fmt("42 cells, %llu commits, %llu attempts checked, 0 violations, sums exact",
                   (unsigned long long)total_commits, (unsigned long long)total_checked);
  }
  return o;
}

Outcome serializability_suite() {
  Outcome o;
  for (Variant v : kAllVariants) {
    for (std::uint64_t s = 0; s < 100; ++s) {
      const auto h = small_history(v, Mutation::kNone, 1000 + s);
      if (!h.serializable) fail(o, vname(v) + fmt(" seed %llu not serializable", (unsigned long long)s));
      if (!h.opaque) fail(o, vname(v) + fmt(" seed %llu doomed snapshot", (unsigned long long)s));
      if (!h.intact) fail(o, vname(v) + fmt(" seed %llu invariant broken", (unsigned long long)s));
    }
  }
  const std::pair<Variant, Mutation> mutants[] = {{Variant::kNorec, Mutation::kNorecNoRevalidation},
                                                  {Variant::kTinyEtlWb, Mutation::kTinyNoValidation},
                                                  {Variant::kVrEtlWb, Mutation::kVrNoReadLocks}};
  std::string caught;
  for (auto [v, m] : mutants) {
    int detected = 0;
    for (std::uint64_t s = 0; s < 100; ++s) {
      const auto h = small_history(v, m, 1000 + s);
      if (!h.serializable || !h.opaque) ++detected;
    }
    caught += fmt(" %s=%d/100", std::string(to_string(m)).c_str(), detected);
    if (detected == 0) fail(o, std::string(to_string(m)) + " never detected");
  }
  if (o.pass) o.detail = "700 histories serializable and opaque; mutants caught:" + caught;
  return o;
}

Outcome golden_equivalence() {
  Outcome o;
  const std::uint64_t seed = 42;
  auto kcfg = KMeansConfig::high_contention();
  kcfg.points = 2000;
  const auto points = generate_points(kcfg, kcfg.points, seed);
  KMeans kgold(kcfg, points);
  serial_replay(kgold, seed);
  LinkedList lgold(LinkedListConfig::high_contention());
  serial_replay(lgold, seed);
  const auto inst = generate_labyrinth(GridSize::small(), 100, seed);
  Labyrinth ygold(inst);
  serial_replay(ygold, seed);

  for (Variant v : kAllVariants) {
    KMeans k(kcfg, points);
    run_workload(k, options(v, 1, seed, 0));
    if (k.round_accumulators() != kgold.round_accumulators()) fail(o, vname(v) + " kmeans accumulators differ");
    LinkedList l(LinkedListConfig::high_contention());
    run_workload(l, options(v, 1, seed, 0));
    if (l.final_contents() != lgold.final_contents()) fail(o, vname(v) + " list contents differ");
    Labyrinth y(inst);
    run_workload(y, options(v, 1, seed, 0));
    if (y.paths() != ygold.paths()) fail(o, vname(v) + " labyrinth paths differ");
  }
  if (o.pass) {
    o.detail = fmt("7 variants match serial replay (%zu kmeans rounds, %zu list keys, %u routed paths)",
                   kgold.round_accumulators().size(), lgold.final_contents().size(), ygold.routed());
  }
  return o;
}

Outcome write_policy_equivalence() {
  Outcome o;
  const std::pair<Variant, Variant> pairs[] = {{Variant::kTinyEtlWt, Variant::kTinyEtlWb},
                                               {Variant::kVrEtlWt, Variant::kVrEtlWb}};
  auto kcfg = KMeansConfig::low_contention();
  kcfg.points = 1000;
  const auto points = generate_points(kcfg, kcfg.points, 5);
  const auto inst = generate_labyrinth(GridSize::small(), 100, 5);
  const std::vector<std::pair<std::string, std::function<std::unique_ptr<Workload>()>>> makers = {
      {"arraybench-A", [] { return std::make_unique<ArrayBench>(ArrayBenchConfig::workload_a()); }},
      {"arraybench-B", [] { return std::make_unique<ArrayBench>(ArrayBenchConfig::workload_b()); }},
      {"linkedlist-HC", [] { return std::make_unique<LinkedList>(LinkedListConfig::high_contention()); }},
      {"kmeans-LC", [&] { return std::make_unique<KMeans>(kcfg, points); }},
      {"labyrinth-S", [&] { return std::make_unique<Labyrinth>(inst); }},
  };
  std::size_t bytes = 0;
  for (auto [wt, wb] : pairs) {
    for (const auto& [name, make] : makers) {
      auto a = make();
      auto b = make();
      const auto ra = run_workload(*a, options(wt, 1, 5, 0));
      const auto rb = run_workload(*b, options(wb, 1, 5, 0));
      bytes += ra.heap_image.size();
      if (ra.heap_image != rb.heap_image) fail(o, vname(wt) + " vs " + vname(wb) + " differ on " + name);
    }
  }
  if (o.pass) o.detail = fmt("10 heap pairs bitwise identical (%zu bytes compared)", bytes);
  return o;
}

double mram_per_load(Variant v) {
  auto cfg = LinkedListConfig::low_contention();
  cfg.contains_fraction = 1.0;
  cfg.ops_per_tasklet = 2000;
  LinkedList w(cfg);
  RunOptions opt = options(v, 1, 3, 0);
  opt.stm.metadata_tier = Tier::kMram;
  const auto r = run_workload(w, opt);
  return static_cast<double>(r.stats.accesses.tier_total(Tier::kMram)) / static_cast<double>(r.stats.tx_loads);
}

Outcome mram_accounting() {
  Outcome o;
  const double norec = mram_per_load(Variant::kNorec);
  const double tiny = mram_per_load(Variant::kTinyEtlWt);
  const double delta = tiny - norec;
  o.pass = delta >= 1.0 && delta <= 3.0;
  o.detail = fmt("MRAM accesses per tx_load: tiny_etlwt %.4f, norec %.4f, delta %.4f (range [1, 3])", tiny, norec,
                 delta);
  return o;
}

// A cell that exhausts the retry cap or the time budget has no rate to
// compare; the variant is then dropped from the remaining runs of that
// workload, and those runs count as failed.
Outcome abort_ordering() {
  Outcome o;
  constexpr int kRuns = 10;
  int list_ok = 0, array_ok = 0;
  std::string list_example, array_example;
  std::set<Variant> list_stuck, array_stuck;
  auto attempt = [&](Workload& w, Variant v, std::uint64_t seed, std::set<Variant>& stuck) -> std::optional<Stats> {
    if (stuck.count(v)) return std::nullopt;
    RunOptions opt = options(v, 11, seed, 16);
    opt.stm.time_budget_seconds = kCellBudgetSeconds;
    try {
      return run_workload(w, opt).stats;
    } catch (const Error& e) {
      stuck.insert(v);
      fail(o, w.name() + " " + vname(v) + fmt(" seed %llu: ", (unsigned long long)seed) + e.what());
      return std::nullopt;
    }
  };
  for (int run = 0; run < kRuns; ++run) {
    const auto seed = static_cast<std::uint64_t>(100 + run);
    double vr_min = 2.0, invisible_max = -1.0;
    bool complete = true;
    for (Variant v : kAllVariants) {
      LinkedList w(LinkedListConfig::high_contention());
      const auto s = attempt(w, v, seed, list_stuck);
      if (!s) {
        complete = false;
        continue;
      }
      if (is_vr(v)) {
        vr_min = std::min(vr_min, s->abort_rate());
      } else {
        invisible_max = std::max(invisible_max, s->abort_rate());
      }
    }
    if (complete && vr_min > invisible_max) ++list_ok;
    if (run == 0) list_example = fmt("run0 min VR %.3f vs max invisible %.3f", vr_min, invisible_max);

    double norec = 0.0, others_min = 2.0;
    Variant argmin = Variant::kNorec;
    complete = true;
    for (Variant v : kAllVariants) {
      ArrayBench w(ArrayBenchConfig::workload_b());
      const auto s = attempt(w, v, seed, array_stuck);
      if (!s) {
        complete = false;
        continue;
      }
      const double wasted = s->breakdown_fractions()[static_cast<int>(Breakdown::kWasted)];
      if (v == Variant::kNorec) {
        norec = wasted;
      } else if (wasted < others_min) {
        others_min = wasted;
        argmin = v;
      }
    }
    if (complete && norec < others_min) ++array_ok;
    if (run == 0) {
      array_example = fmt("run0 norec wasted %.4f vs min other %.4f (%s)", norec, others_min, vname(argmin).c_str());
    }
  }
  const bool ordered = list_ok >= 8 && array_ok >= 8;
  const std::string summary = fmt("(a) list HC %d/10 [%s], (b) arraybench B %d/10 [%s]", list_ok,
                                  list_example.c_str(), array_ok, array_example.c_str());
  if (o.pass && !ordered) o.pass = false;
  o.detail = o.detail.empty() ? summary : summary + "; " + o.detail;
  return o;
}

std::uint8_t constant_hash(std::uint32_t) { return 0; }

Outcome cas_and_aliasing() {
  Outcome o;
  Dpu dpu;
  const std::uint32_t addr = dpu.allocate(Tier::kMram, 4, 4).base;
  dpu.memory().set_interleave(8);
  run_tasklets(11, [&](int t) {
    TaskletCtx ctx{t, Phase::kOther};
    for (int i = 0; i < 10'000; ++i) {
      std::uint32_t cur = dpu.memory().load32(Tier::kMram, addr, ctx);
      for (;;) {
        const auto r = dpu.cas32(Tier::kMram, addr, cur, cur + 1, ctx);
        if (r.success) break;
        cur = r.observed;
      }
    }
  });
  const std::uint32_t total = dpu.memory().load32(Tier::kMram, addr, host_ctx());
  if (total != 110'000u) fail(o, fmt("CAS counter %u", total));

  std::uint64_t checked = 0;
  for (Variant v : kAllVariants) {
    for (int t : {1, 4, 11}) {
      auto cfg = ArrayBenchConfig::workload_a();
      cfg.n = 1250;
      cfg.y = 250;
      cfg.k = 1000;
      cfg.phase1_reads = 20;
      cfg.phase2_ops = 4;
      cfg.txns_per_tasklet = static_cast<std::uint32_t>(2000 / t);
      ArrayBench w(cfg);
      RunOptions opt = options(v, t, 11, 16);
      opt.slot_hash = &constant_hash;
      opt.monitor_snapshots = true;
      const auto r = run_workload(w, opt);
      checked += r.snapshots_checked;
      const std::string cell = fmt("%s/%d", vname(v).c_str(), t);
      if (r.snapshot_violations) fail(o, cell + " violations under constant hash");
      if (w.final_sum() != w.initial_sum()) fail(o, cell + " sum changed under constant hash");
      if (!r.quiescent_issues.empty()) fail(o, cell + " " + r.quiescent_issues.front());
    }
    for (std::uint64_t s = 0; s < 10; ++s) {
      const auto h = small_history(v, Mutation::kNone, 5000 + s, &constant_hash);
      if (!h.serializable || !h.opaque || !h.intact) fail(o, vname(v) + " small history fails under constant hash");
    }
  }
  if (o.pass) {
    o.detail = fmt("counter %u; constant-hash suite clean (%llu attempts checked, 70 small histories)", total,
                   (unsigned long long)checked);
  }
  return o;
}

std::uint32_t manhattan_cells(const GridSize& g, std::uint32_t a, std::uint32_t b) {
  const auto ca = g.coords(a), cb = g.coords(b);
  std::uint32_t d = 0;
  for (int i = 0; i < 3; ++i) d += ca[i] > cb[i] ? ca[i] - cb[i] : cb[i] - ca[i];
  return d + 1;
}

Outcome labyrinth_structure() {
  Outcome o;
  const auto inst = generate_labyrinth(GridSize::small(), 100, 9);
  const GridSize g = inst.grid;
  std::uint32_t routed_min = UINT32_MAX;
  std::string clean;
  for (Variant v : kAllVariants) {
    Labyrinth w(inst);
    const std::string name = vname(v);
    const int fail_count = o.failures;
    RunResult r;
    RunOptions opt = options(v, 11, 9, 16);
    opt.stm.time_budget_seconds = kCellBudgetSeconds;
    try {
      r = run_workload(w, opt);
    } catch (const Error& e) {
      fail(o, name + " " + e.what());
      continue;
    }
    if (w.processed() != 100) fail(o, name + fmt(" processed %u", w.processed()));
    if (!r.problems.empty()) fail(o, name + " " + r.problems.front());
    std::set<std::uint32_t> used;
    std::uint32_t routed = 0;
    for (std::size_t j = 0; j < w.paths().size(); ++j) {
      const auto& p = w.paths()[j];
      if (!p) continue;
      ++routed;
      if (p->empty() || p->front() != inst.jobs[j].src || p->back() != inst.jobs[j].dst) {
        fail(o, name + fmt(" path %zu has wrong endpoints", j));
      }
      for (std::size_t i = 0; i < p->size(); ++i) {
        if (!used.insert((*p)[i]).second) fail(o, name + fmt(" path %zu overlaps another", j));
        if (i > 0 && manhattan_cells(g, (*p)[i - 1], (*p)[i]) != 2) fail(o, name + fmt(" path %zu is broken", j));
      }
    }
    routed_min = std::min(routed_min, routed);
    if (fail_count == o.failures) clean += " " + name;
  }
  for (const auto& job : inst.jobs) {
    const auto p = bfs_route(g, job.src, job.dst, [](std::uint32_t) { return true; });
    if (!p || p->size() != manhattan_cells(g, job.src, job.dst)) fail(o, "empty-grid BFS length mismatch");
  }
  if (o.pass) {
    o.detail = fmt("7 variants processed 100 jobs, >= %u routed, disjoint connected paths; 100 BFS lengths exact", routed_min);
  } else if (!clean.empty()) {
    o.detail += "; clean:" + clean;
  }
  return o;
}

// Sequential k-means over all shards, written without the library's helpers.
std::vector<std::uint32_t> sequential_kmeans(const KMeansConfig& cfg, const std::vector<std::uint32_t>& points,
                                             std::uint32_t rounds) {
  const std::uint32_t k = cfg.k, d = cfg.dims, n = static_cast<std::uint32_t>(points.size() / d);
  std::vector<std::uint32_t> centroids(points.begin(), points.begin() + k * d);
  for (std::uint32_t r = 0; r < rounds; ++r) {
    std::vector<std::uint64_t> sums(k * d, 0), counts(k, 0);
    for (std::uint32_t p = 0; p < n; ++p) {
      std::uint32_t best = 0;
      std::uint64_t best_dist = UINT64_MAX;
      for (std::uint32_t c = 0; c < k; ++c) {
        std::uint64_t dist = 0;
        for (std::uint32_t i = 0; i < d; ++i) {
          const std::int64_t diff = static_cast<std::int64_t>(points[p * d + i]) - centroids[c * d + i];
          dist += static_cast<std::uint64_t>(diff * diff);
        }
        if (dist < best_dist) {
          best_dist = dist;
          best = c;
        }
      }
      for (std::uint32_t i = 0; i < d; ++i) sums[best * d + i] += points[p * d + i];
      ++counts[best];
    }
    for (std::uint32_t c = 0; c < k; ++c) {
      if (counts[c] == 0) continue;
      for (std::uint32_t i = 0; i < d; ++i) centroids[c * d + i] = static_cast<std::uint32_t>(sums[c * d + i] / counts[c]);
    }
  }
  return centroids;
}

Outcome multi_dpu_merge() {
  Outcome o;
  auto cfg = KMeansConfig::low_contention();
  cfg.points = 10'000;
  cfg.rounds = 3;
  const auto points = generate_points(cfg, cfg.points * 4, 77);
  const auto expected = sequential_kmeans(cfg, points, cfg.rounds);
  for (Variant v : {Variant::kNorec, Variant::kTinyCtlWb, Variant::kVrEtlWt}) {
    const auto r = multi_dpu_kmeans(4, cfg, points, options(v, 4, 77, 64));
    if (r.centroids != expected) fail(o, vname(v) + " merged centroids differ from the sequential oracle");
    if (r.total_count != 40'000u) fail(o, vname(v) + fmt(" merged count %llu", (unsigned long long)r.total_count));
    if (!r.problems.empty()) fail(o, vname(v) + " " + r.problems.front());
  }
  if (o.pass) o.detail = "D=4, 40000 points, 3 rounds: norec, tiny_ctlwb, vr_etlwt equal the sequential oracle";
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, Outcome (*)()>> criteria = {
      {"opacity suite (ArrayBench A, 7 variants x 2 placements x {1,4,11} tasklets, 1e5 commits)", opacity_suite},
      {"serializability oracle on random small histories, mutants detected", serializability_suite},
      {"golden equivalence with serial replay at 1 tasklet", golden_equivalence},
      {"write-through / write-back heap equivalence", write_policy_equivalence},
      {"MRAM accesses per tx_load, Tiny ETLWT minus NOrec", mram_accounting},
      {"abort ordering at 11 tasklets (majority of 10 runs)", abort_ordering},
      {"CAS stress and constant-hash aliasing", cas_and_aliasing},
      {"labyrinth structure and BFS lengths", labyrinth_structure},
      {"multi-DPU KMeans merge", multi_dpu_merge},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && !only.count(id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = criteria[i].second();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s criterion %d: %s -- %s (%.1fs)\n", out.pass ? "PASS" : "FAIL", id, criteria[i].first.c_str(),
                out.detail.c_str(), secs);
    std::fflush(stdout);
    if (!out.pass) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
