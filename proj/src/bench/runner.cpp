#include <chrono>
#include <cstring>
#include <memory>

#include "pimstm/bench/workload.hpp"
#include "pimstm/dpu/tasklets.hpp"
#include "pimstm/oracle/serial_stm.hpp"

namespace pimstm::bench {

RunResult run_workload(Workload& workload, const RunOptions& options) {
  const StmConfig cfg = workload.size(options.stm);
  Dpu dpu(options.slot_hash);
  auto stm = options.serial ? std::make_unique<Stm>(dpu, cfg, make_serial_cc()) : std::make_unique<Stm>(dpu, cfg);
  workload.setup(*stm);
  RunResult out;
  if (options.recorder) out.initial_heap_image = stm->heap_image();

  std::unique_ptr<SnapshotMonitor> monitor;
  std::vector<HistoryRecorder*> sinks;
  if (options.monitor_snapshots) {
    if (auto inv = workload.snapshot_invariant()) {
      monitor = std::make_unique<SnapshotMonitor>(std::move(*inv));
      sinks.push_back(monitor.get());
    }
  }
  if (options.recorder) sinks.push_back(options.recorder);
  RecorderFanout fanout(sinks);
  if (!sinks.empty()) stm->set_recorder(sinks.size() == 1 ? sinks.front() : &fanout);

  dpu.memory().set_interleave(options.interleave);
  dpu.memory().counters().reset();
  stm->reset_stats();

  double elapsed = 0.0;
  for (int r = 0; r < workload.rounds(); ++r) {
    workload.begin_round(*stm, r);
    const auto t0 = std::chrono::steady_clock::now();
    run_tasklets(cfg.tasklets, [&](int t) { workload.tasklet_main(stm->tx(t), r); });
    elapsed += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    workload.end_round(*stm, r);
  }
  dpu.memory().set_interleave(0);
  stm->set_recorder(nullptr);

  out.stats = stm->collect_stats();
  out.stats.accesses = dpu.memory().counters().totals(0, cfg.tasklets);
  out.stats.elapsed_seconds = elapsed;
  out.problems = workload.verify(*stm);
  out.quiescent_issues = stm->cc().quiescent_issues(dpu);
  if (monitor) {
    out.snapshot_violations = monitor->violations();
    out.snapshots_checked = monitor->attempts_checked();
  }
  out.heap_image = stm->heap_image();
  out.heap_base = stm->heap().base;
  out.metadata_footprint = stm->metadata_footprint();
  return out;
}

std::uint32_t RunResult::initial_word(std::uint32_t addr) const {
  const std::uint32_t off = addr - heap_base;
  if (addr < heap_base || off + 4 > initial_heap_image.size()) {
    throw Error(ErrorCode::kOutOfBounds, "address outside the captured heap image");
  }
  std::uint32_t v;
  std::memcpy(&v, initial_heap_image.data() + off, 4);
  return v;
}

RunResult serial_replay(Workload& workload, std::uint64_t seed) {
  RunOptions opt;
  opt.stm.tasklets = 1;
  opt.stm.seed = seed;
  opt.serial = true;
  return run_workload(workload, opt);
}

}  // namespace pimstm::bench
