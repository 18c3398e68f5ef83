#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "pimstm/dpu/atomic_register.hpp"
#include "pimstm/oracle/history.hpp"
#include "pimstm/oracle/snapshot_check.hpp"
#include "pimstm/stm/stm.hpp"

namespace pimstm::bench {

// A benchmark as seen by the runner. The runner calls setup once, then for
// each round: begin_round, tasklet_main on every tasklet concurrently,
// end_round. verify runs at the end with the Stm still alive.
class Workload {
 public:
  virtual ~Workload() = default;

  virtual std::string name() const = 0;
  // Set capacities and heap size this workload needs.
  virtual StmConfig size(StmConfig cfg) const = 0;
  // Host-side initialisation of the transactional heap.
  virtual void setup(Stm& stm) = 0;
  virtual int rounds() const { return 1; }
  virtual void begin_round(Stm&, int) {}
  virtual void tasklet_main(Transaction& tx, int round) = 0;
  virtual void end_round(Stm&, int) {}
  // One message per broken benchmark invariant.
  virtual std::vector<std::string> verify(Stm& stm) = 0;
  // Invariant every attempt's reads must satisfy; valid after setup.
  virtual std::optional<SnapshotInvariant> snapshot_invariant() const { return std::nullopt; }
};

// Per-tasklet stream seeded with seed xor tasklet id.
inline std::mt19937_64 tasklet_rng(std::uint64_t seed, int tasklet) {
  return std::mt19937_64(seed ^ static_cast<std::uint64_t>(tasklet));
}

struct RunOptions {
  StmConfig stm;
  // Yield one in N simulated accesses; 0 disables.
  std::uint32_t interleave = 0;
  SlotHash slot_hash = nullptr;
  // Run against the serial reference instead of cfg.variant.
  bool serial = false;
  bool monitor_snapshots = false;
  HistoryRecorder* recorder = nullptr;
};

struct RunResult {
  Stats stats;
  std::vector<std::string> problems;
  std::vector<std::string> quiescent_issues;
  std::uint64_t snapshot_violations = 0;
  std::uint64_t snapshots_checked = 0;
  std::vector<std::byte> heap_image;
  // Heap right after setup; only captured when a recorder is attached.
  std::vector<std::byte> initial_heap_image;
  std::uint32_t heap_base = 0;
  std::uint32_t metadata_footprint = 0;

  // Setup-time value of a heap word, for replaying recorded histories.
  std::uint32_t initial_word(std::uint32_t addr) const;
};

RunResult run_workload(Workload& workload, const RunOptions& options);

// The golden outcome: the workload run by one tasklet on the serial STM.
RunResult serial_replay(Workload& workload, std::uint64_t seed);

}  // namespace pimstm::bench
