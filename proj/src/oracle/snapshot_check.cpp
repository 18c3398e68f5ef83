#include "pimstm/oracle/snapshot_check.hpp"

#include <map>

namespace pimstm {

std::vector<SnapshotViolation> doomed_snapshot_check(const SnapshotInvariant& invariant,
                                                     const std::vector<HistoryEvent>& events) {
  std::map<std::pair<int, std::uint64_t>, std::vector<ReadObservation>> open;
  std::vector<SnapshotViolation> out;
  auto finish = [&](int tasklet, std::uint64_t attempt, bool committed, const std::vector<ReadObservation>& reads) {
    if (!invariant(reads)) out.push_back(SnapshotViolation{tasklet, attempt, committed, reads.size()});
  };
  for (const auto& e : events) {
    const std::pair key{e.tasklet, e.attempt};
    switch (e.kind) {
      case EventKind::kBegin:
        open[key].clear();
        break;
      case EventKind::kRead:
        open[key].push_back(ReadObservation{e.addr, e.value});
        break;
      case EventKind::kWrite:
        break;
      case EventKind::kCommit:
      case EventKind::kAbort:
        finish(e.tasklet, e.attempt, e.kind == EventKind::kCommit, open[key]);
        open.erase(key);
        break;
    }
  }
  for (const auto& [key, reads] : open) finish(key.first, key.second, false, reads);
  return out;
}

void SnapshotMonitor::record(int tasklet, std::uint64_t attempt, EventKind kind, std::uint32_t addr,
                             std::uint32_t value) {
  auto& reads = reads_[tasklet];
  switch (kind) {
    case EventKind::kBegin:
      reads.clear();
      return;
    case EventKind::kRead:
      reads.push_back(ReadObservation{addr, value});
      return;
    case EventKind::kWrite:
      return;
    case EventKind::kCommit:
    case EventKind::kAbort:
      break;
  }
  checked_.fetch_add(1, std::memory_order_relaxed);
  if (!invariant_(reads)) {
    violations_.fetch_add(1, std::memory_order_relaxed);
    std::lock_guard lock(samples_mutex_);
    if (samples_.size() < kMaxSamples) {
      samples_.push_back(SnapshotViolation{tasklet, attempt, kind == EventKind::kCommit, reads.size()});
    }
  }
  reads.clear();
}

std::vector<SnapshotViolation> SnapshotMonitor::samples() const {
  std::lock_guard lock(samples_mutex_);
  return samples_;
}

}  // namespace pimstm
