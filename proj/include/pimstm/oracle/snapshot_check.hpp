#pragma once

#include <array>
#include <atomic>
#include <cstdint>
#include <functional>
#include <mutex>
#include <span>
#include <vector>

#include "pimstm/oracle/history.hpp"

namespace pimstm {

struct ReadObservation {
  std::uint32_t addr = 0;
  std::uint32_t value = 0;
};

// Global invariant over the reads of one attempt, in program order. Must hold
// for every snapshot an opaque STM lets a transaction see.
using SnapshotInvariant = std::function<bool(std::span<const ReadObservation>)>;

struct SnapshotViolation {
  int tasklet = 0;
  std::uint64_t attempt = 0;
  bool committed = false;
  std::size_t reads = 0;
};

// Evaluates the invariant over every attempt in the log, aborted ones
// included. Attempts without a terminal event are evaluated as aborted.
std::vector<SnapshotViolation> doomed_snapshot_check(const SnapshotInvariant& invariant,
                                                     const std::vector<HistoryEvent>& events);

// Streaming form for runs too long to log: buffers each tasklet's reads and
// evaluates the invariant when the attempt ends.
class SnapshotMonitor final : public HistoryRecorder {
 public:
  explicit SnapshotMonitor(SnapshotInvariant invariant) : invariant_(std::move(invariant)) {}

  void record(int tasklet, std::uint64_t attempt, EventKind kind, std::uint32_t addr,
              std::uint32_t value) override;

  std::uint64_t violations() const { return violations_.load(); }
  std::uint64_t attempts_checked() const { return checked_.load(); }
  // Up to the first 16 violations.
  std::vector<SnapshotViolation> samples() const;

 private:
  static constexpr std::size_t kMaxSamples = 16;

  SnapshotInvariant invariant_;
  std::array<std::vector<ReadObservation>, kHostTasklet + 1> reads_;
  std::atomic<std::uint64_t> violations_{0};
  std::atomic<std::uint64_t> checked_{0};
  mutable std::mutex samples_mutex_;
  std::vector<SnapshotViolation> samples_;
};

}  // namespace pimstm
