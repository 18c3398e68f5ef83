#pragma once

#include <array>
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

namespace pimstm {

enum class Tier : std::uint8_t { kWram = 0, kMram = 1 };
inline constexpr int kTierCount = 2;

// Execution phase an access is attributed to. kAbort covers rollback work;
// kOther is application code running inside or outside a transaction.
enum class Phase : std::uint8_t { kStart, kRead, kWrite, kValidate, kCommit, kAbort, kOther };
inline constexpr int kPhaseCount = 7;

enum class AccessKind : std::uint8_t { kLoad = 0, kStore = 1 };

inline constexpr int kMaxTasklets = 24;
// Counter row used for host-side setup and verification accesses.
inline constexpr int kHostTasklet = kMaxTasklets;

inline constexpr std::uint32_t kWramBytes = 64u * 1024u;
inline constexpr std::uint32_t kMramBytes = 64u * 1024u * 1024u;

const char* to_string(Tier tier);
const char* to_string(Phase phase);

struct TaskletCtx {
  int tasklet = kHostTasklet;
  Phase phase = Phase::kOther;
};

inline TaskletCtx host_ctx() { return TaskletCtx{kHostTasklet, Phase::kOther}; }

// Loads and stores per phase and tier, summed over a set of tasklets.
struct AccessTotals {
  std::array<std::array<std::array<std::uint64_t, 2>, kTierCount>, kPhaseCount> cells{};

  std::uint64_t get(Phase phase, Tier tier, AccessKind kind) const {
    return cells[static_cast<int>(phase)][static_cast<int>(tier)][static_cast<int>(kind)];
  }
  std::uint64_t tier_total(Tier tier) const;
  std::uint64_t phase_tier_total(Phase phase, Tier tier) const;
  AccessTotals operator-(const AccessTotals& rhs) const;
  AccessTotals& operator+=(const AccessTotals& rhs);
};

class AccessCounters {
 public:
  AccessCounters() { reset(); }

  // Each row has a single writer, the tasklet it belongs to, so a plain
  // relaxed load and store suffice; readers may observe a slightly stale count.
  void add(int tasklet, Phase phase, Tier tier, AccessKind kind) {
    auto& c = rows_[tasklet].cells[index(phase, tier, kind)];
    c.store(c.load(std::memory_order_relaxed) + 1, std::memory_order_relaxed);
  }
  std::uint64_t get(int tasklet, Phase phase, Tier tier, AccessKind kind) const {
    return rows_[tasklet].cells[index(phase, tier, kind)].load(std::memory_order_relaxed);
  }
  // Sum over tasklets [first, last).
  AccessTotals totals(int first = 0, int last = kHostTasklet + 1) const;
  std::uint64_t grand_total() const;
  // Only valid between runs.
  void reset();

 private:
  static constexpr int kCells = kPhaseCount * kTierCount * 2;
  static int index(Phase phase, Tier tier, AccessKind kind) {
    return (static_cast<int>(phase) * kTierCount + static_cast<int>(tier)) * 2 + static_cast<int>(kind);
  }
  struct alignas(64) Row {
    std::array<std::atomic<std::uint64_t>, kCells> cells;
  };
  std::array<Row, kHostTasklet + 1> rows_;
};

// Byte-addressable WRAM and MRAM of one DPU. Every access is tear-free at its
// width and sequentially consistent; application-level races are left to the
// STM running on top.
class DpuMemory {
 public:
  DpuMemory();
  DpuMemory(const DpuMemory&) = delete;
  DpuMemory& operator=(const DpuMemory&) = delete;

  std::uint64_t load(Tier tier, std::uint32_t addr, unsigned width, const TaskletCtx& ctx);
  void store(Tier tier, std::uint32_t addr, unsigned width, std::uint64_t value, const TaskletCtx& ctx);

  std::uint32_t load32(Tier tier, std::uint32_t addr, const TaskletCtx& ctx);
  void store32(Tier tier, std::uint32_t addr, std::uint32_t value, const TaskletCtx& ctx);

  // Uncounted copy of a byte range, for post-run heap comparisons.
  std::vector<std::byte> image(Tier tier, std::uint32_t addr, std::uint32_t len) const;

  static std::uint32_t capacity(Tier tier) { return tier == Tier::kWram ? kWramBytes : kMramBytes; }

  AccessCounters& counters() { return counters_; }
  const AccessCounters& counters() const { return counters_; }

  // Tasklet accesses yield the host thread with probability 1/one_in after
  // completing. Approximates the DPU's instruction-level interleaving of
  // tasklets when the host has fewer cores than tasklets. 0 disables.
  void set_interleave(std::uint32_t one_in) { interleave_ = one_in; }
  std::uint32_t interleave() const { return interleave_; }

 private:
  struct FreeDeleter {
    void operator()(std::byte* p) const noexcept;
  };

  std::byte* base(Tier tier) const { return tier == Tier::kWram ? wram_.get() : mram_.get(); }
  void check(Tier tier, std::uint32_t addr, unsigned width) const;
  void maybe_yield(const TaskletCtx& ctx);

  std::unique_ptr<std::byte[], FreeDeleter> wram_;
  std::unique_ptr<std::byte[], FreeDeleter> mram_;
  AccessCounters counters_;
  std::uint32_t interleave_ = 0;
};

}  // namespace pimstm
