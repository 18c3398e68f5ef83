#include "pimstm/dpu/memory.hpp"

#include <cstdlib>
#include <cstring>
#include <functional>
#include <new>
#include <string>
#include <thread>

#include "pimstm/error.hpp"

namespace pimstm {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kOutOfBounds: return "OutOfBounds";
    case ErrorCode::kMisaligned: return "Misaligned";
    case ErrorCode::kOutOfMemory: return "OutOfMemory";
    case ErrorCode::kReleaseNotOwned: return "ReleaseNotOwned";
    case ErrorCode::kSelfDeadlock: return "SelfDeadlock";
    case ErrorCode::kInvalidTaskletCount: return "InvalidTaskletCount";
    case ErrorCode::kTaskletFailed: return "TaskletFailed";
    case ErrorCode::kConfigInvalid: return "ConfigInvalid";
    case ErrorCode::kNestedTransaction: return "NestedTransaction";
    case ErrorCode::kNoActiveTransaction: return "NoActiveTransaction";
    case ErrorCode::kCapacityExceeded: return "CapacityExceeded";
    case ErrorCode::kRetryLimitExceeded: return "RetryLimitExceeded";
    case ErrorCode::kTimeBudgetExceeded: return "TimeBudgetExceeded";
    case ErrorCode::kSearchSpaceExceeded: return "SearchSpaceExceeded";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kOracleViolation: return "OracleViolation";
  }
  return "Unknown";
}

const char* to_string(Tier tier) { return tier == Tier::kWram ? "wram" : "mram"; }

const char* to_string(Phase phase) {
  switch (phase) {
    case Phase::kStart: return "start";
    case Phase::kRead: return "read";
    case Phase::kWrite: return "write";
    case Phase::kValidate: return "validate";
    case Phase::kCommit: return "commit";
    case Phase::kAbort: return "abort";
    case Phase::kOther: return "other";
  }
  return "?";
}

std::uint64_t AccessTotals::tier_total(Tier tier) const {
  std::uint64_t sum = 0;
  for (const auto& phase : cells) {
    for (auto c : phase[static_cast<int>(tier)]) sum += c;
  }
  return sum;
}

std::uint64_t AccessTotals::phase_tier_total(Phase phase, Tier tier) const {
  const auto& c = cells[static_cast<int>(phase)][static_cast<int>(tier)];
  return c[0] + c[1];
}

AccessTotals AccessTotals::operator-(const AccessTotals& rhs) const {
  AccessTotals out = *this;
  for (int p = 0; p < kPhaseCount; ++p)
    for (int t = 0; t < kTierCount; ++t)
      for (int k = 0; k < 2; ++k) out.cells[p][t][k] -= rhs.cells[p][t][k];
  return out;
}

AccessTotals& AccessTotals::operator+=(const AccessTotals& rhs) {
  for (int p = 0; p < kPhaseCount; ++p)
    for (int t = 0; t < kTierCount; ++t)
      for (int k = 0; k < 2; ++k) cells[p][t][k] += rhs.cells[p][t][k];
  return *this;
}

AccessTotals AccessCounters::totals(int first, int last) const {
  AccessTotals out;
  for (int t = first; t < last; ++t) {
    for (int p = 0; p < kPhaseCount; ++p)
      for (int tier = 0; tier < kTierCount; ++tier)
        for (int k = 0; k < 2; ++k) {
          out.cells[p][tier][k] += get(t, static_cast<Phase>(p), static_cast<Tier>(tier), static_cast<AccessKind>(k));
        }
  }
  return out;
}

std::uint64_t AccessCounters::grand_total() const {
  std::uint64_t sum = 0;
  for (const auto& row : rows_)
    for (const auto& c : row.cells) sum += c.load(std::memory_order_relaxed);
  return sum;
}

void AccessCounters::reset() {
  for (auto& row : rows_)
    for (auto& c : row.cells) c.store(0, std::memory_order_relaxed);
}

void DpuMemory::FreeDeleter::operator()(std::byte* p) const noexcept { std::free(p); }

namespace {

std::byte* zeroed(std::size_t bytes) {
  // calloc of a large block maps zero pages lazily, so an untouched 64 MB
  // bank costs nothing.
  auto* p = static_cast<std::byte*>(std::calloc(bytes, 1));
  if (p == nullptr) throw std::bad_alloc();
  return p;
}

template <class T>
std::uint64_t atomic_load_at(std::byte* p) {
  return std::atomic_ref<T>(*reinterpret_cast<T*>(p)).load(std::memory_order_seq_cst);
}

template <class T>
void atomic_store_at(std::byte* p, std::uint64_t v) {
  std::atomic_ref<T>(*reinterpret_cast<T*>(p)).store(static_cast<T>(v), std::memory_order_seq_cst);
}

}  // namespace

DpuMemory::DpuMemory() : wram_(zeroed(kWramBytes)), mram_(zeroed(kMramBytes)) {}

void DpuMemory::check(Tier tier, std::uint32_t addr, unsigned width) const {
  if (width != 1 && width != 2 && width != 4 && width != 8) {
    throw Error(ErrorCode::kMisaligned, "unsupported access width " + std::to_string(width));
  }
  if (static_cast<std::uint64_t>(addr) + width > capacity(tier)) {
    throw Error(ErrorCode::kOutOfBounds, std::string(to_string(tier)) + " address " + std::to_string(addr) +
                                             " width " + std::to_string(width));
  }
  if (addr % width != 0) {
    throw Error(ErrorCode::kMisaligned, std::string(to_string(tier)) + " address " + std::to_string(addr) +
                                            " width " + std::to_string(width));
  }
}

void DpuMemory::maybe_yield(const TaskletCtx& ctx) {
  if (interleave_ == 0 || ctx.tasklet == kHostTasklet) return;
  // xorshift per host thread; schedule diversity, not reproducibility.
  thread_local std::uint64_t state =
      0x9E3779B97F4A7C15ull ^ std::hash<std::thread::id>{}(std::this_thread::get_id());
  state ^= state << 13;
  state ^= state >> 7;
  state ^= state << 17;
  if (state % interleave_ == 0) std::this_thread::yield();
}

std::uint64_t DpuMemory::load(Tier tier, std::uint32_t addr, unsigned width, const TaskletCtx& ctx) {
  check(tier, addr, width);
  std::byte* p = base(tier) + addr;
  std::uint64_t v = 0;
  switch (width) {
    case 1: v = atomic_load_at<std::uint8_t>(p); break;
    case 2: v = atomic_load_at<std::uint16_t>(p); break;
    case 4: v = atomic_load_at<std::uint32_t>(p); break;
    default: v = atomic_load_at<std::uint64_t>(p); break;
  }
  counters_.add(ctx.tasklet, ctx.phase, tier, AccessKind::kLoad);
  maybe_yield(ctx);
  return v;
}

void DpuMemory::store(Tier tier, std::uint32_t addr, unsigned width, std::uint64_t value, const TaskletCtx& ctx) {
  check(tier, addr, width);
  std::byte* p = base(tier) + addr;
  switch (width) {
    case 1: atomic_store_at<std::uint8_t>(p, value); break;
    case 2: atomic_store_at<std::uint16_t>(p, value); break;
    case 4: atomic_store_at<std::uint32_t>(p, value); break;
    default: atomic_store_at<std::uint64_t>(p, value); break;
  }
  counters_.add(ctx.tasklet, ctx.phase, tier, AccessKind::kStore);
  maybe_yield(ctx);
}

std::uint32_t DpuMemory::load32(Tier tier, std::uint32_t addr, const TaskletCtx& ctx) {
  if ((addr & 3u) != 0 || addr > capacity(tier) - 4) check(tier, addr, 4);
  const std::uint32_t v =
      std::atomic_ref<std::uint32_t>(*reinterpret_cast<std::uint32_t*>(base(tier) + addr)).load(std::memory_order_seq_cst);
  counters_.add(ctx.tasklet, ctx.phase, tier, AccessKind::kLoad);
  if (interleave_ != 0) maybe_yield(ctx);
  return v;
}

void DpuMemory::store32(Tier tier, std::uint32_t addr, std::uint32_t value, const TaskletCtx& ctx) {
  if ((addr & 3u) != 0 || addr > capacity(tier) - 4) check(tier, addr, 4);
  std::atomic_ref<std::uint32_t>(*reinterpret_cast<std::uint32_t*>(base(tier) + addr))
      .store(value, std::memory_order_seq_cst);
  counters_.add(ctx.tasklet, ctx.phase, tier, AccessKind::kStore);
  if (interleave_ != 0) maybe_yield(ctx);
}

std::vector<std::byte> DpuMemory::image(Tier tier, std::uint32_t addr, std::uint32_t len) const {
  if (static_cast<std::uint64_t>(addr) + len > capacity(tier)) {
    throw Error(ErrorCode::kOutOfBounds, "image range exceeds tier");
  }
  std::vector<std::byte> out(len);
  std::memcpy(out.data(), base(tier) + addr, len);
  return out;
}

}  // namespace pimstm
