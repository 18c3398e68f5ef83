#include "pimstm/dpu/dpu.hpp"

#include <string>

#include "pimstm/error.hpp"

namespace pimstm {

Dpu::Dpu(SlotHash hash) : atomics_(hash) {}

CasResult Dpu::cas32(Tier tier, std::uint32_t addr, std::uint32_t expected, std::uint32_t desired,
                     const TaskletCtx& ctx) {
  if (addr % 4 != 0) throw Error(ErrorCode::kMisaligned, "cas32 at " + std::to_string(addr));
  if (static_cast<std::uint64_t>(addr) + 4 > DpuMemory::capacity(tier)) {
    throw Error(ErrorCode::kOutOfBounds, "cas32 at " + std::to_string(addr));
  }
  atomics_.acquire(addr, ctx.tasklet);
  std::uint32_t observed = memory_.load32(tier, addr, ctx);
  bool success = observed == expected;
  if (success) memory_.store32(tier, addr, desired, ctx);
  atomics_.release(addr, ctx.tasklet);
  return CasResult{success, observed};
}

Region Dpu::allocate(Tier tier, std::uint32_t bytes, std::uint32_t align) {
  auto& next = next_[static_cast<int>(tier)];
  std::uint64_t base = (static_cast<std::uint64_t>(next) + align - 1) / align * align;
  if (base + bytes > DpuMemory::capacity(tier)) {
    throw Error(ErrorCode::kOutOfMemory, std::string(to_string(tier)) + ": cannot allocate " +
                                             std::to_string(bytes) + " bytes at " + std::to_string(base));
  }
  next = static_cast<std::uint32_t>(base + bytes);
  return Region{tier, static_cast<std::uint32_t>(base), bytes};
}

}  // namespace pimstm
