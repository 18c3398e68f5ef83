#pragma once

#include <cstdint>

#include "pimstm/dpu/atomic_register.hpp"
#include "pimstm/dpu/memory.hpp"

namespace pimstm {

struct CasResult {
  bool success;
  std::uint32_t observed;
};

struct Region {
  Tier tier = Tier::kMram;
  std::uint32_t base = 0;
  std::uint32_t size = 0;

  bool contains(std::uint32_t addr, std::uint32_t width = 4) const {
    return addr >= base && addr - base + width <= size;
  }
};

// One simulated DPU: memory tiers, the atomic register and a bump allocator
// per tier. DPU instances share nothing.
class Dpu {
 public:
  explicit Dpu(SlotHash hash = nullptr);

  DpuMemory& memory() { return memory_; }
  const DpuMemory& memory() const { return memory_; }
  AtomicRegister& atomics() { return atomics_; }

  // Compare-and-swap emulated with the atomic register: acquire the slot of
  // addr, compare, conditionally store, release. Counts one load plus one
  // store on success.
  CasResult cas32(Tier tier, std::uint32_t addr, std::uint32_t expected, std::uint32_t desired,
                  const TaskletCtx& ctx);

  // Host-side setup allocation. Address 0 of each tier is never handed out so
  // that 0 can serve as a null pointer.
  Region allocate(Tier tier, std::uint32_t bytes, std::uint32_t align = 8);
  std::uint32_t allocated(Tier tier) const { return next_[static_cast<int>(tier)]; }

 private:
  DpuMemory memory_;
  AtomicRegister atomics_;
  std::uint32_t next_[kTierCount] = {8, 8};
};

}  // namespace pimstm
