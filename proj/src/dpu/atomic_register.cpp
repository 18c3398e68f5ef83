#include "pimstm/dpu/atomic_register.hpp"

#include <string>
#include <thread>

#include "pimstm/error.hpp"

#if defined(__x86_64__) || defined(__i386__)
#include <immintrin.h>
#endif

namespace pimstm {

namespace {

inline void cpu_relax() {
#if defined(__x86_64__) || defined(__i386__)
  _mm_pause();
#endif
}

}  // namespace

AtomicRegister::AtomicRegister(SlotHash hash) : hash_(hash != nullptr ? hash : &default_hash) {
  for (auto& o : owners_) o.store(kFree, std::memory_order_relaxed);
}

void AtomicRegister::acquire(std::uint32_t addr, int tasklet) {
  auto& slot = owners_[hash_(addr)];
  if (slot.load(std::memory_order_relaxed) == tasklet) {
    throw Error(ErrorCode::kSelfDeadlock, "tasklet " + std::to_string(tasklet) + " re-acquired slot " +
                                              std::to_string(hash_(addr)));
  }
  unsigned spins = 1;
  for (;;) {
    int expected = kFree;
    if (slot.compare_exchange_weak(expected, tasklet, std::memory_order_acquire, std::memory_order_relaxed)) {
      return;
    }
    if (spins <= 16) {
      for (unsigned i = 0; i < spins; ++i) cpu_relax();
      spins <<= 1;
    } else {
      // The holder may be descheduled; give it the core.
      std::this_thread::yield();
    }
  }
}

void AtomicRegister::release(std::uint32_t addr, int tasklet) {
  auto& slot = owners_[hash_(addr)];
  int expected = tasklet;
  if (!slot.compare_exchange_strong(expected, kFree, std::memory_order_release, std::memory_order_relaxed)) {
    throw Error(ErrorCode::kReleaseNotOwned, "tasklet " + std::to_string(tasklet) + " released slot " +
                                                 std::to_string(hash_(addr)) + " owned by " +
                                                 std::to_string(expected));
  }
}

std::optional<int> AtomicRegister::owner(std::uint8_t slot) const {
  int o = owners_[slot].load(std::memory_order_acquire);
  if (o == kFree) return std::nullopt;
  return o;
}

}  // namespace pimstm
