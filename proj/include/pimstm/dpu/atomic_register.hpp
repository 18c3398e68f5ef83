#pragma once

#include <array>
#include <atomic>
#include <cstdint>
#include <optional>

namespace pimstm {

inline constexpr int kAtomicSlots = 256;

// Slot selection for the 256-bit atomic register. The hardware hash is not
// documented; this stand-in spreads word-aligned addresses and still admits
// collisions (0x0 and 0x2000 share slot 0).
constexpr std::uint8_t atomic_bit_index(std::uint32_t addr) {
  return static_cast<std::uint8_t>(((addr >> 2) ^ (addr >> 10)) & 0xFFu);
}

using SlotHash = std::uint8_t (*)(std::uint32_t);

// Test-and-set bits with owner tracking. Distinct addresses hashing to the
// same slot exclude each other.
class AtomicRegister {
 public:
  explicit AtomicRegister(SlotHash hash = &default_hash);

  std::uint8_t slot_of(std::uint32_t addr) const { return hash_(addr); }

  // Spins with bounded exponential back-off until the slot is free.
  // Throws kSelfDeadlock if the caller already owns the slot.
  void acquire(std::uint32_t addr, int tasklet);
  // Throws kReleaseNotOwned unless the caller owns the slot.
  void release(std::uint32_t addr, int tasklet);

  std::optional<int> owner(std::uint8_t slot) const;

 private:
  static std::uint8_t default_hash(std::uint32_t addr) { return atomic_bit_index(addr); }

  static constexpr int kFree = -1;
  SlotHash hash_;
  std::array<std::atomic<int>, kAtomicSlots> owners_;
};

}  // namespace pimstm
