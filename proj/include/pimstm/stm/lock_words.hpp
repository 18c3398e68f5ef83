#pragma once

#include <bit>
#include <cstdint>
#include <optional>

namespace pimstm {

// Lock-table index of a word-aligned address; table size is a power of two.
constexpr std::uint32_t map_addr_to_lock(std::uint32_t addr, std::uint32_t entries) {
  return (addr >> 2) & (entries - 1);
}

// Tiny ownership record: bit 0 is the lock bit; the remaining 31 bits hold
// the version when free and the owning tasklet when locked.
namespace orec {

constexpr bool locked(std::uint32_t w) { return (w & 1u) != 0; }
constexpr std::uint32_t version(std::uint32_t w) { return w >> 1; }
constexpr int owner(std::uint32_t w) { return static_cast<int>(w >> 1); }
constexpr std::uint32_t make_free(std::uint32_t version) { return version << 1; }
constexpr std::uint32_t make_locked(int owner) { return (static_cast<std::uint32_t>(owner) << 1) | 1u; }

}  // namespace orec

// Visible-reads rw-lock word.
//   bits 1..0   mode: 00 free, 01 read, 10 write (11 never occurs)
//   read mode:  bits 31..26 reader count, bits 25..2 reader bitmask
//   write mode: bits 31..2 owner token (tasklet id)
namespace rwlock {

enum class Mode : std::uint32_t { kFree = 0, kRead = 1, kWrite = 2 };

struct Word {
  Mode mode = Mode::kFree;
  std::uint32_t readers = 0;
  std::uint32_t mask = 0;
  std::uint32_t owner = 0;

  friend constexpr bool operator==(const Word&, const Word&) = default;
};

inline constexpr std::uint32_t kModeMask = 0x3u;
inline constexpr int kCountShift = 26;
inline constexpr int kMaskShift = 2;
inline constexpr std::uint32_t kMaskBits = 0x00FFFFFFu;

constexpr std::uint32_t encode(const Word& w) {
  switch (w.mode) {
    case Mode::kFree: return 0;
    case Mode::kRead:
      return (w.readers << kCountShift) | ((w.mask & kMaskBits) << kMaskShift) | static_cast<std::uint32_t>(Mode::kRead);
    case Mode::kWrite: return (w.owner << 2) | static_cast<std::uint32_t>(Mode::kWrite);
  }
  return 0;
}

// nullopt for the forbidden mode 11 or a read word whose count disagrees
// with its bitmask.
constexpr std::optional<Word> decode(std::uint32_t raw) {
  const std::uint32_t mode = raw & kModeMask;
  if (mode == 0) {
    if (raw != 0) return std::nullopt;
    return Word{};
  }
  if (mode == 1) {
    Word w{Mode::kRead, raw >> kCountShift, (raw >> kMaskShift) & kMaskBits, 0};
    if (static_cast<std::uint32_t>(std::popcount(w.mask)) != w.readers) return std::nullopt;
    return w;
  }
  if (mode == 2) return Word{Mode::kWrite, 0, 0, raw >> 2};
  return std::nullopt;
}

constexpr Mode mode(std::uint32_t raw) { return static_cast<Mode>(raw & kModeMask); }
constexpr std::uint32_t reader_bit(int tasklet) { return 1u << (kMaskShift + tasklet); }
constexpr bool has_reader(std::uint32_t raw, int tasklet) {
  return mode(raw) == Mode::kRead && (raw & reader_bit(tasklet)) != 0;
}
constexpr std::uint32_t reader_count(std::uint32_t raw) { return raw >> kCountShift; }
constexpr bool owned_by(std::uint32_t raw, int tasklet) {
  return mode(raw) == Mode::kWrite && (raw >> 2) == static_cast<std::uint32_t>(tasklet);
}
constexpr std::uint32_t write_locked(int tasklet) { return (static_cast<std::uint32_t>(tasklet) << 2) | 2u; }

// Adds a reader to a free or read-mode word.
constexpr std::uint32_t add_reader(std::uint32_t raw, int tasklet) {
  if (mode(raw) == Mode::kFree) raw = static_cast<std::uint32_t>(Mode::kRead);
  return raw + (1u << kCountShift) + reader_bit(tasklet);
}

// Removes a reader; the last one leaves the word free.
constexpr std::uint32_t remove_reader(std::uint32_t raw, int tasklet) {
  const std::uint32_t next = raw - (1u << kCountShift) - reader_bit(tasklet);
  return reader_count(next) == 0 ? 0u : next;
}

}  // namespace rwlock

}  // namespace pimstm
