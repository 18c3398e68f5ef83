#pragma once

#include <cstdint>
#include <optional>

#include "pimstm/dpu/dpu.hpp"

namespace pimstm {

// Fixed-capacity array of entries living in DPU memory (WRAM or MRAM per the
// metadata placement). Each entry is `words` 32-bit words. The entry count is
// tasklet-private and kept in a register, so only entry accesses are counted.
class TxLog {
 public:
  TxLog() = default;
  TxLog(DpuMemory* memory, Region region, std::uint32_t capacity, std::uint32_t words, const char* name)
      : memory_(memory), region_(region), capacity_(capacity), words_(words), name_(name) {}

  std::uint32_t size() const { return size_; }
  std::uint32_t capacity() const { return capacity_; }
  bool empty() const { return size_ == 0; }
  void clear() { size_ = 0; }
  void truncate(std::uint32_t n) { size_ = n < size_ ? n : size_; }

  // Throws kCapacityExceeded when full.
  void push(const TaskletCtx& ctx, std::uint32_t w0, std::uint32_t w1 = 0);

  std::uint32_t word(const TaskletCtx& ctx, std::uint32_t index, std::uint32_t w) const {
    return memory_->load32(region_.tier, addr_of(index, w), ctx);
  }
  void set_word(const TaskletCtx& ctx, std::uint32_t index, std::uint32_t w, std::uint32_t v) {
    memory_->store32(region_.tier, addr_of(index, w), v, ctx);
  }

  static std::uint32_t bytes_for(std::uint32_t capacity, std::uint32_t words) { return capacity * words * 4; }

 private:
  std::uint32_t addr_of(std::uint32_t index, std::uint32_t w) const { return region_.base + (index * words_ + w) * 4; }

  DpuMemory* memory_ = nullptr;
  Region region_{};
  std::uint32_t capacity_ = 0;
  std::uint32_t words_ = 1;
  std::uint32_t size_ = 0;
  const char* name_ = "log";
};

// Write buffer of {addr, value}; at most one entry per address, found by a
// linear scan.
class WriteSet {
 public:
  WriteSet() = default;
  explicit WriteSet(TxLog log) : log_(log) {}

  std::uint32_t size() const { return log_.size(); }
  bool empty() const { return log_.empty(); }
  void clear() { log_.clear(); }

  std::optional<std::uint32_t> find(const TaskletCtx& ctx, std::uint32_t addr) const;
  std::optional<std::uint32_t> lookup(const TaskletCtx& ctx, std::uint32_t addr) const;
  void upsert(const TaskletCtx& ctx, std::uint32_t addr, std::uint32_t value);

  std::uint32_t addr_at(const TaskletCtx& ctx, std::uint32_t i) const { return log_.word(ctx, i, 0); }
  std::uint32_t value_at(const TaskletCtx& ctx, std::uint32_t i) const { return log_.word(ctx, i, 1); }

 private:
  TxLog log_;
};

}  // namespace pimstm
