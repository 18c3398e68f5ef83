#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pimstm/stm/lock_words.hpp"
#include "pimstm/stm/stm.hpp"

namespace pimstm {

// Single sequence lock (even = free) plus value-based validation; commit-time
// locking and write-back only.
class NorecCc final : public ConcurrencyControl {
 public:
  explicit NorecCc(Mutation mutation = Mutation::kNone) : mutation_(mutation) {}

  std::string name() const override { return "norec"; }
  SetShape set_shape() const override { return {2, false, false}; }
  std::uint32_t shared_footprint(const StmConfig&) const override { return 8; }
  void install(Dpu& dpu, const StmConfig& cfg) override;

  void begin(Transaction& tx) override;
  std::optional<std::uint32_t> read(Transaction& tx, std::uint32_t addr) override;
  bool write(Transaction& tx, std::uint32_t addr, std::uint32_t value) override;
  bool commit(Transaction& tx) override;
  void rollback(Transaction& tx) override;
  std::vector<std::string> quiescent_issues(Dpu& dpu) const override;

  std::uint32_t sequence_lock_addr() const { return seqlock_; }

 private:
  std::uint32_t wait_until_even(Transaction& tx);
  // Returns the new snapshot, or nullopt if a read value changed.
  std::optional<std::uint32_t> revalidate(Transaction& tx);

  Mutation mutation_;
  Tier tier_ = Tier::kMram;
  std::uint32_t seqlock_ = 0;
};

// Version-clock STM with an ownership-record table, invisible reads and
// snapshot extension, in CTL-WB, ETL-WB and ETL-WT flavours.
class TinyCc final : public ConcurrencyControl {
 public:
  TinyCc(Variant variant, Mutation mutation = Mutation::kNone);

  std::string name() const override;
  SetShape set_shape() const override { return {2, write_through_, true}; }
  std::uint32_t shared_footprint(const StmConfig& cfg) const override {
    return 8 + lock_table_share(cfg, cfg.lock_table_entries * 4);
  }
  void install(Dpu& dpu, const StmConfig& cfg) override;

  void begin(Transaction& tx) override;
  std::optional<std::uint32_t> read(Transaction& tx, std::uint32_t addr) override;
  bool write(Transaction& tx, std::uint32_t addr, std::uint32_t value) override;
  bool commit(Transaction& tx) override;
  void rollback(Transaction& tx) override;
  std::vector<std::string> quiescent_issues(Dpu& dpu) const override;

  // Advances the snapshot upper bound to the current clock if every read is
  // still valid.
  bool extend(Transaction& tx);

  std::uint32_t clock_addr() const { return clock_; }
  std::uint32_t lock_addr(std::uint32_t index) const { return locks_ + index * 4; }
  std::uint32_t lock_index(std::uint32_t addr) const { return map_addr_to_lock(addr, entries_); }

 private:
  bool validate_readset(Transaction& tx);
  // Old version of an orec this transaction locked.
  std::optional<std::uint32_t> owned_version(Transaction& tx, std::uint32_t index);
  bool lock_orec(Transaction& tx, std::uint32_t index);
  std::uint32_t advance_clock(Transaction& tx);

  Variant variant_;
  bool encounter_time_;
  bool write_through_;
  Mutation mutation_;
  Tier tier_ = Tier::kMram;
  Tier lock_tier_ = Tier::kMram;
  std::uint32_t entries_ = 0;
  std::uint32_t clock_ = 0;
  std::uint32_t locks_ = 0;
};

// Visible reads through a table of rw-locks; conflicts abort immediately and
// no readset validation is ever needed.
class VrCc final : public ConcurrencyControl {
 public:
  VrCc(Variant variant, Mutation mutation = Mutation::kNone);

  std::string name() const override;
  SetShape set_shape() const override { return {1, write_through_, false}; }
  std::uint32_t shared_footprint(const StmConfig& cfg) const override {
    return lock_table_share(cfg, cfg.lock_table_entries * 4);
  }
  void install(Dpu& dpu, const StmConfig& cfg) override;

  void begin(Transaction& tx) override;
  std::optional<std::uint32_t> read(Transaction& tx, std::uint32_t addr) override;
  bool write(Transaction& tx, std::uint32_t addr, std::uint32_t value) override;
  bool commit(Transaction& tx) override;
  void rollback(Transaction& tx) override;
  std::vector<std::string> quiescent_issues(Dpu& dpu) const override;

  std::uint32_t lock_addr(std::uint32_t index) const { return locks_ + index * 4; }
  std::uint32_t lock_index(std::uint32_t addr) const { return map_addr_to_lock(addr, entries_); }

 private:
  enum class Acquire { kConflict, kAcquired, kAlreadyHeld };
  Acquire acquire_write(Transaction& tx, std::uint32_t index);
  void release(Transaction& tx, std::uint32_t index);
  void release_all(Transaction& tx);

  Variant variant_;
  bool encounter_time_;
  bool write_through_;
  Mutation mutation_;
  Tier tier_ = Tier::kMram;
  std::uint32_t entries_ = 0;
  std::uint32_t locks_ = 0;
};

}  // namespace pimstm
