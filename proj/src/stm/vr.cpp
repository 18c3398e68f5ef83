#include <string>

#include "pimstm/stm/variants.hpp"

namespace pimstm {

VrCc::VrCc(Variant variant, Mutation mutation)
    : variant_(variant),
      encounter_time_(design_of(variant).timing == LockTiming::kEncounterTime),
      write_through_(design_of(variant).policy == WritePolicy::kWriteThrough),
      mutation_(mutation) {
  if (!is_vr(variant)) throw Error(ErrorCode::kConfigInvalid, "VrCc built for " + std::string(to_string(variant)));
}

std::string VrCc::name() const { return std::string(to_string(variant_)); }

void VrCc::install(Dpu& dpu, const StmConfig& cfg) {
  tier_ = lock_tier(cfg);
  entries_ = cfg.lock_table_entries;
  locks_ = dpu.allocate(tier_, entries_ * 4, 8).base;
}

void VrCc::begin(Transaction&) {}

std::optional<std::uint32_t> VrCc::read(Transaction& tx, std::uint32_t addr) {
  TxDescriptor& d = tx.desc();
  const TaskletCtx& ctx = tx.ctx();
  const int self = tx.tasklet();
  // Under CTL writes are buffered without a lock, so the lock word cannot
  // tell us whether we wrote addr.
  if (!encounter_time_ && !d.writeset.empty()) {
    if (auto v = d.writeset.lookup(ctx, addr)) return v;
  }
  const std::uint32_t index = lock_index(addr);
  const std::uint32_t lock = lock_addr(index);
  for (;;) {
    const std::uint32_t w = tx.lock_load(lock);
    const rwlock::Mode mode = rwlock::mode(w);
    if (mode == rwlock::Mode::kWrite) {
      if (!rwlock::owned_by(w, self)) return std::nullopt;
      if (!write_through_) {
        if (auto v = d.writeset.lookup(ctx, addr)) return v;
      }
      return tx.heap_load(addr);
    }
    if (rwlock::has_reader(w, self) || mutation_ == Mutation::kVrNoReadLocks) return tx.heap_load(addr);
    if (!tx.lock_cas(lock, w, rwlock::add_reader(w, self)).success) continue;
    try {
      d.readset.push(ctx, index);
    } catch (...) {
      release(tx, index);
      throw;
    }
    return tx.heap_load(addr);
  }
}

VrCc::Acquire VrCc::acquire_write(Transaction& tx, std::uint32_t index) {
  const int self = tx.tasklet();
  const std::uint32_t lock = lock_addr(index);
  const std::uint32_t sole_reader = rwlock::add_reader(0, self);
  for (;;) {
    const std::uint32_t w = tx.lock_load(lock);
    switch (rwlock::mode(w)) {
      case rwlock::Mode::kWrite:
        return rwlock::owned_by(w, self) ? Acquire::kAlreadyHeld : Acquire::kConflict;
      case rwlock::Mode::kRead:
        // Upgrade only when we are the only reader; waiting could deadlock.
        if (w != sole_reader) return Acquire::kConflict;
        break;
      case rwlock::Mode::kFree:
        break;
    }
    if (tx.lock_cas(lock, w, rwlock::write_locked(self)).success) return Acquire::kAcquired;
  }
}

bool VrCc::write(Transaction& tx, std::uint32_t addr, std::uint32_t value) {
  TxDescriptor& d = tx.desc();
  const TaskletCtx& ctx = tx.ctx();
  if (!encounter_time_) {
    d.writeset.upsert(ctx, addr, value);
    return true;
  }
  const std::uint32_t index = lock_index(addr);
  const Acquire acquired = acquire_write(tx, index);
  if (acquired == Acquire::kConflict) return false;
  try {
    if (write_through_) {
      d.undo_log.push(ctx, addr, tx.heap_load(addr));
      tx.heap_store(addr, value);
    } else {
      d.writeset.upsert(ctx, addr, value);
    }
  } catch (...) {
    // A lock taken just now is not yet reachable from the logs.
    if (acquired == Acquire::kAcquired) release(tx, index);
    throw;
  }
  return true;
}

bool VrCc::commit(Transaction& tx) {
  TxDescriptor& d = tx.desc();
  const TaskletCtx& ctx = tx.ctx();
  if (!encounter_time_) {
    for (std::uint32_t i = 0; i < d.writeset.size(); ++i) {
      if (acquire_write(tx, lock_index(d.writeset.addr_at(ctx, i))) == Acquire::kConflict) return false;
    }
  }
  if (!write_through_) {
    for (std::uint32_t i = 0; i < d.writeset.size(); ++i) {
      tx.heap_store(d.writeset.addr_at(ctx, i), d.writeset.value_at(ctx, i));
    }
  }
  release_all(tx);
  return true;
}

void VrCc::rollback(Transaction& tx) {
  TxDescriptor& d = tx.desc();
  const TaskletCtx& ctx = tx.ctx();
  if (write_through_) {
    for (std::uint32_t i = d.undo_log.size(); i-- > 0;) {
      tx.heap_store(d.undo_log.word(ctx, i, 0), d.undo_log.word(ctx, i, 1));
    }
  }
  release_all(tx);
}

void VrCc::release(Transaction& tx, std::uint32_t index) {
  const int self = tx.tasklet();
  const std::uint32_t lock = lock_addr(index);
  for (;;) {
    const std::uint32_t w = tx.lock_load(lock);
    if (rwlock::owned_by(w, self)) {
      tx.lock_store(lock, 0);
      return;
    }
    if (!rwlock::has_reader(w, self)) return;
    if (tx.lock_cas(lock, w, rwlock::remove_reader(w, self)).success) return;
  }
}

void VrCc::release_all(Transaction& tx) {
  TxDescriptor& d = tx.desc();
  const TaskletCtx& ctx = tx.ctx();
  for (std::uint32_t i = 0; i < d.readset.size(); ++i) release(tx, d.readset.word(ctx, i, 0));
  if (write_through_) {
    for (std::uint32_t i = 0; i < d.undo_log.size(); ++i) release(tx, lock_index(d.undo_log.word(ctx, i, 0)));
  } else {
    for (std::uint32_t i = 0; i < d.writeset.size(); ++i) release(tx, lock_index(d.writeset.addr_at(ctx, i)));
  }
}

std::vector<std::string> VrCc::quiescent_issues(Dpu& dpu) const {
  std::vector<std::string> issues;
  const auto ctx = host_ctx();
  for (std::uint32_t i = 0; i < entries_; ++i) {
    const std::uint32_t w = dpu.memory().load32(tier_, lock_addr(i), ctx);
    if (w != 0) issues.push_back("rw-lock " + std::to_string(i) + " not free, word " + std::to_string(w));
  }
  return issues;
}

}  // namespace pimstm
