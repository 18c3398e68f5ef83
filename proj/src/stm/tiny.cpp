#include <string>

#include "pimstm/stm/variants.hpp"

namespace pimstm {

TinyCc::TinyCc(Variant variant, Mutation mutation)
    : variant_(variant),
      encounter_time_(design_of(variant).timing == LockTiming::kEncounterTime),
      write_through_(design_of(variant).policy == WritePolicy::kWriteThrough),
      mutation_(mutation) {
  if (!is_tiny(variant)) throw Error(ErrorCode::kConfigInvalid, "TinyCc built for " + std::string(to_string(variant)));
}

std::string TinyCc::name() const { return std::string(to_string(variant_)); }

void TinyCc::install(Dpu& dpu, const StmConfig& cfg) {
  tier_ = cfg.metadata_tier;
  entries_ = cfg.lock_table_entries;
  clock_ = dpu.allocate(tier_, 8, 8).base;
  lock_tier_ = lock_tier(cfg);
  locks_ = dpu.allocate(lock_tier_, entries_ * 4, 8).base;
}

void TinyCc::begin(Transaction& tx) {
  TxDescriptor& d = tx.desc();
  d.snapshot_lb = d.snapshot_ub = tx.meta_load(clock_);
}

std::optional<std::uint32_t> TinyCc::owned_version(Transaction& tx, std::uint32_t index) {
  const TxLog& owned = tx.desc().owned_locks;
  for (std::uint32_t i = 0; i < owned.size(); ++i) {
    if (owned.word(tx.ctx(), i, 0) == index) return owned.word(tx.ctx(), i, 1);
  }
  return std::nullopt;
}

bool TinyCc::validate_readset(Transaction& tx) {
  if (mutation_ == Mutation::kTinyNoValidation) return true;
  const TaskletCtx& ctx = tx.ctx();
  const TxLog& rs = tx.desc().readset;
  for (std::uint32_t i = 0; i < rs.size(); ++i) {
    const std::uint32_t index = lock_index(rs.word(ctx, i, 0));
    const std::uint32_t version = rs.word(ctx, i, 1);
    const std::uint32_t o = tx.lock_load(lock_addr(index));
    if (orec::locked(o)) {
      if (orec::owner(o) != tx.tasklet()) return false;
      auto before = owned_version(tx, index);
      if (!before || *before != version) return false;
    } else if (orec::version(o) != version) {
      return false;
    }
  }
  return true;
}

bool TinyCc::extend(Transaction& tx) {
  Transaction::PhaseGuard g(tx, Phase::kValidate);
  const std::uint32_t now = tx.meta_load(clock_);
  if (!validate_readset(tx)) return false;
  tx.desc().snapshot_ub = now;
  return true;
}

std::optional<std::uint32_t> TinyCc::read(Transaction& tx, std::uint32_t addr) {
  TxDescriptor& d = tx.desc();
  const TaskletCtx& ctx = tx.ctx();
  if (!encounter_time_ && !d.writeset.empty()) {
    if (auto v = d.writeset.lookup(ctx, addr)) return v;
  }
  const std::uint32_t lock = lock_addr(lock_index(addr));
  int mismatches = 0;
  for (;;) {
    const std::uint32_t o1 = tx.lock_load(lock);
    if (orec::locked(o1)) {
      if (orec::owner(o1) != tx.tasklet()) return std::nullopt;
      // Our own ETL lock: memory is current for WT; WB may have a buffered value.
      if (!write_through_) {
        if (auto v = d.writeset.lookup(ctx, addr)) return v;
      }
      return tx.heap_load(addr);
    }
    const std::uint32_t value = tx.heap_load(addr);
    const std::uint32_t o2 = tx.lock_load(lock);
    if (o1 != o2) {
      // One retry tolerates a commit that raced with the value load.
      if (++mismatches > 1) return std::nullopt;
      continue;
    }
    const std::uint32_t version = orec::version(o1);
    if (version > d.snapshot_ub) {
      if (!extend(tx)) return std::nullopt;
      if (tx.lock_load(lock) != o1) {
        if (++mismatches > 1) return std::nullopt;
        continue;
      }
    }
    d.readset.push(ctx, addr, version);
    return value;
  }
}

bool TinyCc::lock_orec(Transaction& tx, std::uint32_t index) {
  TxDescriptor& d = tx.desc();
  const std::uint32_t lock = lock_addr(index);
  for (;;) {
    const std::uint32_t o = tx.lock_load(lock);
    if (orec::locked(o)) return orec::owner(o) == tx.tasklet();
    if (encounter_time_ && orec::version(o) > d.snapshot_ub) {
      // The location changed after our snapshot; reads of it (if any) must
      // still hold before we take ownership.
      if (!extend(tx)) return false;
    }
    if (!tx.lock_cas(lock, o, orec::make_locked(tx.tasklet())).success) continue;
    try {
      d.owned_locks.push(tx.ctx(), index, orec::version(o));
    } catch (...) {
      tx.lock_store(lock, o);
      throw;
    }
    return true;
  }
}

bool TinyCc::write(Transaction& tx, std::uint32_t addr, std::uint32_t value) {
  TxDescriptor& d = tx.desc();
  const TaskletCtx& ctx = tx.ctx();
  if (!encounter_time_) {
    d.writeset.upsert(ctx, addr, value);
    return true;
  }
  if (!lock_orec(tx, lock_index(addr))) return false;
  if (write_through_) {
    d.undo_log.push(ctx, addr, tx.heap_load(addr));
    tx.heap_store(addr, value);
  } else {
    d.writeset.upsert(ctx, addr, value);
  }
  return true;
}

std::uint32_t TinyCc::advance_clock(Transaction& tx) {
  for (;;) {
    const std::uint32_t c = tx.meta_load(clock_);
    if (tx.meta_cas(clock_, c, c + 1).success) return c + 1;
  }
}

bool TinyCc::commit(Transaction& tx) {
  TxDescriptor& d = tx.desc();
  const TaskletCtx& ctx = tx.ctx();
  if (d.writeset.empty() && d.owned_locks.empty()) return true;

  if (!encounter_time_) {
    for (std::uint32_t i = 0; i < d.writeset.size(); ++i) {
      if (!lock_orec(tx, lock_index(d.writeset.addr_at(ctx, i)))) return false;
    }
  }

  const std::uint32_t wv = advance_clock(tx);
  // No commit slipped in since the snapshot: the readset is still valid.
  if (d.snapshot_ub != wv - 1) {
    Transaction::PhaseGuard g(tx, Phase::kValidate);
    if (!validate_readset(tx)) return false;
  }

  if (!write_through_) {
    for (std::uint32_t i = 0; i < d.writeset.size(); ++i) {
      tx.heap_store(d.writeset.addr_at(ctx, i), d.writeset.value_at(ctx, i));
    }
  }
  const TxLog& owned = d.owned_locks;
  for (std::uint32_t i = 0; i < owned.size(); ++i) {
    tx.lock_store(lock_addr(owned.word(ctx, i, 0)), orec::make_free(wv));
  }
  return true;
}

void TinyCc::rollback(Transaction& tx) {
  TxDescriptor& d = tx.desc();
  const TaskletCtx& ctx = tx.ctx();
  if (write_through_) {
    for (std::uint32_t i = d.undo_log.size(); i-- > 0;) {
      tx.heap_store(d.undo_log.word(ctx, i, 0), d.undo_log.word(ctx, i, 1));
    }
  }
  const TxLog& owned = d.owned_locks;
  if (owned.empty()) return;
  // Write-through readers may have loaded our dirty values between their two
  // orec samples. Restoring the old version would let that read pass, so the
  // orecs are released with a fresh clock value instead.
  std::optional<std::uint32_t> fresh;
  if (write_through_) fresh = advance_clock(tx);
  for (std::uint32_t i = 0; i < owned.size(); ++i) {
    tx.lock_store(lock_addr(owned.word(ctx, i, 0)), orec::make_free(fresh.value_or(owned.word(ctx, i, 1))));
  }
}

std::vector<std::string> TinyCc::quiescent_issues(Dpu& dpu) const {
  std::vector<std::string> issues;
  const auto ctx = host_ctx();
  const std::uint32_t clock = dpu.memory().load32(tier_, clock_, ctx);
  for (std::uint32_t i = 0; i < entries_; ++i) {
    const std::uint32_t o = dpu.memory().load32(lock_tier_, lock_addr(i), ctx);
    if (orec::locked(o)) {
      issues.push_back("orec " + std::to_string(i) + " still locked by tasklet " + std::to_string(orec::owner(o)));
    } else if (orec::version(o) > clock) {
      issues.push_back("orec " + std::to_string(i) + " version " + std::to_string(orec::version(o)) +
                       " ahead of clock " + std::to_string(clock));
    }
  }
  return issues;
}

}  // namespace pimstm
