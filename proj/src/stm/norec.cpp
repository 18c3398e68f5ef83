#include <string>

#include "pimstm/stm/variants.hpp"
#include "spin.hpp"

namespace pimstm {

void NorecCc::install(Dpu& dpu, const StmConfig& cfg) {
  tier_ = cfg.metadata_tier;
  seqlock_ = dpu.allocate(tier_, 8, 8).base;
}

std::uint32_t NorecCc::wait_until_even(Transaction& tx) {
  unsigned round = 0;
  for (;;) {
    const std::uint32_t s = tx.meta_load(seqlock_);
    if ((s & 1u) == 0) return s;
    detail::spin_wait(round);
  }
}

void NorecCc::begin(Transaction& tx) {
  // Doubles as back-off: a transaction does not start while a writer commits.
  tx.desc().start_snapshot = wait_until_even(tx);
}

std::optional<std::uint32_t> NorecCc::revalidate(Transaction& tx) {
  Transaction::PhaseGuard g(tx, Phase::kValidate);
  const TaskletCtx& ctx = tx.ctx();
  TxLog& rs = tx.desc().readset;
  for (;;) {
    const std::uint32_t s = wait_until_even(tx);
    if (mutation_ != Mutation::kNorecNoRevalidation) {
      for (std::uint32_t i = 0; i < rs.size(); ++i) {
        if (tx.heap_load(rs.word(ctx, i, 0)) != rs.word(ctx, i, 1)) return std::nullopt;
      }
    }
    if (tx.meta_load(seqlock_) == s) return s;
  }
}

std::optional<std::uint32_t> NorecCc::read(Transaction& tx, std::uint32_t addr) {
  TxDescriptor& d = tx.desc();
  if (!d.writeset.empty()) {
    if (auto v = d.writeset.lookup(tx.ctx(), addr)) return v;
  }
  for (;;) {
    const std::uint32_t value = tx.heap_load(addr);
    if (tx.meta_load(seqlock_) == d.start_snapshot) {
      d.readset.push(tx.ctx(), addr, value);
      return value;
    }
    auto snapshot = revalidate(tx);
    if (!snapshot) return std::nullopt;
    d.start_snapshot = *snapshot;
  }
}

bool NorecCc::write(Transaction& tx, std::uint32_t addr, std::uint32_t value) {
  tx.desc().writeset.upsert(tx.ctx(), addr, value);
  return true;
}

bool NorecCc::commit(Transaction& tx) {
  TxDescriptor& d = tx.desc();
  if (d.writeset.empty()) return true;
  while (!tx.meta_cas(seqlock_, d.start_snapshot, d.start_snapshot + 1).success) {
    auto snapshot = revalidate(tx);
    if (!snapshot) return false;
    d.start_snapshot = *snapshot;
  }
  const TaskletCtx& ctx = tx.ctx();
  for (std::uint32_t i = 0; i < d.writeset.size(); ++i) {
    tx.heap_store(d.writeset.addr_at(ctx, i), d.writeset.value_at(ctx, i));
  }
  // Only the holder writes an odd sequence lock.
  tx.meta_store(seqlock_, d.start_snapshot + 2);
  return true;
}

void NorecCc::rollback(Transaction&) {}

std::vector<std::string> NorecCc::quiescent_issues(Dpu& dpu) const {
  std::vector<std::string> issues;
  const std::uint32_t s = dpu.memory().load32(tier_, seqlock_, host_ctx());
  if (s & 1u) issues.push_back("sequence lock left odd: " + std::to_string(s));
  return issues;
}

}  // namespace pimstm
