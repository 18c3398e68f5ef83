#include "pimstm/stm/stm.hpp"

#include <string>

namespace pimstm {

const char* to_string(TxStatus s) {
  switch (s) {
    case TxStatus::kIdle: return "idle";
    case TxStatus::kActive: return "active";
    case TxStatus::kCommitted: return "committed";
    case TxStatus::kAborted: return "aborted";
  }
  return "?";
}

const char* to_string(EventKind kind) {
  switch (kind) {
    case EventKind::kBegin: return "begin";
    case EventKind::kRead: return "read";
    case EventKind::kWrite: return "write";
    case EventKind::kCommit: return "commit";
    case EventKind::kAbort: return "abort";
  }
  return "?";
}

namespace {

std::uint32_t per_tasklet_bytes(const StmConfig& cfg, const SetShape& shape) {
  std::uint32_t bytes = TxLog::bytes_for(cfg.readset_capacity, shape.readset_words);
  bytes += TxLog::bytes_for(cfg.writeset_capacity, 2);
  if (shape.undo_log) bytes += TxLog::bytes_for(cfg.writeset_capacity, 2);
  if (shape.owned_locks) bytes += TxLog::bytes_for(cfg.writeset_capacity, 2);
  return bytes;
}

Breakdown breakdown_of(Phase p) {
  switch (p) {
    case Phase::kStart: return Breakdown::kStart;
    case Phase::kRead: return Breakdown::kRead;
    case Phase::kWrite: return Breakdown::kWrite;
    case Phase::kValidate: return Breakdown::kValidation;
    case Phase::kCommit: return Breakdown::kCommit;
    case Phase::kAbort: return Breakdown::kWasted;
    case Phase::kOther: return Breakdown::kOther;
  }
  return Breakdown::kOther;
}

}  // namespace

// ---------------------------------------------------------------- Transaction

Transaction::Transaction(Stm& stm, int tasklet) : stm_(stm), ctx_{tasklet, Phase::kOther} {
  desc_.tasklet_id = tasklet;
  const StmConfig& cfg = stm.config();
  const SetShape shape = stm.cc().set_shape();
  DpuMemory* mem = &stm.dpu().memory();
  const Tier tier = cfg.metadata_tier;
  auto make = [&](std::uint32_t cap, std::uint32_t words, const char* name) {
    Region r = stm.dpu().allocate(tier, TxLog::bytes_for(cap, words), 8);
    return TxLog(mem, r, cap, words, name);
  };
  desc_.readset = make(cfg.readset_capacity, shape.readset_words, "readset");
  desc_.writeset = WriteSet(make(cfg.writeset_capacity, 2, "writeset"));
  if (shape.undo_log) desc_.undo_log = make(cfg.writeset_capacity, 2, "undo log");
  if (shape.owned_locks) desc_.owned_locks = make(cfg.writeset_capacity, 2, "owned locks");
}

const StmConfig& Transaction::config() const { return stm_.config(); }
Tier Transaction::meta_tier() const { return stm_.config().metadata_tier; }

Phase Transaction::switch_phase(Phase next) {
  const auto now = Clock::now();
  desc_.phase_ns[static_cast<int>(ctx_.phase)] +=
      static_cast<std::uint64_t>(std::chrono::duration_cast<std::chrono::nanoseconds>(now - phase_mark_).count());
  phase_mark_ = now;
  const Phase prev = ctx_.phase;
  ctx_.phase = next;
  return prev;
}

void Transaction::require_active(const char* op) const {
  if (desc_.status != TxStatus::kActive) {
    throw Error(ErrorCode::kNoActiveTransaction,
                std::string(op) + " outside a transaction on tasklet " + std::to_string(desc_.tasklet_id));
  }
}

void Transaction::check_heap_addr(std::uint32_t addr) const {
  if (addr % 4 != 0) throw Error(ErrorCode::kMisaligned, "transactional address " + std::to_string(addr));
  if (!stm_.heap().contains(addr)) {
    throw Error(ErrorCode::kOutOfBounds, "transactional address " + std::to_string(addr) + " outside heap");
  }
}

void Transaction::record(EventKind kind, std::uint32_t addr, std::uint32_t value) {
  if (HistoryRecorder* r = stm_.recorder()) r->record(desc_.tasklet_id, desc_.attempt, kind, addr, value);
}

void Transaction::begin() {
  if (desc_.status == TxStatus::kActive) {
    throw Error(ErrorCode::kNestedTransaction, "tasklet " + std::to_string(desc_.tasklet_id));
  }
  desc_.readset.clear();
  desc_.writeset.clear();
  desc_.undo_log.clear();
  desc_.owned_locks.clear();
  desc_.phase_ns = {};
  ++desc_.attempt;
  desc_.status = TxStatus::kActive;
  record(EventKind::kBegin);
  phase_mark_ = Clock::now();
  ctx_.phase = Phase::kStart;
  stm_.cc().begin(*this);
  switch_phase(Phase::kOther);
}

void Transaction::rollback_attempt() {
  {
    PhaseGuard g(*this, Phase::kAbort);
    stm_.cc().rollback(*this);
  }
  desc_.status = TxStatus::kAborted;
  record(EventKind::kAbort);
}

void Transaction::finish_attempt(bool committed) {
  switch_phase(ctx_.phase);
  if (committed) {
    ++stats_.committed;
    for (int p = 0; p < kPhaseCount; ++p) {
      stats_.breakdown_ns[static_cast<int>(breakdown_of(static_cast<Phase>(p)))] += desc_.phase_ns[p];
    }
  } else {
    ++stats_.aborted;
    std::uint64_t total = 0;
    for (auto ns : desc_.phase_ns) total += ns;
    stats_.breakdown_ns[static_cast<int>(Breakdown::kWasted)] += total;
  }
  desc_.phase_ns = {};
}

std::uint32_t Transaction::load(std::uint32_t addr) {
  require_active("load");
  check_heap_addr(addr);
  PhaseGuard g(*this, Phase::kRead);
  ++stats_.tx_loads;
  std::optional<std::uint32_t> v;
  try {
    v = stm_.cc().read(*this, addr);
  } catch (...) {
    rollback_attempt();
    finish_attempt(false);
    throw;
  }
  if (!v) {
    rollback_attempt();
    finish_attempt(false);
    throw TxAborted{};
  }
  record(EventKind::kRead, addr, *v);
  return *v;
}

void Transaction::store(std::uint32_t addr, std::uint32_t value) {
  require_active("store");
  check_heap_addr(addr);
  PhaseGuard g(*this, Phase::kWrite);
  ++stats_.tx_stores;
  bool ok = false;
  try {
    ok = stm_.cc().write(*this, addr, value);
  } catch (...) {
    rollback_attempt();
    finish_attempt(false);
    throw;
  }
  if (!ok) {
    rollback_attempt();
    finish_attempt(false);
    throw TxAborted{};
  }
  record(EventKind::kWrite, addr, value);
}

TxStatus Transaction::commit() {
  require_active("commit");
  bool ok = false;
  {
    PhaseGuard g(*this, Phase::kCommit);
    try {
      ok = stm_.cc().commit(*this);
    } catch (...) {
      rollback_attempt();
      finish_attempt(false);
      throw;
    }
  }
  if (ok) {
    desc_.status = TxStatus::kCommitted;
    record(EventKind::kCommit);
    finish_attempt(true);
    return TxStatus::kCommitted;
  }
  rollback_attempt();
  finish_attempt(false);
  return TxStatus::kAborted;
}

void Transaction::abort() {
  require_active("abort");
  rollback_attempt();
  finish_attempt(false);
  throw TxAborted{};
}

void Transaction::throw_retry_limit(std::uint64_t aborts) const {
  throw Error(ErrorCode::kRetryLimitExceeded, "tasklet " + std::to_string(desc_.tasklet_id) + " aborted " +
                                                  std::to_string(aborts) + " times in a row");
}

void Transaction::check_time_budget() const {
  const double budget = config().time_budget_seconds;
  if (budget <= 0) return;
  const double spent = std::chrono::duration<double>(Clock::now() - stm_.created()).count();
  if (spent > budget) {
    throw Error(ErrorCode::kTimeBudgetExceeded, "tasklet " + std::to_string(desc_.tasklet_id) + " still retrying after " +
                                                    std::to_string(spent) + " s");
  }
}

std::uint32_t Transaction::raw_load(std::uint32_t addr) {
  return stm_.dpu().memory().load32(Tier::kMram, addr, ctx_);
}

void Transaction::raw_store(std::uint32_t addr, std::uint32_t value) {
  stm_.dpu().memory().store32(Tier::kMram, addr, value, ctx_);
}

std::uint32_t Transaction::heap_load(std::uint32_t addr) {
  return stm_.dpu().memory().load32(Tier::kMram, addr, ctx_);
}

void Transaction::heap_store(std::uint32_t addr, std::uint32_t value) {
  stm_.dpu().memory().store32(Tier::kMram, addr, value, ctx_);
}

std::uint32_t Transaction::meta_load(std::uint32_t addr) {
  return stm_.dpu().memory().load32(meta_tier(), addr, ctx_);
}

void Transaction::meta_store(std::uint32_t addr, std::uint32_t value) {
  stm_.dpu().memory().store32(meta_tier(), addr, value, ctx_);
}

CasResult Transaction::meta_cas(std::uint32_t addr, std::uint32_t expected, std::uint32_t desired) {
  return stm_.dpu().cas32(meta_tier(), addr, expected, desired, ctx_);
}

std::uint32_t Transaction::lock_load(std::uint32_t addr) {
  return stm_.dpu().memory().load32(lock_tier(config()), addr, ctx_);
}

void Transaction::lock_store(std::uint32_t addr, std::uint32_t value) {
  stm_.dpu().memory().store32(lock_tier(config()), addr, value, ctx_);
}

CasResult Transaction::lock_cas(std::uint32_t addr, std::uint32_t expected, std::uint32_t desired) {
  return stm_.dpu().cas32(lock_tier(config()), addr, expected, desired, ctx_);
}

// ------------------------------------------------------------------------ Stm

Stm::Stm(Dpu& dpu, StmConfig cfg) : Stm(dpu, cfg, make_concurrency_control(cfg)) {}

Stm::Stm(Dpu& dpu, StmConfig cfg, std::unique_ptr<ConcurrencyControl> cc)
    : dpu_(dpu), cfg_(cfg), cc_(std::move(cc)) {
  validate(cfg_);
  const SetShape shape = cc_->set_shape();
  const std::uint64_t footprint = static_cast<std::uint64_t>(cc_->shared_footprint(cfg_)) +
                                  static_cast<std::uint64_t>(cfg_.tasklets) * per_tasklet_bytes(cfg_, shape);
  if (cfg_.metadata_tier == Tier::kWram) {
    const std::uint64_t used = dpu_.allocated(Tier::kWram);
    const std::uint64_t budget = kWramBytes - cfg_.app_wram_reservation;
    if (footprint + used > budget) {
      throw Error(ErrorCode::kConfigInvalid, "metadata needs " + std::to_string(footprint) +
                                                 " bytes of WRAM but only " +
                                                 std::to_string(budget > used ? budget - used : 0) +
                                                 " remain after the application reservation");
    }
  }
  footprint_ = static_cast<std::uint32_t>(footprint);
  cc_->install(dpu_, cfg_);
  heap_ = dpu_.allocate(Tier::kMram, cfg_.heap_bytes, 8);
  heap_next_ = heap_.base;
  txs_.reserve(cfg_.tasklets);
  for (int t = 0; t < cfg_.tasklets; ++t) txs_.push_back(std::make_unique<Transaction>(*this, t));
}

Stm::~Stm() = default;

Transaction& Stm::tx(int tasklet) {
  if (tasklet < 0 || tasklet >= cfg_.tasklets) {
    throw Error(ErrorCode::kInvalidTaskletCount, "no tasklet " + std::to_string(tasklet));
  }
  return *txs_[tasklet];
}

std::uint32_t Stm::heap_alloc(std::uint32_t bytes, std::uint32_t align) {
  const std::uint64_t base = (static_cast<std::uint64_t>(heap_next_) + align - 1) / align * align;
  if (base + bytes > static_cast<std::uint64_t>(heap_.base) + heap_.size) {
    throw Error(ErrorCode::kOutOfMemory, "heap exhausted allocating " + std::to_string(bytes) + " bytes");
  }
  heap_next_ = static_cast<std::uint32_t>(base + bytes);
  return static_cast<std::uint32_t>(base);
}

std::uint32_t Stm::host_load(std::uint32_t addr) { return dpu_.memory().load32(Tier::kMram, addr, host_ctx()); }

void Stm::host_store(std::uint32_t addr, std::uint32_t value) {
  dpu_.memory().store32(Tier::kMram, addr, value, host_ctx());
}

std::vector<std::byte> Stm::heap_image() const { return dpu_.memory().image(Tier::kMram, heap_.base, heap_.size); }

Stats Stm::collect_stats() const {
  Stats out;
  for (const auto& tx : txs_) out += tx->stats();
  return out;
}

void Stm::reset_stats() {
  for (auto& tx : txs_) tx->stats() = Stats{};
}

}  // namespace pimstm
