#pragma once

#include <chrono>
#include <cstdint>
#include <exception>
#include <memory>
#include <optional>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "pimstm/dpu/dpu.hpp"
#include "pimstm/error.hpp"
#include "pimstm/stm/config.hpp"
#include "pimstm/stm/recorder.hpp"
#include "pimstm/stm/stats.hpp"
#include "pimstm/stm/tx_log.hpp"

namespace pimstm {

class Transaction;

// Thrown out of Transaction::load/store/abort once the attempt has been
// rolled back. Caught by Transaction::run.
struct TxAborted {};

enum class TxStatus { kIdle, kActive, kCommitted, kAborted };

const char* to_string(TxStatus s);

// Per-tasklet transaction state. Snapshot fields are tasklet-private
// registers; the sets live in DPU memory.
struct TxDescriptor {
  int tasklet_id = 0;
  TxStatus status = TxStatus::kIdle;
  std::uint32_t snapshot_lb = 0;
  std::uint32_t snapshot_ub = 0;
  std::uint32_t start_snapshot = 0;
  TxLog readset;
  WriteSet writeset;
  TxLog undo_log;
  // {lock index, version before locking}; Tiny only.
  TxLog owned_locks;
  std::array<std::uint64_t, kPhaseCount> phase_ns{};
  std::uint64_t retries = 0;
  std::uint64_t attempt = 0;
};

// What a concurrency-control algorithm needs in the per-tasklet descriptor.
struct SetShape {
  std::uint32_t readset_words = 2;
  bool undo_log = false;
  bool owned_locks = false;
};

// One STM algorithm. Shared metadata is placed by install(); per-tasklet sets
// are allocated by Stm according to set_shape(). read/write/commit report an
// abort by returning nullopt/false; the caller then invokes rollback.
class ConcurrencyControl {
 public:
  virtual ~ConcurrencyControl() = default;

  virtual std::string name() const = 0;
  virtual SetShape set_shape() const = 0;
  virtual std::uint32_t shared_footprint(const StmConfig& cfg) const = 0;
  virtual void install(Dpu& dpu, const StmConfig& cfg) = 0;

  virtual void begin(Transaction& tx) = 0;
  virtual std::optional<std::uint32_t> read(Transaction& tx, std::uint32_t addr) = 0;
  virtual bool write(Transaction& tx, std::uint32_t addr, std::uint32_t value) = 0;
  virtual bool commit(Transaction& tx) = 0;
  virtual void rollback(Transaction& tx) = 0;

  // Host-side scan of shared metadata at a quiescent point; one message per
  // broken invariant (held locks, versions ahead of the clock).
  virtual std::vector<std::string> quiescent_issues(Dpu& dpu) const = 0;
};

std::unique_ptr<ConcurrencyControl> make_concurrency_control(const StmConfig& cfg);

class Stm;

// The handle a tasklet uses to run transactions. Owned by Stm, one per
// tasklet, never shared between tasklets.
class Transaction {
 public:
  Transaction(Stm& stm, int tasklet);
  Transaction(const Transaction&) = delete;
  Transaction& operator=(const Transaction&) = delete;

  void begin();
  std::uint32_t load(std::uint32_t addr);
  void store(std::uint32_t addr, std::uint32_t value);
  // Returns kAborted (after rolling back) instead of throwing.
  TxStatus commit();
  // Rolls back the active attempt and throws TxAborted.
  [[noreturn]] void abort();

  // Retry envelope: begin, body(*this), commit, until committed.
  template <class Body>
  auto run(Body&& body);

  int tasklet() const { return desc_.tasklet_id; }
  TaskletCtx& ctx() { return ctx_; }
  const TxDescriptor& descriptor() const { return desc_; }
  Stats& stats() { return stats_; }
  const Stats& stats() const { return stats_; }
  Stm& stm() { return stm_; }

  // Non-transactional access to application data, attributed to phase Other.
  std::uint32_t raw_load(std::uint32_t addr);
  void raw_store(std::uint32_t addr, std::uint32_t value);

  // ---- interface for ConcurrencyControl implementations ----
  class PhaseGuard {
   public:
    PhaseGuard(Transaction& tx, Phase phase) : tx_(tx), prev_(tx.switch_phase(phase)) {}
    ~PhaseGuard() { tx_.switch_phase(prev_); }
    PhaseGuard(const PhaseGuard&) = delete;
    PhaseGuard& operator=(const PhaseGuard&) = delete;

   private:
    Transaction& tx_;
    Phase prev_;
  };

  TxDescriptor& desc() { return desc_; }
  const StmConfig& config() const;
  Tier meta_tier() const;
  std::uint32_t heap_load(std::uint32_t addr);
  void heap_store(std::uint32_t addr, std::uint32_t value);
  std::uint32_t meta_load(std::uint32_t addr);
  void meta_store(std::uint32_t addr, std::uint32_t value);
  CasResult meta_cas(std::uint32_t addr, std::uint32_t expected, std::uint32_t desired);
  // Lock-table words, which may sit in a different tier than other metadata.
  std::uint32_t lock_load(std::uint32_t addr);
  void lock_store(std::uint32_t addr, std::uint32_t value);
  CasResult lock_cas(std::uint32_t addr, std::uint32_t expected, std::uint32_t desired);

 private:
  friend class Stm;
  using Clock = std::chrono::steady_clock;

  Phase switch_phase(Phase next);
  void require_active(const char* op) const;
  void check_heap_addr(std::uint32_t addr) const;
  void rollback_attempt();
  void finish_attempt(bool committed);
  void record(EventKind kind, std::uint32_t addr = 0, std::uint32_t value = 0);
  void throw_retry_limit(std::uint64_t aborts) const;
  void check_time_budget() const;

  Stm& stm_;
  TaskletCtx ctx_;
  TxDescriptor desc_;
  Stats stats_;
  Clock::time_point phase_mark_{};
};

class Stm {
 public:
  // Builds the algorithm selected by cfg.variant (and cfg.mutation).
  Stm(Dpu& dpu, StmConfig cfg);
  // Uses a caller-supplied algorithm, e.g. the serial reference.
  Stm(Dpu& dpu, StmConfig cfg, std::unique_ptr<ConcurrencyControl> cc);
  ~Stm();
  Stm(const Stm&) = delete;
  Stm& operator=(const Stm&) = delete;

  Transaction& tx(int tasklet);
  int tasklets() const { return cfg_.tasklets; }

  Dpu& dpu() { return dpu_; }
  const StmConfig& config() const { return cfg_; }
  ConcurrencyControl& cc() { return *cc_; }
  Region heap() const { return heap_; }

  // Host-side bump allocation inside the heap, for benchmark setup.
  std::uint32_t heap_alloc(std::uint32_t bytes, std::uint32_t align = 4);
  std::uint32_t host_load(std::uint32_t addr);
  void host_store(std::uint32_t addr, std::uint32_t value);
  std::vector<std::byte> heap_image() const;

  // Bytes of metadata this configuration places in its metadata tier.
  std::uint32_t metadata_footprint() const { return footprint_; }

  void set_recorder(HistoryRecorder* recorder) { recorder_ = recorder; }
  HistoryRecorder* recorder() const { return recorder_; }

  std::chrono::steady_clock::time_point created() const { return created_; }

  // Sum over tasklets; accesses and elapsed time are filled by the runner.
  Stats collect_stats() const;
  void reset_stats();

 private:
  Dpu& dpu_;
  StmConfig cfg_;
  std::unique_ptr<ConcurrencyControl> cc_;
  Region heap_{};
  std::uint32_t heap_next_ = 0;
  std::uint32_t footprint_ = 0;
  HistoryRecorder* recorder_ = nullptr;
  std::chrono::steady_clock::time_point created_ = std::chrono::steady_clock::now();
  std::vector<std::unique_ptr<Transaction>> txs_;
};

template <class Body>
auto Transaction::run(Body&& body) {
  using R = std::invoke_result_t<Body&, Transaction&>;
  std::uint64_t aborts = 0;
  for (;;) {
    begin();
    try {
      if constexpr (std::is_void_v<R>) {
        body(*this);
        if (commit() == TxStatus::kCommitted) {
          desc_.retries = aborts;
          ++stats_.retries_histogram[aborts];
          return;
        }
      } else {
        R result = body(*this);
        if (commit() == TxStatus::kCommitted) {
          desc_.retries = aborts;
          ++stats_.retries_histogram[aborts];
          return result;
        }
      }
    } catch (const TxAborted&) {
    } catch (...) {
      if (desc_.status == TxStatus::kActive) {
        rollback_attempt();
        finish_attempt(false);
      }
      throw;
    }
    ++aborts;
    desc_.retries = aborts;
    if (aborts >= config().retry_cap) throw_retry_limit(aborts);
    if (aborts % 256 == 0) check_time_budget();
  }
}

}  // namespace pimstm
