#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <random>
#include <set>

#include "pimstm/bench/arraybench.hpp"
#include "pimstm/dpu/tasklets.hpp"
#include "pimstm/oracle/history.hpp"
#include "pimstm/oracle/serial_stm.hpp"
#include "pimstm/oracle/serializability.hpp"
#include "pimstm/oracle/snapshot_check.hpp"

using namespace pimstm;

namespace {

struct LogBuilder {
  std::vector<HistoryEvent> events;
  std::uint64_t seq = 0;

  void add(int t, std::uint64_t attempt, EventKind k, std::uint32_t addr = 0, std::uint32_t value = 0) {
    events.push_back({seq++, t, attempt, k, addr, value});
  }
  void begin(int t, std::uint64_t a = 1) { add(t, a, EventKind::kBegin); }
  void read(int t, std::uint32_t addr, std::uint32_t v, std::uint64_t a = 1) { add(t, a, EventKind::kRead, addr, v); }
  void write(int t, std::uint32_t addr, std::uint32_t v, std::uint64_t a = 1) {
    add(t, a, EventKind::kWrite, addr, v);
  }
  void commit(int t, std::uint64_t a = 1) { add(t, a, EventKind::kCommit); }
  void abort(int t, std::uint64_t a = 1) { add(t, a, EventKind::kAbort); }
};

}  // namespace

TEST(HistoryLog, RecordExamples) {
  HistoryLog log;
  EXPECT_EQ(log.size(), 0u);
  log.record(0, 1, EventKind::kBegin, 0, 0);
  EXPECT_EQ(log.size(), 1u);
}

TEST(HistoryLog, ConcurrentRecordingHasUniqueAscendingSeq) {
  HistoryLog log;
  run_tasklets(4, [&](int id) {
    for (int i = 0; i < 250; ++i) log.record(id, static_cast<std::uint64_t>(i), EventKind::kRead, 4u * i, id);
  });
  const auto ev = log.events();
  ASSERT_EQ(ev.size(), 1000u);
  for (std::size_t i = 0; i < ev.size(); ++i) EXPECT_EQ(ev[i].seq, i);
  std::map<int, int> per;
  for (const auto& e : ev) ++per[e.tasklet];
  for (int id = 0; id < 4; ++id) EXPECT_EQ(per[id], 250);
}

TEST(HistoryLog, NdjsonRoundTrip) {
  LogBuilder b;
  b.begin(0);
  b.read(0, 16, 0xFFFFFFFFu);
  b.write(0, 20, 3);
  b.commit(0);
  b.begin(2, 7);
  b.abort(2, 7);
  const std::string text = to_ndjson(b.events);
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 6);
  EXPECT_EQ(HistoryLog::parse_ndjson(text), b.events);
  EXPECT_THROW(HistoryLog::parse_ndjson("{\"seq\":1}\n"), Error);
  EXPECT_THROW(HistoryLog::parse_ndjson("not json\n"), Error);
}

TEST(HistoryLog, ValidateHistory) {
  LogBuilder ok;
  ok.begin(0);
  ok.read(0, 0, 0);
  ok.commit(0);
  EXPECT_TRUE(validate_history(ok.events).empty());

  LogBuilder no_begin;
  no_begin.read(0, 0, 0);
  no_begin.commit(0);
  EXPECT_FALSE(validate_history(no_begin.events).empty());

  LogBuilder two_terminals;
  two_terminals.begin(0);
  two_terminals.commit(0);
  two_terminals.abort(0);
  EXPECT_FALSE(validate_history(two_terminals.events).empty());

  auto bad_seq = ok.events;
  std::swap(bad_seq[0].seq, bad_seq[1].seq);
  EXPECT_FALSE(validate_history(bad_seq).empty());
}

TEST(Serializability, SingleTransaction) {
  LogBuilder b;
  b.begin(0);
  b.read(0, 0, 0);
  b.write(0, 0, 5);
  b.commit(0);
  const auto r = check_serializable(b.events);
  EXPECT_TRUE(r.ok);
  ASSERT_EQ(r.order.size(), 1u);
  EXPECT_EQ(r.order[0], (TxId{0, 1}));
}

TEST(Serializability, WriterThenReader) {
  LogBuilder b;
  b.begin(0);
  b.write(0, 8, 1);
  b.commit(0);
  b.begin(1);
  b.read(1, 8, 1);
  b.commit(1);
  const auto r = check_serializable(b.events);
  ASSERT_TRUE(r.ok);
  EXPECT_EQ(r.order, (std::vector<TxId>{{0, 1}, {1, 1}}));
}

TEST(Serializability, ValueNeverWrittenIsACounterexample) {
  LogBuilder b;
  b.begin(0);
  b.write(0, 8, 2);
  b.commit(0);
  b.begin(1);
  b.read(1, 8, 1);
  b.commit(1);
  const auto r = check_serializable(b.events);
  EXPECT_FALSE(r.ok);
  ASSERT_TRUE(r.conflict.has_value());
  EXPECT_EQ(r.conflict->reader, (TxId{1, 1}));
  EXPECT_EQ(r.conflict->addr, 8u);
  EXPECT_EQ(r.conflict->observed, 1u);
  EXPECT_FALSE(describe(*r.conflict).empty());
}

TEST(Serializability, RealTimeOrderIsRespected) {
  // T1 reads the initial value after T0 committed: only T1 before T0 would
  // explain it, which real time forbids.
  LogBuilder b;
  b.begin(0);
  b.write(0, 0, 1);
  b.commit(0);
  b.begin(1);
  b.read(1, 0, 0);
  b.commit(1);
  EXPECT_FALSE(check_serializable(b.events).ok);

  // Overlapping, the same reads are fine.
  LogBuilder c;
  c.begin(1);
  c.begin(0);
  c.write(0, 0, 1);
  c.read(1, 0, 0);
  c.commit(0);
  c.commit(1);
  EXPECT_TRUE(check_serializable(c.events).ok);
}

TEST(Serializability, AbortedAttemptsAreIgnored) {
  LogBuilder b;
  b.begin(0, 1);
  b.read(0, 0, 99);
  b.abort(0, 1);
  b.begin(0, 2);
  b.read(0, 0, 7, 2);
  b.commit(0, 2);
  EXPECT_TRUE(check_serializable(b.events, {{0, 7}}).ok);
  EXPECT_FALSE(check_serializable(b.events).ok);
}

TEST(Serializability, WriteSkewDetected) {
  LogBuilder b;
  b.begin(0);
  b.begin(1);
  b.read(0, 0, 0);
  b.read(0, 4, 0);
  b.read(1, 0, 0);
  b.read(1, 4, 0);
  b.write(0, 0, 1);
  b.write(1, 4, 1);
  b.commit(0);
  b.commit(1);
  EXPECT_FALSE(check_serializable(b.events).ok);
}

TEST(Serializability, LimitsEnforced) {
  LogBuilder many;
  for (int i = 0; i < 31; ++i) {
    many.begin(0, i + 1);
    many.commit(0, i + 1);
  }
  EXPECT_THROW(check_serializable(many.events), Error);
  LogBuilder wide;
  wide.begin(0);
  for (std::uint32_t a = 0; a < 9; ++a) wide.read(0, 4 * a, 0);
  wide.commit(0);
  try {
    check_serializable(wide.events);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kSearchSpaceExceeded);
  }
}

// Random 2-transaction logs: the checker agrees with replaying both orders.
TEST(Serializability, CompleteOnTwoTransactionLogs) {
  std::mt19937 rng(11);
  int accepted = 0, rejected = 0;
  for (int trial = 0; trial < 3000; ++trial) {
    struct Op {
      bool write;
      std::uint32_t addr, value;
    };
    std::array<std::vector<Op>, 2> prog;
    for (auto& p : prog) {
      const int n = 1 + static_cast<int>(rng() % 3);
      for (int i = 0; i < n; ++i) p.push_back({rng() % 2 == 0, static_cast<std::uint32_t>(4 * (rng() % 2)), static_cast<std::uint32_t>(rng() % 3)});
    }
    const bool sequential = rng() % 2 == 0;
    LogBuilder b;
    if (sequential) {
      for (int t = 0; t < 2; ++t) {
        b.begin(t);
        for (auto& op : prog[t]) op.write ? b.write(t, op.addr, op.value) : b.read(t, op.addr, op.value);
        b.commit(t);
      }
    } else {
      b.begin(0);
      b.begin(1);
      std::size_t i0 = 0, i1 = 0;
      while (i0 < prog[0].size() || i1 < prog[1].size()) {
        const int t = i1 >= prog[1].size() || (i0 < prog[0].size() && rng() % 2) ? 0 : 1;
        const Op& op = prog[t][t == 0 ? i0++ : i1++];
        op.write ? b.write(t, op.addr, op.value) : b.read(t, op.addr, op.value);
      }
      const int first = static_cast<int>(rng() % 2);
      b.commit(first);
      b.commit(1 - first);
    }
    auto replay = [&](int first) {
      std::map<std::uint32_t, std::uint32_t> mem;
      for (int t : {first, 1 - first}) {
        for (const auto& op : prog[t]) {
          if (op.write) {
            mem[op.addr] = op.value;
          } else if (mem[op.addr] != op.value) {
            return false;
          }
        }
      }
      return true;
    };
    const bool expected = sequential ? replay(0) : (replay(0) || replay(1));
    const bool got = check_serializable(b.events).ok;
    ASSERT_EQ(got, expected) << "trial " << trial << "\n" << to_ndjson(b.events);
    (got ? accepted : rejected)++;
  }
  EXPECT_GT(accepted, 100);
  EXPECT_GT(rejected, 100);
}

TEST(SerialStm, LogsAreSerializableAndOpaque) {
  for (int seed = 0; seed < 10; ++seed) {
    Dpu dpu;
    StmConfig cfg;
    cfg.tasklets = 3;
    cfg.heap_bytes = 4096;
    cfg.readset_capacity = cfg.writeset_capacity = 32;
    Stm stm(dpu, cfg, make_serial_cc());
    const auto base = stm.heap_alloc(32);
    HistoryLog log;
    stm.set_recorder(&log);
    dpu.memory().set_interleave(3);
    run_tasklets(3, [&](int id) {
      std::mt19937 rng(seed * 7 + id);
      for (int n = 0; n < 10; ++n) {
        stm.tx(id).run([&](Transaction& t) {
          for (int j = 0; j < 3; ++j) {
            const auto a = base + 4 * (rng() % 8);
            if (rng() % 2) {
              t.store(a, t.load(a) + 1);
            } else {
              t.load(a);
            }
          }
        });
      }
    });
    const auto ev = log.events();
    EXPECT_TRUE(validate_history(ev).empty());
    const auto r = check_serializable(ev);
    EXPECT_TRUE(r.ok) << "seed " << seed;
    EXPECT_EQ(r.order.size(), 30u);
  }
}

TEST(SerialStm, UserAbortIsUndone) {
  Dpu dpu;
  StmConfig cfg;
  cfg.heap_bytes = 4096;
  Stm stm(dpu, cfg, make_serial_cc());
  const auto a = stm.heap_alloc(4);
  stm.host_store(a, 5);
  int tries = 0;
  stm.tx(0).run([&](Transaction& t) {
    t.store(a, 9);
    if (tries++ == 0) t.abort();
  });
  EXPECT_EQ(stm.host_load(a), 9u);
  EXPECT_EQ(stm.tx(0).stats().aborted, 1u);
}

namespace {

bench::ArrayBenchConfig tiny_array() {
  bench::ArrayBenchConfig c;
  c.n = 40;
  c.y = 20;
  c.k = 20;
  c.phase1_reads = 4;
  c.phase2_ops = 4;
  c.txns_per_tasklet = 200;
  return c;
}

}  // namespace

TEST(DoomedSnapshot, SerialRunHasNoViolations) {
  bench::ArrayBench w(tiny_array());
  HistoryLog log;
  bench::RunOptions opt;
  opt.stm.tasklets = 4;
  opt.serial = true;
  opt.interleave = 4;
  opt.monitor_snapshots = true;
  opt.recorder = &log;
  const auto r = bench::run_workload(w, opt);
  EXPECT_TRUE(r.problems.empty());
  EXPECT_EQ(r.snapshot_violations, 0u);
  EXPECT_EQ(r.snapshots_checked, 800u);
  EXPECT_TRUE(doomed_snapshot_check(*w.snapshot_invariant(), log.events()).empty());
}

TEST(DoomedSnapshot, OfflineAndStreamingAgreeOnMutant) {
  std::uint64_t total = 0;
  for (int attempt = 0; attempt < 10 && total == 0; ++attempt) {
    bench::ArrayBench w(tiny_array());
    HistoryLog log;
    bench::RunOptions opt;
    opt.stm.tasklets = 4;
    opt.stm.variant = Variant::kNorec;
    opt.stm.mutation = Mutation::kNorecNoRevalidation;
    opt.stm.seed = static_cast<std::uint64_t>(attempt);
    opt.interleave = 2;
    opt.monitor_snapshots = true;
    opt.recorder = &log;
    const auto r = bench::run_workload(w, opt);
    const auto offline = doomed_snapshot_check(*w.snapshot_invariant(), log.events());
    EXPECT_EQ(offline.size(), r.snapshot_violations);
    total += offline.size();
  }
  EXPECT_GT(total, 0u);
}

TEST(DoomedSnapshot, UnterminatedAttemptCountsAsAborted) {
  LogBuilder b;
  b.begin(0);
  b.read(0, 0, 1);
  const SnapshotInvariant never = [](std::span<const ReadObservation> reads) { return reads.empty(); };
  const auto v = doomed_snapshot_check(never, b.events);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_FALSE(v[0].committed);
  EXPECT_EQ(v[0].reads, 1u);
}
