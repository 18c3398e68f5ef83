#include "pimstm/bench/arraybench.hpp"

#include <algorithm>
#include <bit>
#include <unordered_set>

namespace pimstm::bench {

ArrayBenchConfig ArrayBenchConfig::workload_a() { return ArrayBenchConfig{}; }

ArrayBenchConfig ArrayBenchConfig::workload_b() {
  ArrayBenchConfig c;
  c.y = c.n - 10;
  c.k = 10;
  c.phase1_reads = 0;
  c.phase2_ops = 4;
  return c;
}

void validate(const ArrayBenchConfig& c) {
  auto bad = [](const std::string& m) { throw Error(ErrorCode::kConfigInvalid, "arraybench: " + m); };
  if (c.y + c.k != c.n) bad("y + k must equal n");
  if (c.k % 2 != 0) bad("k must be even");
  if (c.phase2_ops % 2 != 0) bad("phase2_ops must be even");
  if (c.phase2_ops / 2 > c.k / 2) bad("phase2_ops exceeds region K");
  if (c.phase1_reads > 0 && c.y == 0) bad("phase 1 needs a non-empty region Y");
  if (c.max_delta < 1 || c.initial_value < 1) bad("initial_value and max_delta must be positive");
}

ArrayBench::ArrayBench(ArrayBenchConfig cfg) : cfg_(cfg) { validate(cfg_); }

std::string ArrayBench::name() const { return "arraybench"; }

StmConfig ArrayBench::size(StmConfig cfg) const {
  cfg.readset_capacity = cfg_.phase1_reads + cfg_.phase2_ops + 8;
  cfg.writeset_capacity = cfg_.phase2_ops + 8;
  cfg.heap_bytes = (cfg_.n * 4 + 4095) & ~4095u;
  // One orec per array word; such a table does not fit WRAM, so it stays in
  // MRAM whatever the placement of the other metadata.
  cfg.lock_table_entries = std::bit_ceil(cfg_.n);
  cfg.lock_table_tier = Tier::kMram;
  return cfg;
}

void ArrayBench::setup(Stm& stm) {
  seed_ = stm.config().seed;
  base_ = stm.heap_alloc(cfg_.n * 4);
  for (std::uint32_t i = 0; i < cfg_.n; ++i) {
    stm.host_store(base_ + 4 * i, static_cast<std::uint32_t>(cfg_.initial_value));
  }
}

ArrayBench::Txn ArrayBench::draw(std::mt19937_64& rng) const {
  Txn t;
  if (cfg_.phase1_reads > 0) {
    std::uniform_int_distribution<std::uint32_t> yi(0, cfg_.y - 1);
    for (std::uint32_t i = 0; i < cfg_.phase1_reads; ++i) t.reads.push_back(yi(rng));
  }
  std::uniform_int_distribution<std::uint32_t> pi(0, cfg_.k / 2 - 1);
  std::uniform_int_distribution<std::int32_t> di(-cfg_.max_delta, cfg_.max_delta);
  std::unordered_set<std::uint32_t> seen;
  while (t.pairs.size() < cfg_.phase2_ops / 2) {
    const std::uint32_t p = pi(rng);
    if (!seen.insert(p).second) continue;
    t.pairs.push_back(p);
    t.deltas.push_back(di(rng));
  }
  return t;
}

void ArrayBench::execute(Transaction& tx, const Txn& t) const {
  for (std::uint32_t i : t.reads) tx.load(base_ + 4 * i);
  const std::size_t m = t.pairs.size();
  std::vector<std::uint32_t> first(m), second(m);
  auto addr = [&](std::uint32_t p, std::uint32_t member) { return base_ + 4 * (cfg_.y + 2 * p + member); };
  for (std::size_t i = 0; i < m; ++i) first[i] = tx.load(addr(t.pairs[i], 0));
  for (std::size_t i = 0; i < m; ++i) second[i] = tx.load(addr(t.pairs[i], 1));
  for (std::size_t i = 0; i < m; ++i) {
    const auto d = static_cast<std::uint32_t>(t.deltas[i]);
    tx.store(addr(t.pairs[i], 0), first[i] + d);
    tx.store(addr(t.pairs[i], 1), second[i] - d);
  }
}

void ArrayBench::tasklet_main(Transaction& tx, int) {
  auto rng = tasklet_rng(seed_, tx.tasklet());
  for (std::uint32_t n = 0; n < cfg_.txns_per_tasklet; ++n) {
    const Txn t = draw(rng);
    tx.run([&](Transaction& x) { execute(x, t); });
  }
}

std::int64_t ArrayBench::initial_sum() const {
  return static_cast<std::int64_t>(cfg_.n) * cfg_.initial_value;
}

std::vector<std::string> ArrayBench::verify(Stm& stm) {
  std::vector<std::string> problems;
  final_sum_ = 0;
  for (std::uint32_t i = 0; i < cfg_.n; ++i) {
    const auto v = static_cast<std::int32_t>(stm.host_load(base_ + 4 * i));
    final_sum_ += v;
    if (i < cfg_.y && v != cfg_.initial_value) {
      problems.push_back("read-only entry " + std::to_string(i) + " changed");
    }
  }
  for (std::uint32_t p = 0; p < cfg_.k / 2; ++p) {
    const auto a = static_cast<std::int32_t>(stm.host_load(base_ + 4 * (cfg_.y + 2 * p)));
    const auto b = static_cast<std::int32_t>(stm.host_load(base_ + 4 * (cfg_.y + 2 * p + 1)));
    if (static_cast<std::int64_t>(a) + b != 2 * static_cast<std::int64_t>(cfg_.initial_value)) {
      problems.push_back("pair " + std::to_string(p) + " not conserved");
    }
  }
  if (final_sum_ != initial_sum()) {
    problems.push_back("array sum " + std::to_string(final_sum_) + " != " + std::to_string(initial_sum()));
  }
  return problems;
}

std::optional<SnapshotInvariant> ArrayBench::snapshot_invariant() const {
  const std::uint32_t base = base_;
  const ArrayBenchConfig c = cfg_;
  return SnapshotInvariant([base, c](std::span<const ReadObservation> reads) {
    // Index of a read pair member -> value seen; a pair seen twice must sum.
    std::vector<std::pair<std::uint32_t, std::int32_t>> seen;
    for (const auto& r : reads) {
      if (r.addr < base || r.addr >= base + 4 * c.n) return false;
      const std::uint32_t i = (r.addr - base) / 4;
      const auto v = static_cast<std::int32_t>(r.value);
      if (i < c.y) {
        if (v != c.initial_value) return false;
        continue;
      }
      seen.emplace_back(i, v);
    }
    std::sort(seen.begin(), seen.end());
    for (std::size_t j = 0; j + 1 < seen.size(); ++j) {
      const auto [i, v] = seen[j];
      const auto [i2, v2] = seen[j + 1];
      if (i == i2 && v != v2) return false;
      if (((i - c.y) % 2 == 0) && i2 == i + 1 &&
          static_cast<std::int64_t>(v) + v2 != 2 * static_cast<std::int64_t>(c.initial_value)) {
        return false;
      }
    }
    return true;
  });
}

}  // namespace pimstm::bench
