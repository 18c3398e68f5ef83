#pragma once

#include <random>
#include <vector>

#include "pimstm/bench/workload.hpp"

namespace pimstm::bench {

struct ArrayBenchConfig {
  std::uint32_t n = 12'500;
  std::uint32_t y = 2'500;
  std::uint32_t k = 10'000;
  std::uint32_t phase1_reads = 100;
  std::uint32_t phase2_ops = 20;
  std::uint32_t txns_per_tasklet = 1'000;
  std::int32_t initial_value = 1'000'000;
  std::int32_t max_delta = 100;

  static ArrayBenchConfig workload_a();
  static ArrayBenchConfig workload_b();
};

void validate(const ArrayBenchConfig& cfg);

// Region Y = [0, y) is only read. Region K = [y, n) holds adjacent pairs
// (y+2p, y+2p+1); a transaction moves delta from one member of each chosen
// pair to the other, so every pair keeps summing to 2 * initial_value.
class ArrayBench final : public Workload {
 public:
  explicit ArrayBench(ArrayBenchConfig cfg);

  std::string name() const override;
  StmConfig size(StmConfig cfg) const override;
  void setup(Stm& stm) override;
  void tasklet_main(Transaction& tx, int round) override;
  std::vector<std::string> verify(Stm& stm) override;
  std::optional<SnapshotInvariant> snapshot_invariant() const override;

  const ArrayBenchConfig& config() const { return cfg_; }
  std::uint32_t base() const { return base_; }
  std::int64_t initial_sum() const;
  std::int64_t final_sum() const { return final_sum_; }

 private:
  struct Txn {
    std::vector<std::uint32_t> reads;
    std::vector<std::uint32_t> pairs;
    std::vector<std::int32_t> deltas;
  };
  Txn draw(std::mt19937_64& rng) const;
  void execute(Transaction& tx, const Txn& t) const;

  ArrayBenchConfig cfg_;
  std::uint32_t base_ = 0;
  std::uint64_t seed_ = 0;
  std::int64_t final_sum_ = 0;
};

}  // namespace pimstm::bench
