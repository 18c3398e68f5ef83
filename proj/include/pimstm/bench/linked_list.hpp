#pragma once

#include <atomic>
#include <vector>

#include "pimstm/bench/workload.hpp"

namespace pimstm::bench {

struct LinkedListConfig {
  std::uint32_t initial_size = 10;
  // Keys are drawn from [1, key_range].
  std::uint32_t key_range = 20;
  std::uint32_t ops_per_tasklet = 100;
  double contains_fraction = 0.9;

  static LinkedListConfig low_contention();
  static LinkedListConfig high_contention();
};

// Sorted singly-linked list in the transactional heap. A node is two words,
// {key, next}; head and tail sentinels hold keys 0 and UINT32_MAX.
class LinkedList final : public Workload {
 public:
  explicit LinkedList(LinkedListConfig cfg);

  std::string name() const override;
  StmConfig size(StmConfig cfg) const override;
  void setup(Stm& stm) override;
  void tasklet_main(Transaction& tx, int round) override;
  std::vector<std::string> verify(Stm& stm) override;

  // Single operations, each one transaction. `node` is a free node for add.
  bool contains(Transaction& tx, std::uint32_t key);
  bool add(Transaction& tx, std::uint32_t key, std::uint32_t node);
  bool remove(Transaction& tx, std::uint32_t key);

  // Host-side allocation of a node for add().
  std::uint32_t alloc_node(Stm& stm);
  // Keys in list order, read without transactions.
  std::vector<std::uint32_t> contents(Stm& stm) const;
  // Final contents captured by verify().
  const std::vector<std::uint32_t>& final_contents() const { return final_; }
  std::int64_t adds() const { return adds_.load(); }
  std::int64_t removes() const { return removes_.load(); }

 private:
  struct Position {
    std::uint32_t prev;
    std::uint32_t curr;
    std::uint32_t curr_key;
  };
  Position locate(Transaction& tx, std::uint32_t key) const;

  LinkedListConfig cfg_;
  std::uint64_t seed_ = 0;
  std::uint32_t head_ = 0;
  std::uint32_t tail_ = 0;
  // Per-tasklet node pools, ops_per_tasklet nodes each.
  std::vector<std::uint32_t> pools_;
  std::uint32_t initial_count_ = 0;
  std::atomic<std::int64_t> adds_{0};
  std::atomic<std::int64_t> removes_{0};
  std::vector<std::uint32_t> final_;
};

}  // namespace pimstm::bench
