#include "pimstm/bench/linked_list.hpp"

#include <limits>
#include <random>
#include <set>

namespace pimstm::bench {

namespace {

constexpr std::uint32_t kTailKey = std::numeric_limits<std::uint32_t>::max();
constexpr std::uint32_t kNodeBytes = 8;

std::uint32_t key_of(std::uint32_t node) { return node; }
std::uint32_t next_of(std::uint32_t node) { return node + 4; }

}  // namespace

LinkedListConfig LinkedListConfig::low_contention() { return LinkedListConfig{}; }

LinkedListConfig LinkedListConfig::high_contention() {
  LinkedListConfig c;
  c.contains_fraction = 0.5;
  return c;
}

LinkedList::LinkedList(LinkedListConfig cfg) : cfg_(cfg) {
  if (cfg_.key_range < cfg_.initial_size || cfg_.key_range == 0 || cfg_.key_range == kTailKey) {
    throw Error(ErrorCode::kConfigInvalid, "linkedlist: key_range must hold initial_size distinct keys");
  }
  if (cfg_.contains_fraction < 0.0 || cfg_.contains_fraction > 1.0) {
    throw Error(ErrorCode::kConfigInvalid, "linkedlist: contains_fraction outside [0,1]");
  }
}

std::string LinkedList::name() const { return "linkedlist"; }

StmConfig LinkedList::size(StmConfig cfg) const {
  // A traversal touches at most every key plus the sentinels, two loads each.
  cfg.readset_capacity = 2 * (cfg_.key_range + cfg_.initial_size + 4) + 8;
  cfg.writeset_capacity = 8;
  const std::uint32_t nodes = 2 + cfg_.initial_size + cfg_.ops_per_tasklet * static_cast<std::uint32_t>(cfg.tasklets);
  cfg.heap_bytes = ((nodes + 16) * kNodeBytes + 4095) & ~4095u;
  return cfg;
}

std::uint32_t LinkedList::alloc_node(Stm& stm) { return stm.heap_alloc(kNodeBytes); }

void LinkedList::setup(Stm& stm) {
  seed_ = stm.config().seed;
  head_ = alloc_node(stm);
  tail_ = alloc_node(stm);
  stm.host_store(key_of(head_), 0);
  stm.host_store(key_of(tail_), kTailKey);
  stm.host_store(next_of(tail_), 0);

  std::mt19937_64 rng(seed_);
  std::uniform_int_distribution<std::uint32_t> kd(1, cfg_.key_range);
  std::set<std::uint32_t> keys;
  while (keys.size() < cfg_.initial_size) keys.insert(kd(rng));
  std::uint32_t prev = head_;
  for (std::uint32_t k : keys) {
    const std::uint32_t n = alloc_node(stm);
    stm.host_store(key_of(n), k);
    stm.host_store(next_of(prev), n);
    prev = n;
  }
  stm.host_store(next_of(prev), tail_);
  initial_count_ = static_cast<std::uint32_t>(keys.size());

  pools_.assign(static_cast<std::size_t>(stm.tasklets()) * cfg_.ops_per_tasklet, 0);
  for (auto& p : pools_) p = alloc_node(stm);
  adds_ = 0;
  removes_ = 0;
}

LinkedList::Position LinkedList::locate(Transaction& tx, std::uint32_t key) const {
  std::uint32_t prev = head_;
  std::uint32_t curr = tx.load(next_of(prev));
  std::uint32_t curr_key = tx.load(key_of(curr));
  while (curr_key < key) {
    prev = curr;
    curr = tx.load(next_of(curr));
    curr_key = tx.load(key_of(curr));
  }
  return {prev, curr, curr_key};
}

bool LinkedList::contains(Transaction& tx, std::uint32_t key) {
  return tx.run([&](Transaction& x) { return locate(x, key).curr_key == key; });
}

bool LinkedList::add(Transaction& tx, std::uint32_t key, std::uint32_t node) {
  const bool added = tx.run([&](Transaction& x) {
    const Position p = locate(x, key);
    if (p.curr_key == key) return false;
    x.store(key_of(node), key);
    x.store(next_of(node), p.curr);
    x.store(next_of(p.prev), node);
    return true;
  });
  if (added) ++adds_;
  return added;
}

bool LinkedList::remove(Transaction& tx, std::uint32_t key) {
  const bool removed = tx.run([&](Transaction& x) {
    const Position p = locate(x, key);
    if (p.curr_key != key) return false;
    x.store(next_of(p.prev), x.load(next_of(p.curr)));
    return true;
  });
  if (removed) ++removes_;
  return removed;
}

void LinkedList::tasklet_main(Transaction& tx, int) {
  auto rng = tasklet_rng(seed_, tx.tasklet());
  std::uniform_int_distribution<std::uint32_t> kd(1, cfg_.key_range);
  std::bernoulli_distribution is_contains(cfg_.contains_fraction);
  const std::uint32_t* pool = pools_.data() + static_cast<std::size_t>(tx.tasklet()) * cfg_.ops_per_tasklet;
  std::uint32_t used = 0;
  bool next_is_add = true;
  for (std::uint32_t i = 0; i < cfg_.ops_per_tasklet; ++i) {
    const std::uint32_t key = kd(rng);
    if (is_contains(rng)) {
      contains(tx, key);
    } else if (next_is_add) {
      next_is_add = false;
      if (add(tx, key, pool[used])) ++used;
    } else {
      next_is_add = true;
      remove(tx, key);
    }
  }
}

std::vector<std::uint32_t> LinkedList::contents(Stm& stm) const {
  std::vector<std::uint32_t> keys;
  std::uint32_t n = stm.host_load(next_of(head_));
  const std::size_t limit = pools_.size() + initial_count_ + 2;
  while (n != tail_ && keys.size() <= limit) {
    keys.push_back(stm.host_load(key_of(n)));
    n = stm.host_load(next_of(n));
  }
  return keys;
}

std::vector<std::string> LinkedList::verify(Stm& stm) {
  std::vector<std::string> problems;
  final_ = contents(stm);
  if (final_.size() > pools_.size() + initial_count_) problems.push_back("list does not reach the tail");
  for (std::size_t i = 0; i < final_.size(); ++i) {
    if (final_[i] == 0 || final_[i] > cfg_.key_range) problems.push_back("key out of range");
    if (i > 0 && final_[i - 1] >= final_[i]) {
      problems.push_back("list not strictly sorted at position " + std::to_string(i));
    }
  }
  const std::int64_t expected = static_cast<std::int64_t>(initial_count_) + adds_.load() - removes_.load();
  if (static_cast<std::int64_t>(final_.size()) != expected) {
    problems.push_back("size " + std::to_string(final_.size()) + " != expected " + std::to_string(expected));
  }
  return problems;
}

}  // namespace pimstm::bench
