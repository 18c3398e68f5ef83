#include "pimstm/oracle/serializability.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <unordered_set>

#include "pimstm/error.hpp"

namespace pimstm {

std::vector<CommittedTx> committed_transactions(const std::vector<HistoryEvent>& events) {
  std::map<TxId, CommittedTx> open;
  std::vector<CommittedTx> done;
  for (const auto& e : events) {
    const TxId id{e.tasklet, e.attempt};
    switch (e.kind) {
      case EventKind::kBegin:
        open[id] = CommittedTx{id, e.seq, 0, {}};
        break;
      case EventKind::kRead:
      case EventKind::kWrite:
        if (auto it = open.find(id); it != open.end()) {
          it->second.ops.push_back(TxOp{e.kind == EventKind::kWrite, e.addr, e.value});
        }
        break;
      case EventKind::kCommit:
        if (auto it = open.find(id); it != open.end()) {
          it->second.commit_seq = e.seq;
          done.push_back(std::move(it->second));
          open.erase(it);
        }
        break;
      case EventKind::kAbort:
        open.erase(id);
        break;
    }
  }
  return done;
}

namespace {

constexpr std::uint64_t kNodeBudget = 50'000'000;

struct State {
  std::uint32_t mask = 0;
  std::array<std::uint32_t, kMaxCheckedAddresses> mem{};
  friend bool operator==(const State&, const State&) = default;
};

struct StateHash {
  std::size_t operator()(const State& s) const noexcept {
    std::uint64_t h = 0x9e3779b97f4a7c15ull ^ s.mask;
    for (auto v : s.mem) h = (h ^ v) * 0x100000001b3ull;
    return static_cast<std::size_t>(h ^ (h >> 29));
  }
};

// Transactions with addresses already translated to slot indices.
struct Compact {
  std::vector<std::vector<TxOp>> ops;
  std::vector<std::uint32_t> preds;
};

class Search {
 public:
  Search(const Compact& c, const std::vector<CommittedTx>& txs, const std::vector<std::uint32_t>& addrs)
      : c_(c), txs_(txs), addrs_(addrs), full_(txs.size() == 32 ? ~0u : (1u << txs.size()) - 1) {}

  bool run(State s, std::array<int, kMaxCheckedAddresses> writer) {
    if (s.mask == full_) return true;
    if (failed_.contains(s)) return false;
    if (++nodes_ > kNodeBudget) {
      throw Error(ErrorCode::kSearchSpaceExceeded, "serializability search exceeded node budget");
    }
    for (std::size_t i = 0; i < c_.ops.size(); ++i) {
      const std::uint32_t bit = 1u << i;
      if ((s.mask & bit) || (c_.preds[i] & ~s.mask)) continue;
      State next = s;
      auto next_writer = writer;
      if (!apply(i, next, next_writer, std::popcount(s.mask))) continue;
      next.mask |= bit;
      order_.push_back(static_cast<int>(i));
      if (run(next, next_writer)) return true;
      order_.pop_back();
    }
    failed_.insert(s);
    return false;
  }

  const std::vector<int>& order() const { return order_; }
  std::uint64_t nodes() const { return nodes_; }
  const std::optional<SerializationConflict>& deepest() const { return deepest_; }

 private:
  bool apply(std::size_t i, State& s, std::array<int, kMaxCheckedAddresses>& writer, int depth) {
    for (const auto& op : c_.ops[i]) {
      if (op.is_write) {
        s.mem[op.addr] = op.value;
        writer[op.addr] = static_cast<int>(i);
        continue;
      }
      if (s.mem[op.addr] == op.value) continue;
      if (depth >= deepest_depth_) {
        deepest_depth_ = depth;
        SerializationConflict conflict;
        conflict.reader = txs_[i].id;
        if (writer[op.addr] >= 0) conflict.writer = txs_[writer[op.addr]].id;
        conflict.addr = addrs_[op.addr];
        conflict.observed = op.value;
        conflict.expected = s.mem[op.addr];
        deepest_ = conflict;
      }
      return false;
    }
    return true;
  }

  const Compact& c_;
  const std::vector<CommittedTx>& txs_;
  const std::vector<std::uint32_t>& addrs_;
  const std::uint32_t full_;
  std::unordered_set<State, StateHash> failed_;
  std::vector<int> order_;
  std::uint64_t nodes_ = 0;
  int deepest_depth_ = -1;
  std::optional<SerializationConflict> deepest_;
};

}  // namespace

SerializabilityResult check_serializable(const std::vector<HistoryEvent>& events,
                                         const std::map<std::uint32_t, std::uint32_t>& initial) {
  const auto txs = committed_transactions(events);
  if (txs.size() > kMaxCheckedTransactions) {
    throw Error(ErrorCode::kSearchSpaceExceeded,
                std::to_string(txs.size()) + " committed transactions, limit is " +
                    std::to_string(kMaxCheckedTransactions));
  }
  std::vector<std::uint32_t> addrs;
  for (const auto& t : txs) {
    for (const auto& op : t.ops) addrs.push_back(op.addr);
  }
  std::sort(addrs.begin(), addrs.end());
  addrs.erase(std::unique(addrs.begin(), addrs.end()), addrs.end());
  if (addrs.size() > kMaxCheckedAddresses) {
    throw Error(ErrorCode::kSearchSpaceExceeded,
                std::to_string(addrs.size()) + " distinct addresses, limit is " +
                    std::to_string(kMaxCheckedAddresses));
  }
  auto slot = [&](std::uint32_t a) {
    return static_cast<std::uint32_t>(std::lower_bound(addrs.begin(), addrs.end(), a) - addrs.begin());
  };

  Compact c;
  c.ops.resize(txs.size());
  c.preds.assign(txs.size(), 0);
  for (std::size_t i = 0; i < txs.size(); ++i) {
    for (auto op : txs[i].ops) {
      op.addr = slot(op.addr);
      c.ops[i].push_back(op);
    }
    for (std::size_t j = 0; j < txs.size(); ++j) {
      if (j != i && txs[j].commit_seq < txs[i].begin_seq) c.preds[i] |= 1u << j;
    }
  }

  State start;
  for (std::size_t a = 0; a < addrs.size(); ++a) {
    if (auto it = initial.find(addrs[a]); it != initial.end()) start.mem[a] = it->second;
  }
  std::array<int, kMaxCheckedAddresses> writer;
  writer.fill(-1);

  Search search(c, txs, addrs);
  SerializabilityResult result;
  result.ok = search.run(start, writer);
  result.nodes_explored = search.nodes();
  if (result.ok) {
    for (int i : search.order()) result.order.push_back(txs[i].id);
  } else {
    result.conflict = search.deepest();
  }
  return result;
}

std::string describe(const SerializationConflict& c) {
  auto id = [](const TxId& t) {
    return "tasklet " + std::to_string(t.tasklet) + " attempt " + std::to_string(t.attempt);
  };
  std::string s = id(c.reader) + " read " + std::to_string(c.observed) + " at " + std::to_string(c.addr) +
                  ", serial prefix holds " + std::to_string(c.expected);
  s += c.writer ? " written by " + id(*c.writer) : " (initial value)";
  return s;
}

}  // namespace pimstm
