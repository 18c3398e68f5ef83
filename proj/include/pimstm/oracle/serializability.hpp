#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pimstm/oracle/history.hpp"

namespace pimstm {

inline constexpr std::size_t kMaxCheckedTransactions = 30;
inline constexpr std::size_t kMaxCheckedAddresses = 8;

struct TxId {
  int tasklet = 0;
  std::uint64_t attempt = 0;
  friend auto operator<=>(const TxId&, const TxId&) = default;
};

struct TxOp {
  bool is_write = false;
  std::uint32_t addr = 0;
  std::uint32_t value = 0;
};

// One committed attempt extracted from a history.
struct CommittedTx {
  TxId id;
  std::uint64_t begin_seq = 0;
  std::uint64_t commit_seq = 0;
  std::vector<TxOp> ops;
};

// Reads that cannot be explained: `reader` saw `observed` at `addr` while the
// deepest serial prefix the search reached holds `expected`, last written by
// `writer` (nullopt means the initial value).
struct SerializationConflict {
  TxId reader;
  std::optional<TxId> writer;
  std::uint32_t addr = 0;
  std::uint32_t observed = 0;
  std::uint32_t expected = 0;
};

struct SerializabilityResult {
  bool ok = false;
  std::vector<TxId> order;
  std::optional<SerializationConflict> conflict;
  std::uint64_t nodes_explored = 0;
};

std::vector<CommittedTx> committed_transactions(const std::vector<HistoryEvent>& events);

// Searches serial orders of the committed attempts, constrained by real-time
// order, for one whose replay from `initial` reproduces every read. Addresses
// missing from `initial` start at 0. Throws kSearchSpaceExceeded when the log
// has more than 30 committed attempts or touches more than 8 addresses.
SerializabilityResult check_serializable(const std::vector<HistoryEvent>& events,
                                         const std::map<std::uint32_t, std::uint32_t>& initial = {});

std::string describe(const SerializationConflict& c);

}  // namespace pimstm
