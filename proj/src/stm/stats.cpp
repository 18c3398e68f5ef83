#include "pimstm/stm/stats.hpp"

namespace pimstm {

const char* to_string(Breakdown b) {
  switch (b) {
    case Breakdown::kStart: return "start";
    case Breakdown::kRead: return "read";
    case Breakdown::kWrite: return "write";
    case Breakdown::kValidation: return "validate";
    case Breakdown::kCommit: return "commit";
    case Breakdown::kWasted: return "wasted";
    case Breakdown::kOther: return "other";
  }
  return "?";
}

std::uint64_t Stats::breakdown_total() const {
  std::uint64_t sum = 0;
  for (auto ns : breakdown_ns) sum += ns;
  return sum;
}

std::array<double, kBreakdownCount> Stats::breakdown_fractions() const {
  std::array<double, kBreakdownCount> out{};
  const auto total = breakdown_total();
  if (total == 0) return out;
  for (int i = 0; i < kBreakdownCount; ++i) {
    out[i] = static_cast<double>(breakdown_ns[i]) / static_cast<double>(total);
  }
  return out;
}

Stats& Stats::operator+=(const Stats& rhs) {
  committed += rhs.committed;
  aborted += rhs.aborted;
  tx_loads += rhs.tx_loads;
  tx_stores += rhs.tx_stores;
  for (int i = 0; i < kBreakdownCount; ++i) breakdown_ns[i] += rhs.breakdown_ns[i];
  for (const auto& [retries, count] : rhs.retries_histogram) retries_histogram[retries] += count;
  accesses += rhs.accesses;
  elapsed_seconds += rhs.elapsed_seconds;
  return *this;
}

}  // namespace pimstm
