#pragma once

#include <array>
#include <cstdint>
#include <map>

#include "pimstm/dpu/memory.hpp"

namespace pimstm {

// Time breakdown categories. kWasted is the whole duration of aborted
// attempts; kOther is committed-attempt time outside instrumented STM calls.
enum class Breakdown { kStart, kRead, kWrite, kValidation, kCommit, kWasted, kOther };
inline constexpr int kBreakdownCount = 7;

const char* to_string(Breakdown b);

struct Stats {
  std::uint64_t committed = 0;
  std::uint64_t aborted = 0;
  std::uint64_t tx_loads = 0;
  std::uint64_t tx_stores = 0;
  std::array<std::uint64_t, kBreakdownCount> breakdown_ns{};
  // retries before commit -> number of transactions
  std::map<std::uint64_t, std::uint64_t> retries_histogram;
  AccessTotals accesses;
  double elapsed_seconds = 0.0;

  std::uint64_t attempts() const { return committed + aborted; }
  double throughput() const { return elapsed_seconds > 0 ? static_cast<double>(committed) / elapsed_seconds : 0.0; }
  double abort_rate() const {
    return attempts() == 0 ? 0.0 : static_cast<double>(aborted) / static_cast<double>(attempts());
  }
  std::uint64_t breakdown_total() const;
  // Fractions of breakdown_total(); all zero when nothing was timed.
  std::array<double, kBreakdownCount> breakdown_fractions() const;

  Stats& operator+=(const Stats& rhs);
};

}  // namespace pimstm
