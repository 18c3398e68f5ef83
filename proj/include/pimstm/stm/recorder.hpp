#pragma once

#include <cstdint>

namespace pimstm {

enum class EventKind : std::uint8_t { kBegin, kRead, kWrite, kCommit, kAbort };

const char* to_string(EventKind kind);

// Receives transactional events as they happen. Called concurrently from
// every tasklet; each tasklet's own calls are sequential.
class HistoryRecorder {
 public:
  virtual ~HistoryRecorder() = default;
  virtual void record(int tasklet, std::uint64_t attempt, EventKind kind, std::uint32_t addr,
                      std::uint32_t value) = 0;
};

}  // namespace pimstm
