#pragma once

#include <array>
#include <atomic>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "pimstm/dpu/memory.hpp"
#include "pimstm/stm/recorder.hpp"

namespace pimstm {

struct HistoryEvent {
  std::uint64_t seq = 0;
  int tasklet = 0;
  std::uint64_t attempt = 0;
  EventKind kind = EventKind::kBegin;
  std::uint32_t addr = 0;
  std::uint32_t value = 0;

  friend bool operator==(const HistoryEvent&, const HistoryEvent&) = default;
};

// Totally ordered event log. Each event draws its seq from one atomic
// counter; per-tasklet buffers keep recording free of locks.
class HistoryLog final : public HistoryRecorder {
 public:
  HistoryLog() = default;

  void record(int tasklet, std::uint64_t attempt, EventKind kind, std::uint32_t addr,
              std::uint32_t value) override;

  // All events in seq order. Not safe while tasklets are still recording.
  std::vector<HistoryEvent> events() const;
  std::size_t size() const;

  std::string to_ndjson() const;
  // Throws kParseError on malformed input.
  static std::vector<HistoryEvent> parse_ndjson(std::string_view text);

 private:
  std::atomic<std::uint64_t> next_seq_{0};
  std::array<std::vector<HistoryEvent>, kHostTasklet + 1> per_tasklet_;
};

std::string to_ndjson(const std::vector<HistoryEvent>& events);

// Structural checks: seq strictly increasing, each attempt starts with begin
// and has exactly one terminal event after it. One message per problem.
std::vector<std::string> validate_history(const std::vector<HistoryEvent>& events);

// Forwards every event to several recorders.
class RecorderFanout final : public HistoryRecorder {
 public:
  explicit RecorderFanout(std::vector<HistoryRecorder*> sinks) : sinks_(std::move(sinks)) {}
  void record(int tasklet, std::uint64_t attempt, EventKind kind, std::uint32_t addr,
              std::uint32_t value) override {
    for (auto* s : sinks_) s->record(tasklet, attempt, kind, addr, value);
  }

 private:
  std::vector<HistoryRecorder*> sinks_;
};

}  // namespace pimstm
