#include "pimstm/oracle/history.hpp"

#include <algorithm>
#include <map>
#include <sstream>
#include <utility>

#include "json.hpp"

#include "pimstm/error.hpp"

namespace pimstm {

void HistoryLog::record(int tasklet, std::uint64_t attempt, EventKind kind, std::uint32_t addr,
                        std::uint32_t value) {
  const std::uint64_t seq = next_seq_.fetch_add(1, std::memory_order_acq_rel);
  per_tasklet_[tasklet].push_back(HistoryEvent{seq, tasklet, attempt, kind, addr, value});
}

std::vector<HistoryEvent> HistoryLog::events() const {
  std::vector<HistoryEvent> out;
  out.reserve(size());
  for (const auto& v : per_tasklet_) out.insert(out.end(), v.begin(), v.end());
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.seq < b.seq; });
  return out;
}

std::size_t HistoryLog::size() const {
  std::size_t n = 0;
  for (const auto& v : per_tasklet_) n += v.size();
  return n;
}

namespace {

EventKind parse_kind(const std::string& s) {
  for (EventKind k : {EventKind::kBegin, EventKind::kRead, EventKind::kWrite, EventKind::kCommit, EventKind::kAbort}) {
    if (s == to_string(k)) return k;
  }
  throw Error(ErrorCode::kParseError, "unknown event kind '" + s + "'");
}

}  // namespace

std::string to_ndjson(const std::vector<HistoryEvent>& events) {
  std::string out;
  for (const auto& e : events) {
    nlohmann::json j = {{"seq", e.seq}, {"tasklet", e.tasklet}, {"attempt", e.attempt}, {"kind", to_string(e.kind)}};
    if (e.kind == EventKind::kRead || e.kind == EventKind::kWrite) {
      j["addr"] = e.addr;
      j["value"] = e.value;
    }
    out += j.dump();
    out += '\n';
  }
  return out;
}

std::string HistoryLog::to_ndjson() const { return pimstm::to_ndjson(events()); }

std::vector<HistoryEvent> HistoryLog::parse_ndjson(std::string_view text) {
  std::vector<HistoryEvent> out;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      HistoryEvent e;
      e.seq = j.at("seq").get<std::uint64_t>();
      e.tasklet = j.at("tasklet").get<int>();
      e.attempt = j.at("attempt").get<std::uint64_t>();
      e.kind = parse_kind(j.at("kind").get<std::string>());
      e.addr = j.value("addr", 0u);
      e.value = j.value("value", 0u);
      out.push_back(e);
    } catch (const nlohmann::json::exception& ex) {
      throw Error(ErrorCode::kParseError, "line " + std::to_string(lineno) + ": " + ex.what());
    }
  }
  return out;
}

std::vector<std::string> validate_history(const std::vector<HistoryEvent>& events) {
  std::vector<std::string> problems;
  struct State {
    bool begun = false;
    bool finished = false;
  };
  std::map<std::pair<int, std::uint64_t>, State> attempts;
  for (std::size_t i = 0; i < events.size(); ++i) {
    const auto& e = events[i];
    if (i > 0 && e.seq <= events[i - 1].seq) {
      problems.push_back("seq not strictly increasing at " + std::to_string(e.seq));
    }
    const std::string who = "tasklet " + std::to_string(e.tasklet) + " attempt " + std::to_string(e.attempt);
    auto& st = attempts[{e.tasklet, e.attempt}];
    if (e.kind == EventKind::kBegin) {
      if (st.begun) problems.push_back(who + ": second begin");
      st.begun = true;
      continue;
    }
    if (!st.begun) problems.push_back(who + ": event before begin");
    if (st.finished) problems.push_back(who + ": event after terminal event");
    if (e.kind == EventKind::kCommit || e.kind == EventKind::kAbort) st.finished = true;
  }
  return problems;
}

}  // namespace pimstm
