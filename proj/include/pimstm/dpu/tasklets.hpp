#pragma once

#include <exception>
#include <latch>
#include <optional>
#include <string>
#include <thread>
#include <type_traits>
#include <utility>
#include <vector>

#include "pimstm/dpu/memory.hpp"
#include "pimstm/error.hpp"

namespace pimstm {

class TaskletFailure : public Error {
 public:
  TaskletFailure(int tasklet, std::exception_ptr cause, const std::string& what)
      : Error(ErrorCode::kTaskletFailed, "tasklet " + std::to_string(tasklet) + ": " + what),
        tasklet_(tasklet),
        cause_(std::move(cause)) {}

  int tasklet() const noexcept { return tasklet_; }
  const std::exception_ptr& cause() const noexcept { return cause_; }

 private:
  int tasklet_;
  std::exception_ptr cause_;
};

// SPMD launch of n tasklets on host threads. Each tasklet receives its id;
// all of them start together once every thread exists.
class TaskletGroup {
 public:
  explicit TaskletGroup(int n) : n_(n) {
    if (n < 1 || n > kMaxTasklets) {
      throw Error(ErrorCode::kInvalidTaskletCount,
                  "tasklet count " + std::to_string(n) + " outside 1.." + std::to_string(kMaxTasklets));
    }
  }

  int size() const { return n_; }

  // Runs entry(id) on every tasklet and returns the results in tasklet order.
  // A failing tasklet is reported as TaskletFailure (lowest failing id).
  template <class Entry>
  auto run(Entry&& entry) const {
    using R = std::invoke_result_t<Entry&, int>;
    constexpr bool kVoid = std::is_void_v<R>;
    using Slot = std::conditional_t<kVoid, bool, std::optional<R>>;

    std::vector<Slot> results(n_);
    std::vector<std::exception_ptr> errors(n_);
    std::latch start(n_);
    {
      std::vector<std::jthread> threads;
      threads.reserve(n_);
      for (int id = 0; id < n_; ++id) {
        threads.emplace_back([&, id] {
          start.arrive_and_wait();
          try {
            if constexpr (kVoid) {
              entry(id);
              results[id] = true;
            } else {
              results[id].emplace(entry(id));
            }
          } catch (...) {
            errors[id] = std::current_exception();
          }
        });
      }
    }
    for (int id = 0; id < n_; ++id) {
      if (errors[id]) {
        std::string what = "unknown failure";
        try {
          std::rethrow_exception(errors[id]);
        } catch (const std::exception& e) {
          what = e.what();
        } catch (...) {
        }
        throw TaskletFailure(id, errors[id], what);
      }
    }
    if constexpr (kVoid) {
      return;
    } else {
      std::vector<R> out;
      out.reserve(n_);
      for (auto& r : results) out.push_back(std::move(*r));
      return out;
    }
  }

 private:
  int n_;
};

template <class Entry>
auto run_tasklets(int n, Entry&& entry) {
  return TaskletGroup(n).run(std::forward<Entry>(entry));
}

}  // namespace pimstm
