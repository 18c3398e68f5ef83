#pragma once

#include <array>
#include <memory>
#include <mutex>
#include <utility>
#include <vector>

#include "pimstm/stm/stm.hpp"

namespace pimstm {

// Golden reference: one global mutex held from begin to commit, in-place
// reads and writes. Never aborts on its own; an explicit user abort is undone
// from a host-side log.
class SerialCc final : public ConcurrencyControl {
 public:
  std::string name() const override { return "serial"; }
  SetShape set_shape() const override { return {1, false, false}; }
  std::uint32_t shared_footprint(const StmConfig&) const override { return 0; }
  void install(Dpu&, const StmConfig&) override {}

  void begin(Transaction& tx) override;
  std::optional<std::uint32_t> read(Transaction& tx, std::uint32_t addr) override;
  bool write(Transaction& tx, std::uint32_t addr, std::uint32_t value) override;
  bool commit(Transaction& tx) override;
  void rollback(Transaction& tx) override;
  std::vector<std::string> quiescent_issues(Dpu&) const override { return {}; }

 private:
  std::mutex mutex_;
  std::array<std::vector<std::pair<std::uint32_t, std::uint32_t>>, kMaxTasklets> undo_;
};

std::unique_ptr<ConcurrencyControl> make_serial_cc();

}  // namespace pimstm
