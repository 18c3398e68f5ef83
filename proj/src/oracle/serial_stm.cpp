#include "pimstm/oracle/serial_stm.hpp"

namespace pimstm {

void SerialCc::begin(Transaction& tx) {
  mutex_.lock();
  undo_[tx.tasklet()].clear();
}

std::optional<std::uint32_t> SerialCc::read(Transaction& tx, std::uint32_t addr) { return tx.heap_load(addr); }

bool SerialCc::write(Transaction& tx, std::uint32_t addr, std::uint32_t value) {
  undo_[tx.tasklet()].emplace_back(addr, tx.heap_load(addr));
  tx.heap_store(addr, value);
  return true;
}

bool SerialCc::commit(Transaction&) {
  mutex_.unlock();
  return true;
}

void SerialCc::rollback(Transaction& tx) {
  auto& undo = undo_[tx.tasklet()];
  for (auto it = undo.rbegin(); it != undo.rend(); ++it) tx.heap_store(it->first, it->second);
  undo.clear();
  mutex_.unlock();
}

std::unique_ptr<ConcurrencyControl> make_serial_cc() { return std::make_unique<SerialCc>(); }

}  // namespace pimstm
