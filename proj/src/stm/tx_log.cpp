#include "pimstm/stm/tx_log.hpp"

#include <string>

#include "pimstm/error.hpp"

namespace pimstm {

void TxLog::push(const TaskletCtx& ctx, std::uint32_t w0, std::uint32_t w1) {
  if (size_ >= capacity_) {
    throw Error(ErrorCode::kCapacityExceeded, std::string(name_) + " full at " + std::to_string(capacity_) +
                                                  " entries (tasklet " + std::to_string(ctx.tasklet) + ")");
  }
  memory_->store32(region_.tier, addr_of(size_, 0), w0, ctx);
  if (words_ > 1) memory_->store32(region_.tier, addr_of(size_, 1), w1, ctx);
  ++size_;
}

std::optional<std::uint32_t> WriteSet::find(const TaskletCtx& ctx, std::uint32_t addr) const {
  for (std::uint32_t i = 0; i < log_.size(); ++i) {
    if (log_.word(ctx, i, 0) == addr) return i;
  }
  return std::nullopt;
}

std::optional<std::uint32_t> WriteSet::lookup(const TaskletCtx& ctx, std::uint32_t addr) const {
  if (log_.empty()) return std::nullopt;
  auto i = find(ctx, addr);
  if (!i) return std::nullopt;
  return log_.word(ctx, *i, 1);
}

void WriteSet::upsert(const TaskletCtx& ctx, std::uint32_t addr, std::uint32_t value) {
  if (auto i = find(ctx, addr)) {
    log_.set_word(ctx, *i, 1, value);
    return;
  }
  log_.push(ctx, addr, value);
}

}  // namespace pimstm
