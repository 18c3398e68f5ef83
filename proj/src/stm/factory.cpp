#include <string>

#include "pimstm/stm/variants.hpp"

namespace pimstm {

std::unique_ptr<ConcurrencyControl> make_concurrency_control(const StmConfig& cfg) {
  const Variant v = cfg.variant;
  const Mutation m = cfg.mutation;
  const bool fits = m == Mutation::kNone || (m == Mutation::kNorecNoRevalidation && v == Variant::kNorec) ||
                    (m == Mutation::kTinyNoValidation && is_tiny(v)) || (m == Mutation::kVrNoReadLocks && is_vr(v));
  if (!fits) {
    throw Error(ErrorCode::kConfigInvalid,
                "mutation " + std::string(to_string(m)) + " does not apply to " + std::string(to_string(v)));
  }
  if (v == Variant::kNorec) return std::make_unique<NorecCc>(m);
  if (is_tiny(v)) return std::make_unique<TinyCc>(v, m);
  return std::make_unique<VrCc>(v, m);
}

}  // namespace pimstm
