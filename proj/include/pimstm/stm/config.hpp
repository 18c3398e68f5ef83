#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "pimstm/dpu/memory.hpp"

namespace pimstm {

// The seven viable leaves of the design taxonomy.
enum class Variant {
  kNorec,
  kTinyCtlWb,
  kTinyEtlWb,
  kTinyEtlWt,
  kVrCtlWb,
  kVrEtlWb,
  kVrEtlWt,
};

inline constexpr std::array<Variant, 7> kAllVariants = {
    Variant::kNorec,   Variant::kTinyCtlWb, Variant::kTinyEtlWb, Variant::kTinyEtlWt,
    Variant::kVrCtlWb, Variant::kVrEtlWb,   Variant::kVrEtlWt,
};

enum class Granularity { kNorec, kOrec };
enum class ReadVisibility { kInvisible, kVisible };
enum class LockTiming { kCommitTime, kEncounterTime };
enum class WritePolicy { kWriteBack, kWriteThrough };

struct Design {
  Granularity granularity;
  ReadVisibility visibility;
  LockTiming timing;
  WritePolicy policy;
};

Design design_of(Variant v);
// Throws kConfigInvalid for combinations outside the taxonomy: write-through
// with commit-time locking, and NOrec with visible reads or encounter-time
// locking.
Variant variant_for(const Design& d);

std::string_view to_string(Variant v);
std::optional<Variant> parse_variant(std::string_view name);

bool is_tiny(Variant v);
bool is_vr(Variant v);

// Deliberately broken algorithms used to prove the correctness oracles can
// detect unsafe executions.
enum class Mutation {
  kNone,
  kNorecNoRevalidation,
  kTinyNoValidation,
  kVrNoReadLocks,
};

std::string_view to_string(Mutation m);
std::optional<Mutation> parse_mutation(std::string_view name);

struct StmConfig {
  Variant variant = Variant::kNorec;
  Tier metadata_tier = Tier::kMram;
  std::uint32_t lock_table_entries = 1024;
  // Where the Tiny/VR lock table lives; defaults to metadata_tier.
  std::optional<Tier> lock_table_tier;
  int tasklets = 1;
  std::uint64_t seed = 0;
  std::uint32_t readset_capacity = 4096;
  std::uint32_t writeset_capacity = 4096;
  // Transactional heap, always in MRAM.
  std::uint32_t heap_bytes = 1u << 20;
  // WRAM the application keeps for itself; shrinks the metadata budget.
  std::uint32_t app_wram_reservation = 0;
  std::uint64_t retry_cap = 1'000'000;
  // Wall-clock seconds allowed from Stm construction, checked between retries; 0 = unlimited.
  double time_budget_seconds = 0;
  Mutation mutation = Mutation::kNone;
};

inline Tier lock_tier(const StmConfig& cfg) { return cfg.lock_table_tier.value_or(cfg.metadata_tier); }

// Bytes of a `bytes`-sized lock table that land in the metadata tier.
inline std::uint32_t lock_table_share(const StmConfig& cfg, std::uint32_t bytes) {
  return lock_tier(cfg) == cfg.metadata_tier ? bytes : 0;
}

// Structural checks that do not depend on the chosen algorithm.
void validate(const StmConfig& cfg);

}  // namespace pimstm
