#include "pimstm/stm/config.hpp"

#include <bit>
#include <string>

#include "pimstm/error.hpp"

namespace pimstm {

Design design_of(Variant v) {
  using enum Granularity;
  using enum ReadVisibility;
  using enum LockTiming;
  using enum WritePolicy;
  switch (v) {
    case Variant::kNorec: return {kNorec, kInvisible, kCommitTime, kWriteBack};
    case Variant::kTinyCtlWb: return {kOrec, kInvisible, kCommitTime, kWriteBack};
    case Variant::kTinyEtlWb: return {kOrec, kInvisible, kEncounterTime, kWriteBack};
    case Variant::kTinyEtlWt: return {kOrec, kInvisible, kEncounterTime, kWriteThrough};
    case Variant::kVrCtlWb: return {kOrec, kVisible, kCommitTime, kWriteBack};
    case Variant::kVrEtlWb: return {kOrec, kVisible, kEncounterTime, kWriteBack};
    case Variant::kVrEtlWt: return {kOrec, kVisible, kEncounterTime, kWriteThrough};
  }
  throw Error(ErrorCode::kConfigInvalid, "unknown variant");
}

Variant variant_for(const Design& d) {
  if (d.policy == WritePolicy::kWriteThrough && d.timing == LockTiming::kCommitTime) {
    throw Error(ErrorCode::kConfigInvalid, "write-through requires encounter-time locking");
  }
  if (d.granularity == Granularity::kNorec) {
    if (d.visibility == ReadVisibility::kVisible) {
      throw Error(ErrorCode::kConfigInvalid, "NOrec cannot use visible reads");
    }
    if (d.timing == LockTiming::kEncounterTime) {
      throw Error(ErrorCode::kConfigInvalid, "NOrec cannot use encounter-time locking");
    }
    return Variant::kNorec;
  }
  const bool etl = d.timing == LockTiming::kEncounterTime;
  const bool wt = d.policy == WritePolicy::kWriteThrough;
  if (d.visibility == ReadVisibility::kInvisible) {
    return !etl ? Variant::kTinyCtlWb : (wt ? Variant::kTinyEtlWt : Variant::kTinyEtlWb);
  }
  return !etl ? Variant::kVrCtlWb : (wt ? Variant::kVrEtlWt : Variant::kVrEtlWb);
}

std::string_view to_string(Variant v) {
  switch (v) {
    case Variant::kNorec: return "norec";
    case Variant::kTinyCtlWb: return "tiny_ctlwb";
    case Variant::kTinyEtlWb: return "tiny_etlwb";
    case Variant::kTinyEtlWt: return "tiny_etlwt";
    case Variant::kVrCtlWb: return "vr_ctlwb";
    case Variant::kVrEtlWb: return "vr_etlwb";
    case Variant::kVrEtlWt: return "vr_etlwt";
  }
  return "?";
}

std::optional<Variant> parse_variant(std::string_view name) {
  for (Variant v : kAllVariants) {
    if (to_string(v) == name) return v;
  }
  return std::nullopt;
}

bool is_tiny(Variant v) {
  return v == Variant::kTinyCtlWb || v == Variant::kTinyEtlWb || v == Variant::kTinyEtlWt;
}

bool is_vr(Variant v) { return v == Variant::kVrCtlWb || v == Variant::kVrEtlWb || v == Variant::kVrEtlWt; }

std::string_view to_string(Mutation m) {
  switch (m) {
    case Mutation::kNone: return "none";
    case Mutation::kNorecNoRevalidation: return "norec-no-revalidation";
    case Mutation::kTinyNoValidation: return "tiny-no-validation";
    case Mutation::kVrNoReadLocks: return "vr-no-read-locks";
  }
  return "?";
}

std::optional<Mutation> parse_mutation(std::string_view name) {
  for (Mutation m : {Mutation::kNone, Mutation::kNorecNoRevalidation, Mutation::kTinyNoValidation,
                     Mutation::kVrNoReadLocks}) {
    if (to_string(m) == name) return m;
  }
  return std::nullopt;
}

void validate(const StmConfig& cfg) {
  if (cfg.lock_table_entries == 0 || !std::has_single_bit(cfg.lock_table_entries)) {
    throw Error(ErrorCode::kConfigInvalid,
                "lock_table_entries must be a power of two, got " + std::to_string(cfg.lock_table_entries));
  }
  if (cfg.tasklets < 1 || cfg.tasklets > kMaxTasklets) {
    throw Error(ErrorCode::kConfigInvalid, "tasklets must be in 1..24, got " + std::to_string(cfg.tasklets));
  }
  if (cfg.readset_capacity == 0 || cfg.writeset_capacity == 0) {
    throw Error(ErrorCode::kConfigInvalid, "set capacities must be positive");
  }
  if (cfg.heap_bytes == 0 || cfg.heap_bytes % 4 != 0) {
    throw Error(ErrorCode::kConfigInvalid, "heap_bytes must be a positive multiple of 4");
  }
  if (cfg.app_wram_reservation > kWramBytes) {
    throw Error(ErrorCode::kConfigInvalid, "application WRAM reservation exceeds WRAM");
  }
  if (cfg.retry_cap == 0) throw Error(ErrorCode::kConfigInvalid, "retry_cap must be positive");
  if (!(cfg.time_budget_seconds >= 0)) throw Error(ErrorCode::kConfigInvalid, "time budget must be >= 0");
}

}  // namespace pimstm
