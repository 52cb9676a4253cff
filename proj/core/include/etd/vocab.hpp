#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "etd/common.hpp"

namespace etd {

using TypeId = std::int32_t;

enum class Tier : std::uint8_t { kGeneral = 0, kFine = 1, kUltra = 2 };

constexpr std::array<Tier, 3> kAllTiers = {Tier::kGeneral, Tier::kFine, Tier::kUltra};

const char* tier_name(Tier tier);

/// Closed type inventory with one tier per type. Iteration order is the
/// construction order (general block, then fine, then ultra) and is the order
/// persisted in every serialized artifact.
class TypeVocabulary {
 public:
  TypeVocabulary() = default;

  /// Entries must be unique; throws ValidationError naming the duplicate.
  explicit TypeVocabulary(std::vector<std::pair<std::string, Tier>> entries);

  std::size_t size() const { return names_.size(); }
  bool empty() const { return names_.empty(); }

  const std::string& name(TypeId id) const { return names_.at(static_cast<std::size_t>(id)); }
  Tier tier(TypeId id) const { return tiers_.at(static_cast<std::size_t>(id)); }

  bool contains(const std::string& name) const { return index_.count(name) > 0; }

  /// Throws ValidationError for unknown names.
  TypeId id(const std::string& name) const;

  /// -1 when absent.
  TypeId find(const std::string& name) const;

  std::size_t tier_size(Tier tier) const { return tier_sizes_[static_cast<std::size_t>(tier)]; }

  /// Ids of one tier, in vocabulary order.
  std::vector<TypeId> tier_ids(Tier tier) const;

  /// Stable content hash over (name, tier) pairs in order; stamped into
  /// checkpoints and manifests so artifacts from different vocabularies
  /// cannot be silently mixed.
  const std::string& fingerprint() const { return fingerprint_; }

 private:
  std::vector<std::string> names_;
  std::vector<Tier> tiers_;
  std::unordered_map<std::string, TypeId> index_;
  std::array<std::size_t, 3> tier_sizes_ = {0, 0, 0};
  std::string fingerprint_;
};

/// Reads three newline-delimited identifier files (general, fine, ultra) into
/// a vocabulary ordered general-then-fine-then-ultra.
TypeVocabulary build_vocabulary(const std::string& general_path,
                                const std::string& fine_path,
                                const std::string& ultra_path);

/// Sorted unique ids; throws ValidationError on unknown names.
std::vector<TypeId> to_type_ids(const std::vector<std::string>& names,
                                const TypeVocabulary& vocab);

std::vector<std::string> to_type_names(const std::vector<TypeId>& ids,
                                       const TypeVocabulary& vocab);

}  // namespace etd
