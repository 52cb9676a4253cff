#pragma once

#include "etd/corpus.hpp"

namespace etd {

/// An example paired with a (possibly swapped) type set and the corruption
/// flag z. z = 1 implies presented is disjoint from the gold types; z = 0
/// implies presented equals them.
struct FilterInstance {
  Example example;
  std::vector<TypeId> presented_types;
  bool corrupted = false;
};

/// An example whose types were thinned by independent deletion. noisy is a
/// non-empty subset of the gold types (the target).
struct DropInstance {
  Example example;
  std::vector<TypeId> noisy_types;
};

struct ErrorDatasetStats {
  std::size_t positives = 0;
  std::size_t negatives = 0;
  std::size_t demoted = 0;  // positives with no disjoint partner, kept as negatives
};

struct DropDatasetStats {
  std::size_t slots = 0;                 // total type slots seen
  std::size_t dropped_pre_restore = 0;   // deletions before empty-set repair
  std::size_t restored = 0;              // examples repaired to one type
};

/// Type-swap construction. Exactly floor(error_fraction * n) examples, chosen
/// by a seeded shuffle, become positives: their presented types are the full
/// type set of another example, re-drawn until disjoint from the original
/// (capped at n draws; on failure the example is demoted to a negative and
/// counted). Output preserves dataset order. Deterministic per seed.
std::vector<FilterInstance> make_error_dataset(const Dataset& gold,
                                               double error_fraction,
                                               std::uint64_t seed,
                                               ErrorDatasetStats* stats = nullptr);

/// Independent type deletion at `drop_rate`; an example whose set empties has
/// one uniformly drawn original type restored. Deterministic per seed.
std::vector<DropInstance> make_drop_dataset(const Dataset& gold, double drop_rate,
                                            std::uint64_t seed,
                                            DropDatasetStats* stats = nullptr);

// Canonical JSONL extended with presented_types/z or noisy_types.
void write_error_dataset(const std::vector<FilterInstance>& instances,
                         const TypeVocabulary& vocab, const std::string& path);
std::vector<FilterInstance> load_error_dataset(
    const std::string& path, std::shared_ptr<const TypeVocabulary> vocab);

void write_drop_dataset(const std::vector<DropInstance>& instances,
                        const TypeVocabulary& vocab, const std::string& path);
std::vector<DropInstance> load_drop_dataset(
    const std::string& path, std::shared_ptr<const TypeVocabulary> vocab);

}  // namespace etd
