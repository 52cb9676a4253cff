#pragma once

#include "etd/resources.hpp"
#include "etd/typer.hpp"

namespace etd {

/// Implication rules mined from gold co-occurrence: add `consequent` whenever
/// `antecedent` is present. `conditional` is count(a and b) / count(a).
struct PairRule {
  TypeId antecedent;
  TypeId consequent;
  double conditional;
};

struct PairTable {
  std::vector<PairRule> rules;  // sorted by (antecedent, consequent)

  /// Consequents for one antecedent, in vocabulary order.
  std::vector<TypeId> consequents(TypeId antecedent) const;
};

/// One-pass union with lexicon synonyms and hypernyms (no transitive closure).
std::vector<TypeId> expand_lexical(const std::vector<TypeId>& types,
                                   const TypeLexicon& lexicon);

/// Ordered pairs (a, b) with count(a) >= min_support occurrences and
/// count(a and b) / count(a) strictly above `threshold`. Counts are
/// example-level over the gold data; insensitive to example order.
PairTable build_pair_table(const Dataset& gold, double threshold = 0.9,
                           std::size_t min_support = 1);

/// Per-example application of the heuristics; all of them only ever add
/// types and never drop an example.
Dataset apply_lexical(const Dataset& distant, const TypeLexicon& lexicon);
Dataset apply_pairs(const Dataset& distant, const PairTable& table);

/// Keep-or-extend: predict with a gold-only typing model; when the prediction
/// intersects the noisy types, union them, otherwise leave the example
/// unchanged (set `discard_on_miss` to drop it instead). The model's
/// provenance must be "gold".
Dataset overlap_denoise(const Dataset& distant, const TypingModel& model,
                        bool discard_on_miss = false);

void write_pair_table(const PairTable& table, const TypeVocabulary& vocab,
                      const std::string& path);

}  // namespace etd
