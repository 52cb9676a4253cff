#pragma once

#include <map>

#include "etd/corpus.hpp"
#include "etd/resources.hpp"

namespace etd {

/// Desk-scale corpus generator. Ground truth is tier-correlated: each latent
/// entity profile owns a small pool of general / fine / ultra types plus
/// signature mention and context words. An example draws a profile and one of
/// three mention-word variants; the variant fixes the truth label set (all
/// profile generals, one fine, two or three ultras — sizes 5/5/6, mean 5.33).
/// The distant channel then either swaps the whole label set for a disjoint
/// profile's variant (probability p_wrong) or passes it through per-type
/// omission (p_miss), mirroring wholesale mislabeling and systematic
/// missingness.
struct SyntheticSpec {
  int n_general = 6;
  int n_fine = 18;
  int n_ultra = 36;
  int n_profiles = 12;
  int profile_generals = 2;
  int profile_fines = 3;
  int profile_ultras = 6;
  int n_gold = 2000;
  int n_distant = 20000;
  double p_wrong = 0.1;
  // Tuned so distant examples average ~1.5 types after the >=1 repair.
  double p_miss = 0.76;
  int min_context = 2;
  int max_context = 5;
  int max_mention = 2;
  int embedding_dim = 24;

  void validate() const;
};

struct SyntheticBundle {
  std::shared_ptr<const TypeVocabulary> vocabulary;
  Dataset gold;     // full truth labels
  Dataset distant;  // channel-corrupted labels
  Dataset truth;    // uncorrupted labels of the distant examples (scoring only)
  EmbeddingTable embeddings;
  std::map<std::string, std::vector<std::string>> definitions;
  TypeLexicon lexicon;
  std::map<std::string, std::vector<std::string>> onto_rules;
};

/// Bit-deterministic for a fixed (spec, seed); every example draws from its
/// own derived stream.
SyntheticBundle generate_synthetic_corpus(const SyntheticSpec& spec,
                                          std::uint64_t seed);

/// Writes tier files, datasets and resources under `dir` (created by caller):
/// general.txt fine.txt ultra.txt gold.jsonl distant.jsonl truth.jsonl
/// embeddings.txt definitions.jsonl lexicon.jsonl onto_mapping.jsonl.
void write_synthetic_bundle(const SyntheticBundle& bundle, const std::string& dir);

}  // namespace etd
