#include "etd/synthetic.hpp"

#include <algorithm>
#include <set>

namespace etd {

void SyntheticSpec::validate() const {
  if (n_general <= 0 || n_fine <= 0 || n_ultra <= 0) {
    throw ValidationError("synthetic: tier sizes must be positive");
  }
  if (n_profiles <= 1) throw ValidationError("synthetic: need at least two profiles");
  if (profile_generals > n_general || profile_fines > n_fine ||
      profile_ultras > n_ultra || profile_generals <= 0 || profile_fines <= 0 ||
      profile_ultras <= 0) {
    throw ValidationError("synthetic: profile pools must fit within the tiers");
  }
  if (p_wrong < 0.0 || p_wrong > 1.0) {
    throw ValidationError("p_wrong must be in [0, 1]");
  }
  if (p_miss < 0.0 || p_miss > 1.0) {
    throw ValidationError("p_miss must be in [0, 1]");
  }
  if (n_gold <= 0 || n_distant < 0) {
    throw ValidationError("synthetic: need a positive gold count");
  }
  if (min_context < 0 || max_context < min_context || max_mention <= 0) {
    throw ValidationError("synthetic: bad context/mention lengths");
  }
  if (embedding_dim <= 0) throw ValidationError("synthetic: bad embedding dimension");
}

namespace {

struct Profile {
  std::vector<TypeId> generals, fines, ultras;
  std::vector<TypeId> pool;  // sorted union
  std::vector<std::string> mention_words;
  std::vector<std::string> context_words;
};

std::vector<TypeId> sample_without_replacement(Rng& rng, TypeId base, int universe,
                                               int count) {
  std::vector<TypeId> ids(static_cast<std::size_t>(universe));
  for (int i = 0; i < universe; ++i) ids[static_cast<std::size_t>(i)] = base + i;
  for (int i = 0; i < count; ++i) {
    const std::size_t j = i + rng.below(static_cast<std::size_t>(universe - i));
    std::swap(ids[static_cast<std::size_t>(i)], ids[j]);
  }
  ids.resize(static_cast<std::size_t>(count));
  std::sort(ids.begin(), ids.end());
  return ids;
}

const std::vector<std::string>& filler_words() {
  static const std::vector<std::string> fillers = {
      "the", "a", "was", "seen", "near", "said", "and", "later"};
  return fillers;
}

const std::vector<std::string>& mention_prefix_words() {
  static const std::vector<std::string> prefixes = {"new", "old", "big"};
  return prefixes;
}

const std::vector<std::string>& tier_words() {
  static const std::vector<std::string> words = {"general", "finegrained", "ultrafine"};
  return words;
}

constexpr std::size_t kVariants = 3;

/// Deterministic truth for (profile, variant): every profile general, one
/// fine, two ultras (the last variant takes a third). With the default pools
/// the three variant sets have sizes 5, 5 and 6.
std::vector<TypeId> variant_types(const Profile& profile, std::size_t variant) {
  std::vector<TypeId> types = profile.generals;
  types.push_back(profile.fines[variant % profile.fines.size()]);
  const std::size_t nu = profile.ultras.size();
  const std::size_t start = (2 * variant) % nu;
  types.push_back(profile.ultras[start]);
  types.push_back(profile.ultras[(start + 1) % nu]);
  if (variant == kVariants - 1) types.push_back(profile.ultras[(start + 2) % nu]);
  std::sort(types.begin(), types.end());
  types.erase(std::unique(types.begin(), types.end()), types.end());
  return types;
}

bool sets_disjoint(const std::vector<TypeId>& a, const std::vector<TypeId>& b) {
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (*ia < *ib) ++ia;
    else if (*ib < *ia) ++ib;
    else return false;
  }
  return true;
}

Example make_example(Rng& rng, const std::string& id, const Profile& profile,
                     const SyntheticSpec& spec, Source source, std::size_t variant) {
  Example example;
  example.id = id;
  example.source = source;

  // The variant's signature word carries the label signal and sits last so
  // it is also the headword; an optional generic prefix varies the span.
  const std::size_t mention_len = 1 + rng.below(static_cast<std::size_t>(spec.max_mention));
  for (std::size_t i = 1; i < mention_len; ++i) {
    example.mention_tokens.push_back(
        mention_prefix_words()[rng.below(mention_prefix_words().size())]);
  }
  example.mention_tokens.push_back(profile.mention_words[variant]);
  auto draw_context = [&](std::vector<std::string>& out) {
    const auto span = static_cast<std::size_t>(spec.max_context - spec.min_context + 1);
    const std::size_t len = static_cast<std::size_t>(spec.min_context) + rng.below(span);
    for (std::size_t i = 0; i < len; ++i) {
      if (rng.bernoulli(0.5)) {
        out.push_back(profile.context_words[rng.below(profile.context_words.size())]);
      } else {
        out.push_back(filler_words()[rng.below(filler_words().size())]);
      }
    }
  };
  draw_context(example.left_tokens);
  draw_context(example.right_tokens);
  return example;
}

}  // namespace

SyntheticBundle generate_synthetic_corpus(const SyntheticSpec& spec,
                                          std::uint64_t seed) {
  spec.validate();

  // Vocabulary: g*, f*, u* in tier order.
  std::vector<std::pair<std::string, Tier>> entries;
  for (int i = 0; i < spec.n_general; ++i) entries.emplace_back("g" + std::to_string(i), Tier::kGeneral);
  for (int i = 0; i < spec.n_fine; ++i) entries.emplace_back("f" + std::to_string(i), Tier::kFine);
  for (int i = 0; i < spec.n_ultra; ++i) entries.emplace_back("u" + std::to_string(i), Tier::kUltra);
  auto vocab = std::make_shared<TypeVocabulary>(std::move(entries));

  // Latent profiles.
  Rng profile_rng(derive_seed(seed, fnv1a64("profiles")));
  std::vector<Profile> profiles(static_cast<std::size_t>(spec.n_profiles));
  for (int k = 0; k < spec.n_profiles; ++k) {
    Profile& profile = profiles[static_cast<std::size_t>(k)];
    profile.generals = sample_without_replacement(profile_rng, 0, spec.n_general,
                                                  spec.profile_generals);
    profile.fines = sample_without_replacement(profile_rng, spec.n_general,
                                               spec.n_fine, spec.profile_fines);
    profile.ultras = sample_without_replacement(
        profile_rng, spec.n_general + spec.n_fine, spec.n_ultra, spec.profile_ultras);
    profile.pool = profile.generals;
    profile.pool.insert(profile.pool.end(), profile.fines.begin(), profile.fines.end());
    profile.pool.insert(profile.pool.end(), profile.ultras.begin(), profile.ultras.end());
    std::sort(profile.pool.begin(), profile.pool.end());
    for (int j = 0; j < 3; ++j) {
      profile.mention_words.push_back("ent" + std::to_string(k) + "x" + std::to_string(j));
    }
    for (int j = 0; j < 4; ++j) {
      profile.context_words.push_back("ctx" + std::to_string(k) + "p" + std::to_string(j));
    }
  }

  SyntheticBundle bundle;
  bundle.vocabulary = vocab;
  bundle.gold.vocabulary = vocab;
  bundle.gold.provenance = "gold";
  bundle.distant.vocabulary = vocab;
  bundle.distant.provenance = "distant";
  bundle.truth.vocabulary = vocab;
  bundle.truth.provenance = "truth";

  // Gold examples: full truth labels.
  for (int i = 0; i < spec.n_gold; ++i) {
    Rng rng(derive_seed(seed, fnv1a64("gold"), static_cast<std::uint64_t>(i)));
    const std::size_t k = rng.below(profiles.size());
    const std::size_t variant = rng.below(kVariants);
    Example example = make_example(rng, "g" + std::to_string(i), profiles[k], spec,
                                   Source::kGold, variant);
    example.types = variant_types(profiles[k], variant);
    bundle.gold.examples.push_back(std::move(example));
  }

  // Distant examples: truth labels pass through the two noise channels.
  for (int i = 0; i < spec.n_distant; ++i) {
    Rng rng(derive_seed(seed, fnv1a64("distant"), static_cast<std::uint64_t>(i)));
    const std::size_t k = rng.below(profiles.size());
    const std::size_t variant = rng.below(kVariants);
    const Source source = rng.bernoulli(0.5) ? Source::kEl : Source::kHead;
    Example example = make_example(rng, "d" + std::to_string(i), profiles[k], spec,
                                   source, variant);
    const std::vector<TypeId> truth_types = variant_types(profiles[k], variant);

    // Both channels end with the same per-type omission pass so wrong and
    // merely-thinned label sets share one size distribution.
    auto thin = [&](const std::vector<TypeId>& full) {
      std::vector<TypeId> kept;
      for (TypeId id : full) {
        if (!rng.bernoulli(spec.p_miss)) kept.push_back(id);
      }
      if (kept.empty()) kept.push_back(full[rng.below(full.size())]);
      return kept;
    };

    std::vector<TypeId> noisy;
    if (rng.bernoulli(spec.p_wrong)) {
      // Wholesale mislabeling: a disjoint profile's sample, or a uniform
      // draw from the complement when no profile pool avoids the truth set.
      bool found = false;
      for (int attempt = 0; attempt < spec.n_profiles && !found; ++attempt) {
        const std::size_t q = rng.below(profiles.size());
        if (q == k || !sets_disjoint(profiles[q].pool, truth_types)) continue;
        noisy = thin(sample_truth(rng, profiles[q], spec));
        found = true;
      }
      if (!found) {
        std::vector<TypeId> complement;
        for (std::size_t t = 0; t < vocab->size(); ++t) {
          const auto id = static_cast<TypeId>(t);
          if (!std::binary_search(truth_types.begin(), truth_types.end(), id)) {
            complement.push_back(id);
          }
        }
        const std::size_t count = 1 + rng.below(3);
        std::set<TypeId> picked;
        for (std::size_t t = 0; t < count && t < complement.size(); ++t) {
          picked.insert(complement[rng.below(complement.size())]);
        }
        noisy.assign(picked.begin(), picked.end());
      }
    } else {
      noisy = thin(truth_types);
    }

    Example truth_example = example;
    truth_example.types = truth_types;
    bundle.truth.examples.push_back(std::move(truth_example));

    example.types = std::move(noisy);
    bundle.distant.examples.push_back(std::move(example));
  }

  // Embeddings: every surface word plus definition words; one vector per
  // word derived from the word's own stream so table contents do not depend
  // on insertion order.
  std::set<std::string> words(filler_words().begin(), filler_words().end());
  words.insert(tier_words().begin(), tier_words().end());
  for (const auto& profile : profiles) {
    words.insert(profile.mention_words.begin(), profile.mention_words.end());
    words.insert(profile.context_words.begin(), profile.context_words.end());
  }
  for (std::size_t t = 0; t < vocab->size(); ++t) {
    words.insert("d" + vocab->name(static_cast<TypeId>(t)));
  }
  const double bound = std::sqrt(3.0 / static_cast<double>(spec.embedding_dim));
  std::unordered_map<std::string, Vec> table;
  for (const auto& word : words) {
    Rng rng(derive_seed(seed, fnv1a64("embedding"), fnv1a64(word)));
    Vec vec(spec.embedding_dim);
    for (int d = 0; d < spec.embedding_dim; ++d) vec[d] = rng.uniform(-bound, bound);
    table.emplace(word, std::move(vec));
  }
  bundle.embeddings = EmbeddingTable(spec.embedding_dim, std::move(table));

  // Definitions: tier word + a type-specific token.
  for (std::size_t t = 0; t < vocab->size(); ++t) {
    const auto id = static_cast<TypeId>(t);
    const std::string& name = vocab->name(id);
    bundle.definitions[name] = {tier_words()[static_cast<std::size_t>(vocab->tier(id))],
                                "d" + name};
  }

  // Lexicon: hypernyms from profile co-occurrence (fine -> generals,
  // ultra -> generals and fines), context-insensitive by construction.
  bundle.lexicon = TypeLexicon::empty(*vocab);
  for (const auto& profile : profiles) {
    for (TypeId fine : profile.fines) {
      auto& hyp = bundle.lexicon.hypernyms[static_cast<std::size_t>(fine)];
      hyp.insert(hyp.end(), profile.generals.begin(), profile.generals.end());
    }
    for (TypeId ultra : profile.ultras) {
      auto& hyp = bundle.lexicon.hypernyms[static_cast<std::size_t>(ultra)];
      hyp.insert(hyp.end(), profile.generals.begin(), profile.generals.end());
      hyp.insert(hyp.end(), profile.fines.begin(), profile.fines.end());
    }
  }
  for (auto& hyp : bundle.lexicon.hypernyms) {
    std::sort(hyp.begin(), hyp.end());
    hyp.erase(std::unique(hyp.begin(), hyp.end()), hyp.end());
  }

  // OntoNotes-style mapping: generals and fines map to paths, ultras do not.
  for (int i = 0; i < spec.n_general; ++i) {
    bundle.onto_rules["g" + std::to_string(i)] = {"/gen" + std::to_string(i)};
  }
  for (int i = 0; i < spec.n_fine; ++i) {
    const auto fine_id = static_cast<TypeId>(spec.n_general + i);
    int parent = i % spec.n_general;
    for (const auto& profile : profiles) {
      if (std::binary_search(profile.fines.begin(), profile.fines.end(), fine_id)) {
        parent = static_cast<int>(profile.generals.front());
        break;
      }
    }
    bundle.onto_rules["f" + std::to_string(i)] = {
        "/gen" + std::to_string(parent) + "/fin" + std::to_string(i)};
  }

  return bundle;
}

void write_synthetic_bundle(const SyntheticBundle& bundle, const std::string& dir) {
  const TypeVocabulary& vocab = *bundle.vocabulary;
  std::string general, fine, ultra;
  for (std::size_t t = 0; t < vocab.size(); ++t) {
    const auto id = static_cast<TypeId>(t);
    std::string& target = vocab.tier(id) == Tier::kGeneral
                              ? general
                              : (vocab.tier(id) == Tier::kFine ? fine : ultra);
    target += vocab.name(id);
    target += '\n';
  }
  write_file(dir + "/general.txt", general);
  write_file(dir + "/fine.txt", fine);
  write_file(dir + "/ultra.txt", ultra);
  write_dataset(bundle.gold, dir + "/gold.jsonl");
  write_dataset(bundle.distant, dir + "/distant.jsonl");
  write_dataset(bundle.truth, dir + "/truth.jsonl");
  write_embeddings(bundle.embeddings, dir + "/embeddings.txt");
  write_definitions(bundle.definitions, dir + "/definitions.jsonl");
  write_lexicon(bundle.lexicon, vocab, dir + "/lexicon.jsonl");
  write_onto_mapping(bundle.onto_rules, dir + "/onto_mapping.jsonl");
}

}  // namespace etd
