#pragma once

#include <memory>
#include <string>
#include <vector>

#include "etd/vocab.hpp"

namespace etd {

enum class Source : std::uint8_t { kGold = 0, kEl = 1, kHead = 2 };

const char* source_name(Source source);
Source source_from_name(const std::string& name);

/// One mention in context. The sentence is left + mention + right; the span
/// is implied by the segment lengths, so an invalid span cannot be
/// represented. `types` is kept sorted by vocabulary id.
struct Example {
  std::string id;
  std::vector<std::string> left_tokens;
  std::vector<std::string> mention_tokens;
  std::vector<std::string> right_tokens;
  std::vector<TypeId> types;
  Source source = Source::kGold;

  std::size_t sentence_length() const {
    return left_tokens.size() + mention_tokens.size() + right_tokens.size();
  }
  std::vector<std::string> sentence_tokens() const;
  /// Mention characters: tokens joined by a single space.
  std::string mention_chars() const;
};

/// Throws ValidationError if the example breaks an invariant (empty mention,
/// type outside `vocab`, no types).
void validate_example(const Example& example, const TypeVocabulary& vocab);

/// Ordered collection bound to one vocabulary; immutable after construction
/// in practice (loaders and generators return it by value).
struct Dataset {
  std::vector<Example> examples;
  std::shared_ptr<const TypeVocabulary> vocabulary;
  std::string provenance;  // gold / el / head / denoised / synthetic / ...

  std::size_t size() const { return examples.size(); }
};

}  // namespace etd
