#include "etd/example.hpp"

namespace etd {

const char* source_name(Source source) {
  switch (source) {
    case Source::kGold: return "gold";
    case Source::kEl: return "el";
    case Source::kHead: return "head";
  }
  return "?";
}

Source source_from_name(const std::string& name) {
  if (name == "gold") return Source::kGold;
  if (name == "el") return Source::kEl;
  if (name == "head") return Source::kHead;
  throw ValidationError("unknown source: " + name);
}

std::vector<std::string> Example::sentence_tokens() const {
  std::vector<std::string> out;
  out.reserve(sentence_length());
  out.insert(out.end(), left_tokens.begin(), left_tokens.end());
  out.insert(out.end(), mention_tokens.begin(), mention_tokens.end());
  out.insert(out.end(), right_tokens.begin(), right_tokens.end());
  return out;
}

std::string Example::mention_chars() const {
  std::string out;
  for (std::size_t i = 0; i < mention_tokens.size(); ++i) {
    if (i > 0) out += ' ';
    out += mention_tokens[i];
  }
  return out;
}

void validate_example(const Example& example, const TypeVocabulary& vocab) {
  if (example.mention_tokens.empty()) {
    throw ValidationError("example " + example.id + ": empty mention");
  }
  if (example.types.empty()) {
    throw ValidationError("example " + example.id + ": no types");
  }
  for (TypeId id : example.types) {
    if (id < 0 || static_cast<std::size_t>(id) >= vocab.size()) {
      throw ValidationError("example " + example.id + ": type id out of range");
    }
  }
}

}  // namespace etd
