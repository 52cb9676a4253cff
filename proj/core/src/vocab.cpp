#include "etd/vocab.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace etd {

const char* tier_name(Tier tier) {
  switch (tier) {
    case Tier::kGeneral: return "general";
    case Tier::kFine: return "fine";
    case Tier::kUltra: return "ultra";
  }
  return "?";
}

TypeVocabulary::TypeVocabulary(std::vector<std::pair<std::string, Tier>> entries) {
  names_.reserve(entries.size());
  tiers_.reserve(entries.size());
  std::string hash_input;
  for (auto& [name, tier] : entries) {
    if (name.empty()) throw ValidationError("empty type identifier");
    auto [it, inserted] = index_.emplace(name, static_cast<TypeId>(names_.size()));
    (void)it;
    if (!inserted) throw ValidationError("duplicate type identifier: " + name);
    hash_input += name;
    hash_input += '\t';
    hash_input += tier_name(tier);
    hash_input += '\n';
    names_.push_back(std::move(name));
    tiers_.push_back(tier);
    ++tier_sizes_[static_cast<std::size_t>(tier)];
  }
  fingerprint_ = etd::fingerprint(hash_input);
}

TypeId TypeVocabulary::id(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw ValidationError("unknown type: " + name);
  return it->second;
}

TypeId TypeVocabulary::find(const std::string& name) const {
  auto it = index_.find(name);
  return it == index_.end() ? TypeId{-1} : it->second;
}

std::vector<TypeId> TypeVocabulary::tier_ids(Tier tier) const {
  std::vector<TypeId> out;
  for (std::size_t i = 0; i < tiers_.size(); ++i) {
    if (tiers_[i] == tier) out.push_back(static_cast<TypeId>(i));
  }
  return out;
}

namespace {

void append_tier_file(const std::string& path, Tier tier,
                      std::vector<std::pair<std::string, Tier>>& entries) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open tier file: " + path);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    entries.emplace_back(line, tier);
  }
}

}  // namespace

TypeVocabulary build_vocabulary(const std::string& general_path,
                                const std::string& fine_path,
                                const std::string& ultra_path) {
  std::vector<std::pair<std::string, Tier>> entries;
  append_tier_file(general_path, Tier::kGeneral, entries);
  append_tier_file(fine_path, Tier::kFine, entries);
  append_tier_file(ultra_path, Tier::kUltra, entries);
  return TypeVocabulary(std::move(entries));
}

std::vector<TypeId> to_type_ids(const std::vector<std::string>& names,
                                const TypeVocabulary& vocab) {
  std::vector<TypeId> ids;
  ids.reserve(names.size());
  for (const auto& name : names) ids.push_back(vocab.id(name));
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return ids;
}

std::vector<std::string> to_type_names(const std::vector<TypeId>& ids,
                                       const TypeVocabulary& vocab) {
  std::vector<std::string> names;
  names.reserve(ids.size());
  for (TypeId id : ids) names.push_back(vocab.name(id));
  return names;
}

}  // namespace etd
