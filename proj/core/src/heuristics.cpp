#include "etd/heuristics.hpp"

#include <algorithm>
#include <map>
#include <set>

#include <nlohmann/json.hpp>

namespace etd {

using ordered_json = nlohmann::ordered_json;

std::vector<TypeId> PairTable::consequents(TypeId antecedent) const {
  std::vector<TypeId> out;
  auto it = std::lower_bound(rules.begin(), rules.end(), antecedent,
                             [](const PairRule& rule, TypeId a) {
                               return rule.antecedent < a;
                             });
  for (; it != rules.end() && it->antecedent == antecedent; ++it) {
    out.push_back(it->consequent);
  }
  return out;
}

std::vector<TypeId> expand_lexical(const std::vector<TypeId>& types,
                                   const TypeLexicon& lexicon) {
  std::set<TypeId> expanded(types.begin(), types.end());
  for (TypeId id : types) {
    const auto& syn = lexicon.synonyms.at(static_cast<std::size_t>(id));
    const auto& hyp = lexicon.hypernyms.at(static_cast<std::size_t>(id));
    expanded.insert(syn.begin(), syn.end());
    expanded.insert(hyp.begin(), hyp.end());
  }
  return {expanded.begin(), expanded.end()};
}

PairTable build_pair_table(const Dataset& gold, double threshold,
                           std::size_t min_support) {
  if (gold.examples.empty()) throw ContractError("build_pair_table: empty dataset");
  std::map<TypeId, std::size_t> singles;
  std::map<std::pair<TypeId, TypeId>, std::size_t> pairs;
  for (const auto& example : gold.examples) {
    for (TypeId a : example.types) {
      ++singles[a];
      for (TypeId b : example.types) {
        if (a != b) ++pairs[{a, b}];
      }
    }
  }
  PairTable table;
  for (const auto& [pair, both] : pairs) {
    const std::size_t base = singles.at(pair.first);
    if (base < min_support) continue;
    const double conditional =
        static_cast<double>(both) / static_cast<double>(base);
    if (conditional > threshold) {
      table.rules.push_back({pair.first, pair.second, conditional});
    }
  }
  return table;  // map iteration is already (antecedent, consequent) sorted
}

namespace {

std::vector<TypeId> set_union(const std::vector<TypeId>& a,
                              const std::vector<TypeId>& b) {
  std::vector<TypeId> out;
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

}  // namespace

Dataset apply_lexical(const Dataset& distant, const TypeLexicon& lexicon) {
  Dataset out;
  out.vocabulary = distant.vocabulary;
  out.provenance = distant.provenance + "+synhyper";
  out.examples.reserve(distant.examples.size());
  for (const auto& example : distant.examples) {
    Example updated = example;
    updated.types = expand_lexical(example.types, lexicon);
    out.examples.push_back(std::move(updated));
  }
  return out;
}

Dataset apply_pairs(const Dataset& distant, const PairTable& table) {
  Dataset out;
  out.vocabulary = distant.vocabulary;
  out.provenance = distant.provenance + "+pairs";
  out.examples.reserve(distant.examples.size());
  for (const auto& example : distant.examples) {
    std::set<TypeId> expanded(example.types.begin(), example.types.end());
    for (TypeId a : example.types) {  // single pass over the original types
      const auto next = table.consequents(a);
      expanded.insert(next.begin(), next.end());
    }
    Example updated = example;
    updated.types.assign(expanded.begin(), expanded.end());
    out.examples.push_back(std::move(updated));
  }
  return out;
}

Dataset overlap_denoise(const Dataset& distant, const TypingModel& model,
                        bool discard_on_miss) {
  if (model.provenance() != "gold") {
    throw ValidationError(
        "overlap_denoise requires a model trained on gold data only "
        "(checkpoint provenance '" + model.provenance() + "')");
  }
  if (model.vocab().fingerprint() != distant.vocabulary->fingerprint()) {
    throw ValidationError("overlap_denoise: vocabulary mismatch");
  }
  Dataset out;
  out.vocabulary = distant.vocabulary;
  out.provenance = distant.provenance + "+overlap";
  for (const auto& example : distant.examples) {
    const auto predicted = model.predict(example);
    std::vector<TypeId> common;
    std::set_intersection(predicted.begin(), predicted.end(), example.types.begin(),
                          example.types.end(), std::back_inserter(common));
    Example updated = example;
    if (!common.empty()) {
      updated.types = set_union(predicted, example.types);
    } else if (discard_on_miss) {
      continue;
    }
    out.examples.push_back(std::move(updated));
  }
  return out;
}

void write_pair_table(const PairTable& table, const TypeVocabulary& vocab,
                      const std::string& path) {
  std::string out;
  for (const auto& rule : table.rules) {
    ordered_json obj;
    obj["antecedent"] = vocab.name(rule.antecedent);
    obj["consequent"] = vocab.name(rule.consequent);
    obj["conditional"] = rule.conditional;
    out += obj.dump();
    out += '\n';
  }
  write_file(path, out);
}

}  // namespace etd
