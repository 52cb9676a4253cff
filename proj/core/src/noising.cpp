#include "etd/noising.hpp"

#include <algorithm>

#include <nlohmann/json.hpp>

namespace etd {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

namespace {

bool disjoint(const std::vector<TypeId>& a, const std::vector<TypeId>& b) {
  // both sorted
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (*ia < *ib) {
      ++ia;
    } else if (*ib < *ia) {
      ++ib;
    } else {
      return false;
    }
  }
  return true;
}

}  // namespace

std::vector<FilterInstance> make_error_dataset(const Dataset& gold,
                                               double error_fraction,
                                               std::uint64_t seed,
                                               ErrorDatasetStats* stats) {
  if (gold.examples.empty()) throw ContractError("make_error_dataset: empty dataset");
  if (error_fraction < 0.0 || error_fraction > 1.0) {
    throw ValidationError("error_fraction must be in [0, 1]");
  }
  const std::size_t n = gold.examples.size();
  const auto positives = static_cast<std::size_t>(error_fraction * static_cast<double>(n));

  Rng rng(derive_seed(seed, fnv1a64("error_dataset")));
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  rng.shuffle(order);

  std::vector<bool> corrupt(n, false);
  for (std::size_t k = 0; k < positives; ++k) corrupt[order[k]] = true;

  ErrorDatasetStats local;
  std::vector<FilterInstance> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    FilterInstance instance;
    instance.example = gold.examples[i];
    if (corrupt[i]) {
      // Per-example draw stream, so results do not depend on processing order.
      Rng draw(derive_seed(seed, fnv1a64("error_swap"), i));
      bool found = false;
      for (std::size_t attempt = 0; attempt < n; ++attempt) {
        const std::size_t j = draw.below(n);
        if (j == i) continue;
        if (disjoint(gold.examples[j].types, gold.examples[i].types)) {
          instance.presented_types = gold.examples[j].types;
          instance.corrupted = true;
          found = true;
          break;
        }
      }
      if (!found) {
        ++local.demoted;  // no disjoint partner; keep as a negative
      }
    }
    if (!instance.corrupted) {
      instance.presented_types = gold.examples[i].types;
      ++local.negatives;
    } else {
      ++local.positives;
    }
    out.push_back(std::move(instance));
  }
  if (stats != nullptr) *stats = local;
  return out;
}

std::vector<DropInstance> make_drop_dataset(const Dataset& gold, double drop_rate,
                                            std::uint64_t seed,
                                            DropDatasetStats* stats) {
  if (gold.examples.empty()) throw ContractError("make_drop_dataset: empty dataset");
  if (drop_rate < 0.0 || drop_rate >= 1.0) {
    throw ValidationError("drop_rate must be in [0, 1)");
  }

  DropDatasetStats local;
  std::vector<DropInstance> out;
  out.reserve(gold.examples.size());
  for (std::size_t i = 0; i < gold.examples.size(); ++i) {
    const Example& example = gold.examples[i];
    if (example.types.empty()) {
      throw ContractError("make_drop_dataset: example " + example.id + " has no types");
    }
    Rng rng(derive_seed(seed, fnv1a64("drop_dataset"), i));
    DropInstance instance;
    instance.example = example;
    for (TypeId type : example.types) {
      ++local.slots;
      if (rng.bernoulli(drop_rate)) {
        ++local.dropped_pre_restore;
      } else {
        instance.noisy_types.push_back(type);
      }
    }
    if (instance.noisy_types.empty()) {
      instance.noisy_types.push_back(
          example.types[rng.below(example.types.size())]);
      ++local.restored;
    }
    out.push_back(std::move(instance));
  }
  if (stats != nullptr) *stats = local;
  return out;
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

void write_error_dataset(const std::vector<FilterInstance>& instances,
                         const TypeVocabulary& vocab, const std::string& path) {
  std::string out;
  for (const auto& instance : instances) {
    ordered_json obj = ordered_json::parse(example_to_json(instance.example, vocab));
    obj["presented_types"] = to_type_names(instance.presented_types, vocab);
    obj["z"] = instance.corrupted ? 1 : 0;
    out += obj.dump();
    out += '\n';
  }
  write_file(path, out);
}

void write_drop_dataset(const std::vector<DropInstance>& instances,
                        const TypeVocabulary& vocab, const std::string& path) {
  std::string out;
  for (const auto& instance : instances) {
    ordered_json obj = ordered_json::parse(example_to_json(instance.example, vocab));
    obj["noisy_types"] = to_type_names(instance.noisy_types, vocab);
    out += obj.dump();
    out += '\n';
  }
  write_file(path, out);
}

namespace {

Example example_from_json(const json& obj, const TypeVocabulary& vocab) {
  Example example;
  example.id = obj.at("id").get<std::string>();
  example.left_tokens = obj.at("left_tokens").get<std::vector<std::string>>();
  example.mention_tokens = obj.at("mention_tokens").get<std::vector<std::string>>();
  example.right_tokens = obj.at("right_tokens").get<std::vector<std::string>>();
  example.types = to_type_ids(obj.at("types").get<std::vector<std::string>>(), vocab);
  example.source = source_from_name(obj.at("source").get<std::string>());
  validate_example(example, vocab);
  return example;
}

template <typename Fn>
void for_each_line(const std::string& path, Fn&& fn) {
  const std::string contents = read_file(path);
  std::size_t start = 0;
  std::size_t line_no = 0;
  while (start < contents.size()) {
    std::size_t end = contents.find('\n', start);
    if (end == std::string::npos) end = contents.size();
    ++line_no;
    std::string_view line(contents.data() + start, end - start);
    if (!line.empty()) {
      try {
        fn(json::parse(line));
      } catch (const ValidationError&) {
        throw;
      } catch (const std::exception& err) {
        throw ValidationError(path + ":" + std::to_string(line_no) +
                              ": parse error: " + err.what());
      }
    }
    start = end + 1;
  }
}

}  // namespace

std::vector<FilterInstance> load_error_dataset(
    const std::string& path, std::shared_ptr<const TypeVocabulary> vocab) {
  std::vector<FilterInstance> out;
  for_each_line(path, [&](const json& obj) {
    FilterInstance instance;
    instance.example = example_from_json(obj, *vocab);
    instance.presented_types =
        to_type_ids(obj.at("presented_types").get<std::vector<std::string>>(), *vocab);
    instance.corrupted = obj.at("z").get<int>() != 0;
    out.push_back(std::move(instance));
  });
  return out;
}

std::vector<DropInstance> load_drop_dataset(
    const std::string& path, std::shared_ptr<const TypeVocabulary> vocab) {
  std::vector<DropInstance> out;
  for_each_line(path, [&](const json& obj) {
    DropInstance instance;
    instance.example = example_from_json(obj, *vocab);
    instance.noisy_types =
        to_type_ids(obj.at("noisy_types").get<std::vector<std::string>>(), *vocab);
    out.push_back(std::move(instance));
  });
  return out;
}

}  // namespace etd
