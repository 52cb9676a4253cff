#include "etd/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace etd {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

namespace {

std::vector<std::string> to_tokens(const json& value, const char* field) {
  if (!value.is_array()) {
    throw ValidationError(std::string(field) + " must be an array of strings");
  }
  std::vector<std::string> out;
  out.reserve(value.size());
  for (const auto& item : value) {
    if (!item.is_string()) {
      throw ValidationError(std::string(field) + " must contain only strings");
    }
    out.push_back(item.get<std::string>());
  }
  return out;
}

struct RawExample {
  Example example;
  std::vector<std::string> type_names;
};

RawExample parse_canonical(const json& obj) {
  RawExample raw;
  raw.example.id = obj.at("id").get<std::string>();
  raw.example.left_tokens = to_tokens(obj.at("left_tokens"), "left_tokens");
  raw.example.mention_tokens = to_tokens(obj.at("mention_tokens"), "mention_tokens");
  raw.example.right_tokens = to_tokens(obj.at("right_tokens"), "right_tokens");
  raw.type_names = to_tokens(obj.at("types"), "types");
  raw.example.source = source_from_name(obj.at("source").get<std::string>());
  return raw;
}

// Importer for the released ultra-fine format. The usual layout carries
// left/right context arrays plus a whitespace-joined mention string; some
// exports instead give full sentence tokens, where the mention has to be
// located by search (first occurrence wins, counted as ambiguous if it
// repeats).
RawExample parse_choi(const json& obj, Source default_source, LoadReport& report) {
  RawExample raw;
  raw.example.id = obj.contains("annot_id") ? obj.at("annot_id").get<std::string>()
                                            : obj.at("id").get<std::string>();
  raw.example.mention_tokens = split_ws(obj.at("mention_span").get<std::string>());
  if (obj.contains("left_context_token")) {
    raw.example.left_tokens = to_tokens(obj.at("left_context_token"), "left_context_token");
    raw.example.right_tokens = to_tokens(obj.at("right_context_token"), "right_context_token");
  } else {
    auto sentence = to_tokens(obj.at("sentence_tokens"), "sentence_tokens");
    const auto& mention = raw.example.mention_tokens;
    if (mention.empty() || mention.size() > sentence.size()) {
      throw ValidationError("mention_span not found in sentence_tokens");
    }
    std::size_t first = sentence.size();
    std::size_t matches = 0;
    for (std::size_t start = 0; start + mention.size() <= sentence.size(); ++start) {
      if (std::equal(mention.begin(), mention.end(), sentence.begin() + start)) {
        if (matches == 0) first = start;
        ++matches;
      }
    }
    if (matches == 0) throw ValidationError("mention_span not found in sentence_tokens");
    if (matches > 1) ++report.ambiguous_mentions;
    raw.example.left_tokens.assign(sentence.begin(), sentence.begin() + first);
    raw.example.right_tokens.assign(sentence.begin() + first + mention.size(), sentence.end());
  }
  raw.type_names = to_tokens(obj.at("y_str"), "y_str");
  raw.example.source = obj.contains("source")
                           ? source_from_name(obj.at("source").get<std::string>())
                           : default_source;
  return raw;
}

}  // namespace

void truncate_example(Example& example, const TruncationLimits& limits,
                      LoadReport& report) {
  if (example.mention_tokens.size() > limits.max_mention_tokens) {
    example.mention_tokens.resize(limits.max_mention_tokens);
    ++report.truncated_mentions;
  }
  if (example.sentence_length() > limits.max_sentence_tokens) {
    ++report.truncated_sentences;
    while (example.sentence_length() > limits.max_sentence_tokens) {
      auto& left = example.left_tokens;
      auto& right = example.right_tokens;
      if (left.empty() && right.empty()) break;  // mention alone exceeds cap
      if (left.size() > right.size()) {
        left.erase(left.begin());
      } else {
        right.pop_back();
      }
    }
  }
}

LoadResult load_dataset(const std::string& path, DataFormat format,
                        std::shared_ptr<const TypeVocabulary> vocab,
                        UnknownTypePolicy policy, Source default_source,
                        const TruncationLimits& limits) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open dataset: " + path);

  LoadResult result;
  result.dataset.vocabulary = vocab;
  result.dataset.provenance = source_name(default_source);

  std::string line;
  std::size_t line_no = 0;
  std::unordered_map<std::string, std::size_t> seen_ids;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    ++result.report.lines;

    RawExample raw;
    try {
      json obj = json::parse(line);
      raw = (format == DataFormat::kCanonical)
                ? parse_canonical(obj)
                : parse_choi(obj, default_source, result.report);
    } catch (const ValidationError& err) {
      throw ValidationError(path + ":" + std::to_string(line_no) + ": " + err.what());
    } catch (const std::exception& err) {
      throw ValidationError(path + ":" + std::to_string(line_no) +
                            ": parse error: " + err.what());
    }

    if (raw.example.mention_tokens.empty()) {
      throw ValidationError(path + ":" + std::to_string(line_no) + ": empty mention");
    }

    std::vector<TypeId> ids;
    for (const auto& name : raw.type_names) {
      TypeId id = vocab->find(name);
      if (id < 0) {
        if (policy == UnknownTypePolicy::kStrict) {
          throw ValidationError(path + ":" + std::to_string(line_no) +
                                ": unknown type: " + name);
        }
        ++result.report.dropped_unknown_types;
        result.report.dropped_type_names.push_back(name);
      } else {
        ids.push_back(id);
      }
    }
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    if (ids.empty()) {
      if (policy == UnknownTypePolicy::kStrict) {
        throw ValidationError(path + ":" + std::to_string(line_no) + ": no usable types");
      }
      ++result.report.dropped_empty_types;
      continue;
    }
    raw.example.types = std::move(ids);

    if (!seen_ids.emplace(raw.example.id, line_no).second) {
      throw ValidationError(path + ":" + std::to_string(line_no) +
                            ": duplicate example id: " + raw.example.id);
    }

    truncate_example(raw.example, limits, result.report);
    validate_example(raw.example, *vocab);
    result.dataset.examples.push_back(std::move(raw.example));
    ++result.report.loaded;
  }
  return result;
}

std::string example_to_json(const Example& example, const TypeVocabulary& vocab) {
  ordered_json obj;
  obj["id"] = example.id;
  obj["left_tokens"] = example.left_tokens;
  obj["mention_tokens"] = example.mention_tokens;
  obj["right_tokens"] = example.right_tokens;
  obj["types"] = to_type_names(example.types, vocab);
  obj["source"] = source_name(example.source);
  return obj.dump();
}

std::string dataset_to_jsonl(const Dataset& dataset) {
  std::string out;
  for (const auto& example : dataset.examples) {
    out += example_to_json(example, *dataset.vocabulary);
    out += '\n';
  }
  return out;
}

void write_dataset(const Dataset& dataset, const std::string& path) {
  write_file(path, dataset_to_jsonl(dataset));
}

void write_dataset_meta(const std::string& dataset_path,
                        const std::string& vocab_fingerprint,
                        const std::string& config_fingerprint,
                        const std::string& provenance) {
  ordered_json obj;
  obj["vocab_fingerprint"] = vocab_fingerprint;
  obj["config_fingerprint"] = config_fingerprint;
  obj["provenance"] = provenance;
  write_file(dataset_path + ".meta.json", obj.dump(2) + "\n");
}

}  // namespace etd
