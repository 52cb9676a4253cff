#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "etd/example.hpp"

namespace etd {

enum class DataFormat { kCanonical, kChoi };
enum class UnknownTypePolicy { kStrict, kPermissive };

/// Ingest limits. Sentences are trimmed to `max_sentence_tokens` by removing
/// context tokens from the outer ends (longer side first, right on ties);
/// mentions are trimmed to `max_mention_tokens` from the right.
struct TruncationLimits {
  std::size_t max_sentence_tokens = 50;
  std::size_t max_mention_tokens = 20;
};

struct LoadReport {
  std::size_t lines = 0;
  std::size_t loaded = 0;
  std::size_t dropped_unknown_types = 0;  // permissive mode only
  std::size_t dropped_empty_types = 0;    // permissive mode only
  std::size_t truncated_sentences = 0;
  std::size_t truncated_mentions = 0;
  std::size_t ambiguous_mentions = 0;  // importer resolved a repeated span
  std::vector<std::string> dropped_type_names;

  bool empty() const {
    return lines == 0 && loaded == 0 && dropped_unknown_types == 0 &&
           dropped_empty_types == 0;
  }
};

struct LoadResult {
  Dataset dataset;
  LoadReport report;
};

/// Parses one-example-per-line JSON under `format`. Unknown types raise
/// ValidationError in strict mode; in permissive mode the offending types are
/// dropped (and the example too, if nothing remains) and counted in the
/// report. Parse failures name the 1-based line.
LoadResult load_dataset(const std::string& path, DataFormat format,
                        std::shared_ptr<const TypeVocabulary> vocab,
                        UnknownTypePolicy policy = UnknownTypePolicy::kStrict,
                        Source default_source = Source::kGold,
                        const TruncationLimits& limits = {});

/// Canonical JSONL: fixed key order (id, left_tokens, mention_tokens,
/// right_tokens, types, source), one object per line, UTF-8. Types are
/// written in vocabulary order, so write(load(f)) == f for canonical files.
void write_dataset(const Dataset& dataset, const std::string& path);
std::string dataset_to_jsonl(const Dataset& dataset);
std::string example_to_json(const Example& example, const TypeVocabulary& vocab);

void truncate_example(Example& example, const TruncationLimits& limits,
                      LoadReport& report);

/// Sidecar metadata (`<path>.meta.json`) binding a dataset file to the
/// vocabulary and config that produced it.
void write_dataset_meta(const std::string& dataset_path,
                        const std::string& vocab_fingerprint,
                        const std::string& config_fingerprint,
                        const std::string& provenance);

}  // namespace etd
