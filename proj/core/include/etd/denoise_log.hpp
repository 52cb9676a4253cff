#pragma once

#include <optional>

#include "etd/example.hpp"

namespace etd {

/// Per-example decision trail for one denoise run. `kept` is the filter's
/// decision; `new_types` is present only when the example survived both the
/// filter and the relabeler's minimum-type rule.
struct DenoiseRecord {
  std::string id;
  double p_error = 0.0;
  bool kept = false;
  std::vector<TypeId> old_types;
  std::optional<std::vector<TypeId>> new_types;
};

struct DenoiseLog {
  std::vector<DenoiseRecord> records;

  std::size_t filter_discards() const;
  std::size_t relabel_discards() const;
  std::size_t survivors() const;
};

void write_denoise_log(const DenoiseLog& log, const TypeVocabulary& vocab,
                       const std::string& path);
DenoiseLog load_denoise_log(const std::string& path, const TypeVocabulary& vocab);

}  // namespace etd
