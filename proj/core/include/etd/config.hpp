#pragma once

#include <map>
#include <optional>
#include <string>

#include "etd/encoders.hpp"
#include "etd/nn/adam.hpp"
#include "etd/synthetic.hpp"

namespace etd {

/// Flat INI-style run configuration. Every pipeline stage reads the same
/// schema; command-line flags override file values. Unknown sections or keys
/// are rejected, and any path that is set must exist at validation time.
struct RunConfig {
  // [paths]
  std::string tier_general, tier_fine, tier_ultra;
  std::string embeddings;
  std::string definitions;
  std::string contextual_store;
  std::string lexicon;
  std::string onto_mapping;

  EncoderConfig encoder;
  nn::TrainConfig train;

  // [noising]
  double error_fraction = 0.3;
  double drop_rate = 0.7;

  // [denoise]
  double filter_threshold = 0.5;
  double relabel_threshold = 0.5;
  int min_types = 2;
  std::string denoiser_training = "joint";  // joint | separate

  // [heuristics]
  double pair_threshold = 0.9;
  int pair_min_support = 1;
  bool overlap_discard_on_miss = false;

  // [predict]
  int predict_topk = 20;
  double predict_threshold = 0.5;

  SyntheticSpec synthetic;

  /// Parses `path` over the current values (so defaults survive).
  void load_file(const std::string& path);
  /// Applies one "section.key" override.
  void set(const std::string& dotted_key, const std::string& value);

  /// Checks ranges and that every set path exists.
  void validate() const;

  /// Canonical "section.key=value" dump; the fingerprint hashes it.
  std::string canonical() const;
  std::string fingerprint() const;
};

/// Deterministic run manifest written next to every command's outputs:
/// command, config snapshot, seed, and content fingerprints of all inputs
/// and outputs. Re-running a command with an identical manifest must
/// reproduce its outputs byte for byte.
class Manifest {
 public:
  Manifest(std::string command, const RunConfig& config, std::uint64_t seed);

  void add_input(const std::string& path);
  void add_output(const std::string& path);
  void set_vocab_fingerprint(const std::string& fp) { vocab_fingerprint_ = fp; }

  void write(const std::string& path) const;

 private:
  std::string command_;
  std::string config_canonical_;
  std::string config_fingerprint_;
  std::string vocab_fingerprint_;
  std::uint64_t seed_;
  std::map<std::string, std::string> inputs_;
  std::map<std::string, std::string> outputs_;
};

}  // namespace etd
