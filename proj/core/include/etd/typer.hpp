#pragma once

#include <memory>

#include "etd/encoders.hpp"
#include "etd/evaluation.hpp"
#include "etd/nn/adam.hpp"

namespace etd {

/// Threshold rule with argmax fallback: all types scoring above `threshold`,
/// or the single best type when none do (ties broken toward the lowest
/// vocabulary index). Never empty.
std::vector<TypeId> predict_types(const Vec& scores, double threshold = 0.5);

/// Tier-partitioned binary cross-entropy over probabilities: a tier
/// contributes only when the gold set contains a type of that tier, in which
/// case every vocabulary type of the tier enters as a binary target.
/// Natural-log BCE; throws ContractError on empty gold.
double partitioned_loss(const Vec& probabilities, const std::vector<TypeId>& gold_types,
                        const TypeVocabulary& vocab);

/// Same loss computed stably from logits; optionally fills d loss / d logits.
double partitioned_loss_logits(const Vec& logits, const std::vector<TypeId>& gold_types,
                               const TypeVocabulary& vocab, Vec* grad = nullptr);

/// Final typing model: e = sigmoid(E v_m).
class TypingModel {
 public:
  TypingModel(EncoderConfig config, std::shared_ptr<const TypeVocabulary> vocab,
              const EmbeddingTable* word_table,
              const ContextualVectorStore* store = nullptr);

  struct Cache {
    MentionEncoder::Cache mention;
    Vec v_m;
  };

  Vec logits(const Example& example, bool train, Rng* rng, Cache& cache) const;
  void backward(Cache& cache, const Vec& dLogits);

  /// Inference-mode per-type probabilities.
  Vec scores(const Example& example) const;
  std::vector<TypeId> predict(const Example& example, double threshold = 0.5) const;

  void save(const std::string& path) const;
  /// Refuses checkpoints with mismatched config / vocabulary fingerprints
  /// unless forced; adopts the checkpoint's provenance.
  void load(const std::string& path, bool force = false);

  const TypeVocabulary& vocab() const { return *vocab_; }
  std::shared_ptr<const TypeVocabulary> vocab_ptr() const { return vocab_; }
  const EncoderConfig& config() const { return config_; }
  nn::ParameterSet& params() { return params_; }
  const nn::ParameterSet& params() const { return params_; }
  const std::string& provenance() const { return provenance_; }
  void set_provenance(std::string provenance) { provenance_ = std::move(provenance); }
  nn::TrainConfig& train_config() { return train_config_; }
  const nn::TrainConfig& train_config() const { return train_config_; }

 private:
  EncoderConfig config_;
  std::shared_ptr<const TypeVocabulary> vocab_;
  nn::ParameterSet params_;
  std::unique_ptr<TokenVectorProvider> provider_;
  std::unique_ptr<MentionEncoder> mention_;
  nn::Tensor* decoder_ = nullptr;  // |V| x mention_dim
  std::string provenance_ = "untrained";
  nn::TrainConfig train_config_;
};

struct TrainLogEntry {
  int epoch = 0;
  double train_loss = 0.0;
  double dev_metric = 0.0;
  bool has_dev = false;
};

struct TrainResult {
  std::vector<TrainLogEntry> log;
  int best_epoch = -1;
  double best_metric = 0.0;
  long steps = 0;

  std::string to_json() const;
};

/// Trains on gold (plus `augment`, concatenated 1:1 and shuffled per epoch).
/// With a dev set, early-stops on total macro-F1 (patience from config) and
/// restores the best epoch's parameters. Deterministic per config seed.
TrainResult train_typer(TypingModel& model, const Dataset& gold,
                        const Dataset* augment, const Dataset* dev,
                        const nn::TrainConfig& config);

/// JSONL {"id", "pred_types": [...], "scores_topk": [[type, score], ...]}.
void write_predictions(const TypingModel& model, const Dataset& dataset,
                       const std::string& path, int topk = 20,
                       double threshold = 0.5);

TypeSetMap load_predictions(const std::string& path, const TypeVocabulary& vocab);

/// Gold map for evaluation, keyed by example id.
TypeSetMap dataset_type_map(const Dataset& dataset);

}  // namespace etd
