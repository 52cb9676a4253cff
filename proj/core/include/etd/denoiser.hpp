#pragma once

#include <memory>

#include "etd/denoise_log.hpp"
#include "etd/encoders.hpp"
#include "etd/noising.hpp"
#include "etd/nn/adam.hpp"
#include "etd/typer.hpp"

namespace etd {

/// The denoising model: a shared mention encoder and type encoder feeding a
/// filter head P(error) = sigmoid(u' Highway([v_m ; v_t])) and a relabel head
/// e = sigmoid(W [v_m ; v_t]). A model may carry one head (separate training)
/// or both (joint training over a shared encoder, the default).
class DenoiserModel {
 public:
  enum class Head { kFilter, kRelabel, kBoth };

  DenoiserModel(EncoderConfig config, std::shared_ptr<const TypeVocabulary> vocab,
                Head head, const EmbeddingTable* word_table,
                const DefinitionMap* definitions,
                const ContextualVectorStore* store = nullptr);

  struct Cache {
    MentionEncoder::Cache mention;
    TypeEncoder::Cache types;
    nn::Highway::Cache highway;
    Vec feature;  // [v_m ; v_t]
  };

  double filter_logit(const Example& example, const std::vector<TypeId>& presented,
                      bool train, Rng* rng, Cache& cache) const;
  void filter_backward(Cache& cache, double dLogit);

  Vec relabel_logits(const Example& example, const std::vector<TypeId>& presented,
                     bool train, Rng* rng, Cache& cache) const;
  void relabel_backward(Cache& cache, const Vec& dLogits);

  /// Inference-mode P(error).
  double filter_score(const Example& example, const std::vector<TypeId>& presented) const;
  /// Inference-mode per-type probabilities.
  Vec relabel_scores(const Example& example, const std::vector<TypeId>& presented) const;

  void save_filter(const std::string& path) const;
  void save_relabel(const std::string& path) const;
  void load_filter(const std::string& path, bool force = false);
  void load_relabel(const std::string& path, bool force = false);

  Head head() const { return head_; }
  const TypeVocabulary& vocab() const { return *vocab_; }
  const EncoderConfig& config() const { return config_; }
  nn::ParameterSet& params() { return params_; }
  const std::string& provenance() const { return provenance_; }
  void set_provenance(std::string provenance) { provenance_ = std::move(provenance); }
  nn::TrainConfig& train_config() { return train_config_; }

 private:
  Vec encode(const Example& example, const std::vector<TypeId>& presented, bool train,
             Rng* rng, Cache& cache) const;
  void encode_backward(Cache& cache, const Vec& dFeature);

  EncoderConfig config_;
  std::shared_ptr<const TypeVocabulary> vocab_;
  Head head_;
  const EmbeddingTable* word_table_;
  const DefinitionMap* definitions_;
  nn::ParameterSet params_;
  std::unique_ptr<TokenVectorProvider> provider_;
  std::unique_ptr<MentionEncoder> mention_;
  std::unique_ptr<TypeEncoder> type_encoder_;
  std::unique_ptr<nn::Highway> highway_;
  nn::Tensor* u_ = nullptr;        // filter score vector
  nn::Tensor* relabel_W_ = nullptr;  // |V| x feature_dim
  std::string provenance_ = "untrained";
  nn::TrainConfig train_config_;
};

/// Mean binary cross-entropy training of the filter head on swap-noised
/// instances. Early-stops on a seeded 10% held-out slice (config.patience).
TrainResult train_filter(DenoiserModel& model,
                         const std::vector<FilterInstance>& instances,
                         const nn::TrainConfig& config);

/// Tier-partitioned training of the relabel head on drop-noised instances
/// (inputs: noisy types; targets: the original gold types).
TrainResult train_relabel(DenoiserModel& model,
                          const std::vector<DropInstance>& instances,
                          const nn::TrainConfig& config);

/// Joint training of both heads over the shared encoder (alternating
/// batches). The model must carry Head::kBoth.
TrainResult train_denoiser(DenoiserModel& model,
                           const std::vector<FilterInstance>& error_instances,
                           const std::vector<DropInstance>& drop_instances,
                           const nn::TrainConfig& config);

struct FilterSplit {
  Dataset kept;
  Dataset discarded;
};

/// Discards exactly the examples with P(error) > threshold (strict).
FilterSplit apply_filter(const Dataset& distant, const DenoiserModel& model,
                         double threshold = 0.5);

/// Replaces each example's types by { l : e_l > threshold }, dropping
/// examples that end up with fewer than `min_types` types. Output provenance
/// is "denoised". Appends one record per input example to `log` when given.
Dataset apply_relabel(const Dataset& kept, const DenoiserModel& model,
                      double threshold = 0.5, int min_types = 2,
                      DenoiseLog* log = nullptr);

/// Filter then relabel (the relabeler sees only filter survivors). Emits the
/// full decision trail. Models must share the dataset's vocabulary
/// fingerprint (ValidationError otherwise).
Dataset denoise(const Dataset& distant, const DenoiserModel& filter,
                const DenoiserModel& relabel, DenoiseLog& log,
                double filter_threshold = 0.5, double relabel_threshold = 0.5,
                int min_types = 2);

}  // namespace etd
