#include "etd/denoiser.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "etd/nn/checkpoint.hpp"

namespace etd {

DenoiserModel::DenoiserModel(EncoderConfig config,
                             std::shared_ptr<const TypeVocabulary> vocab, Head head,
                             const EmbeddingTable* word_table,
                             const DefinitionMap* definitions,
                             const ContextualVectorStore* store)
    : config_(config),
      vocab_(std::move(vocab)),
      head_(head),
      word_table_(word_table),
      definitions_(definitions) {
  if (word_table_ == nullptr) {
    throw ValidationError("denoiser: an embedding table is required");
  }
  if (definitions_ == nullptr) {
    throw ValidationError("denoiser: a definition map is required");
  }
  if (config_.use_contextual) {
    if (store == nullptr) {
      throw ValidationError("denoiser: contextual mode needs a vector store");
    }
    config_.d_emb = store->dimension();
    config_.contextual_layers = store->layer_count();
  } else {
    config_.d_emb = word_table_->dimension();
  }
  if (config_.d_def_word == 0) config_.d_def_word = word_table_->dimension();
  config_.validate();

  if (config_.use_contextual) {
    provider_ = std::make_unique<ContextualTokenProvider>(
        params_, "encoder.mention.mix", store, config_.contextual_layers);
  } else {
    provider_ = std::make_unique<StaticTokenProvider>(word_table_);
  }
  mention_ = std::make_unique<MentionEncoder>(params_, config_);
  type_encoder_ = std::make_unique<TypeEncoder>(params_, config_, vocab_->size());

  if (head_ == Head::kFilter || head_ == Head::kBoth) {
    highway_ = std::make_unique<nn::Highway>(params_, "filter.highway",
                                             config_.feature_dim());
    u_ = &params_.add("filter.u", config_.feature_dim(), 1);
  }
  if (head_ == Head::kRelabel || head_ == Head::kBoth) {
    relabel_W_ = &params_.add("relabel.W", static_cast<Eigen::Index>(vocab_->size()),
                              config_.feature_dim());
  }
  params_.initialize(derive_seed(train_config_.seed, fnv1a64("denoiser-init")));
}

Vec DenoiserModel::encode(const Example& example, const std::vector<TypeId>& presented,
                          bool train, Rng* rng, Cache& cache) const {
  Vec v_m = mention_->forward(example, *provider_, train, train_config_.dropout_embed,
                              train_config_.dropout_mention, rng, cache.mention);
  Vec v_t = type_encoder_->forward(presented, *definitions_, *word_table_, cache.types);
  cache.feature = Vec(v_m.size() + v_t.size());
  cache.feature.segment(0, v_m.size()) = v_m;
  cache.feature.segment(v_m.size(), v_t.size()) = v_t;
  return cache.feature;
}

void DenoiserModel::encode_backward(Cache& cache, const Vec& dFeature) {
  const int m_dim = config_.mention_dim();
  const int t_dim = config_.type_dim();
  mention_->backward(*provider_, cache.mention, dFeature.segment(0, m_dim));
  type_encoder_->backward(cache.types, dFeature.segment(m_dim, t_dim));
}

double DenoiserModel::filter_logit(const Example& example,
                                   const std::vector<TypeId>& presented, bool train,
                                   Rng* rng, Cache& cache) const {
  if (u_ == nullptr) throw ContractError("this denoiser has no filter head");
  Vec feature = encode(example, presented, train, rng, cache);
  Vec hidden = highway_->run(feature, cache.highway);
  return u_->value.col(0).dot(hidden);
}

void DenoiserModel::filter_backward(Cache& cache, double dLogit) {
  // The highway cache holds x (= feature); rebuild its output lazily from the
  // cached gate/act, cheaper than storing it separately.
  Vec hidden = cache.highway.gate.cwiseProduct(cache.highway.act) +
               (Vec::Ones(cache.highway.x.size()) - cache.highway.gate)
                   .cwiseProduct(cache.highway.x);
  u_->grad.col(0) += dLogit * hidden;
  Vec dHidden = dLogit * u_->value.col(0);
  Vec dFeature = highway_->backward(cache.highway, dHidden);
  encode_backward(cache, dFeature);
}

Vec DenoiserModel::relabel_logits(const Example& example,
                                  const std::vector<TypeId>& presented, bool train,
                                  Rng* rng, Cache& cache) const {
  if (relabel_W_ == nullptr) throw ContractError("this denoiser has no relabel head");
  Vec feature = encode(example, presented, train, rng, cache);
  return relabel_W_->value * feature;
}

void DenoiserModel::relabel_backward(Cache& cache, const Vec& dLogits) {
  relabel_W_->grad.noalias() += dLogits * cache.feature.transpose();
  Vec dFeature = relabel_W_->value.transpose() * dLogits;
  encode_backward(cache, dFeature);
}

double DenoiserModel::filter_score(const Example& example,
                                   const std::vector<TypeId>& presented) const {
  Cache cache;
  return nn::sigmoid(filter_logit(example, presented, false, nullptr, cache));
}

Vec DenoiserModel::relabel_scores(const Example& example,
                                  const std::vector<TypeId>& presented) const {
  Cache cache;
  Vec z = relabel_logits(example, presented, false, nullptr, cache);
  return z.unaryExpr([](double v) { return nn::sigmoid(v); });
}

namespace {

bool filter_tensor(const std::string& name) {
  return name.rfind("encoder.", 0) == 0 || name.rfind("filter.", 0) == 0;
}

bool relabel_tensor(const std::string& name) {
  return name.rfind("encoder.", 0) == 0 || name.rfind("relabel.", 0) == 0;
}

}  // namespace

void DenoiserModel::save_filter(const std::string& path) const {
  if (u_ == nullptr) throw ContractError("this denoiser has no filter head");
  nn::CheckpointHeader header;
  header.config_fingerprint = config_.fingerprint();
  header.vocab_fingerprint = vocab_->fingerprint();
  header.provenance = provenance_;
  nn::save_checkpoint(path, header, params_, filter_tensor);
}

void DenoiserModel::save_relabel(const std::string& path) const {
  if (relabel_W_ == nullptr) throw ContractError("this denoiser has no relabel head");
  nn::CheckpointHeader header;
  header.config_fingerprint = config_.fingerprint();
  header.vocab_fingerprint = vocab_->fingerprint();
  header.provenance = provenance_;
  nn::save_checkpoint(path, header, params_, relabel_tensor);
}

void DenoiserModel::load_filter(const std::string& path, bool force) {
  if (head_ != Head::kFilter) {
    throw ContractError("load_filter needs a filter-only model");
  }
  auto header = nn::load_checkpoint(path, params_, config_.fingerprint(),
                                    vocab_->fingerprint(), force);
  provenance_ = header.provenance;
}

void DenoiserModel::load_relabel(const std::string& path, bool force) {
  if (head_ != Head::kRelabel) {
    throw ContractError("load_relabel needs a relabel-only model");
  }
  auto header = nn::load_checkpoint(path, params_, config_.fingerprint(),
                                    vocab_->fingerprint(), force);
  provenance_ = header.provenance;
}

// ---------------------------------------------------------------------------
// Training
// ---------------------------------------------------------------------------

namespace {

struct HoldoutSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> holdout;
};

HoldoutSplit split_holdout(std::size_t n, double fraction, std::uint64_t seed) {
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng(derive_seed(seed, fnv1a64("holdout-split")));
  rng.shuffle(order);
  const auto holdout_n = static_cast<std::size_t>(fraction * static_cast<double>(n));
  HoldoutSplit split;
  split.holdout.assign(order.begin(), order.begin() + static_cast<long>(holdout_n));
  split.train.assign(order.begin() + static_cast<long>(holdout_n), order.end());
  if (split.train.empty()) {  // tiny datasets train on everything
    split.train = std::move(split.holdout);
    split.holdout.clear();
  }
  return split;
}

double filter_instance_loss(const DenoiserModel& model, const FilterInstance& instance) {
  DenoiserModel::Cache cache;
  const double z = model.filter_logit(instance.example, instance.presented_types,
                                      false, nullptr, cache);
  return nn::bce_logit(z, instance.corrupted ? 1.0 : 0.0);
}

double relabel_instance_loss(const DenoiserModel& model, const DropInstance& instance) {
  DenoiserModel::Cache cache;
  const Vec z = model.relabel_logits(instance.example, instance.noisy_types, false,
                                     nullptr, cache);
  return partitioned_loss_logits(z, instance.example.types, model.vocab());
}

// Shared epoch/early-stopping scaffold for the three denoiser trainers.
// step_epoch runs one epoch of updates; holdout_loss scores the held-out
// slice (lower is better).
template <typename StepEpoch, typename HoldoutLoss>
TrainResult run_epochs(DenoiserModel& model, const nn::TrainConfig& config,
                       bool has_holdout, StepEpoch&& step_epoch,
                       HoldoutLoss&& holdout_loss) {
  TrainResult result;
  auto best_values = model.params().snapshot_values();
  double best = std::numeric_limits<double>::infinity();
  int epochs_since_best = 0;

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    const double train_loss = step_epoch(epoch, result);
    TrainLogEntry entry;
    entry.epoch = epoch;
    entry.train_loss = train_loss;
    if (has_holdout) {
      entry.dev_metric = holdout_loss();
      entry.has_dev = true;
      if (entry.dev_metric < best) {
        best = entry.dev_metric;
        result.best_epoch = epoch;
        result.best_metric = best;
        best_values = model.params().snapshot_values();
        epochs_since_best = 0;
      } else if (++epochs_since_best >= config.patience) {
        result.log.push_back(entry);
        break;
      }
    }
    result.log.push_back(entry);
    if (config.max_steps > 0 && result.steps >= config.max_steps) break;
  }
  if (has_holdout && result.best_epoch >= 0) {
    model.params().restore_values(best_values);
  }
  return result;
}

}  // namespace

TrainResult train_filter(DenoiserModel& model,
                         const std::vector<FilterInstance>& instances,
                         const nn::TrainConfig& config) {
  config.validate();
  if (instances.empty()) throw ContractError("train_filter: no instances");
  model.train_config() = config;
  model.params().initialize(derive_seed(config.seed, fnv1a64("denoiser-init")));

  const auto split = split_holdout(instances.size(), config.holdout_fraction,
                                   config.seed);
  Rng rng(derive_seed(config.seed, fnv1a64("filter-train")));
  nn::AdamOptimizer adam(config);

  auto train_order = split.train;
  auto step_epoch = [&](int epoch, TrainResult& result) {
    rng.shuffle(train_order);
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < train_order.size();
         start += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t end = std::min(
          train_order.size(), start + static_cast<std::size_t>(config.batch_size));
      const auto batch_n = static_cast<double>(end - start);
      model.params().zero_grads();
      for (std::size_t k = start; k < end; ++k) {
        const FilterInstance& instance = instances[train_order[k]];
        DenoiserModel::Cache cache;
        const double z = model.filter_logit(instance.example, instance.presented_types,
                                            true, &rng, cache);
        const double y = instance.corrupted ? 1.0 : 0.0;
        const double loss = nn::bce_logit(z, y);
        if (!std::isfinite(loss)) {
          throw std::runtime_error("train_filter: non-finite loss at epoch " +
                                   std::to_string(epoch));
        }
        loss_sum += loss;
        model.filter_backward(cache, (nn::sigmoid(z) - y) / batch_n);
      }
      adam.step(model.params());
      ++result.steps;
      if (config.max_steps > 0 && result.steps >= config.max_steps) break;
    }
    return train_order.empty() ? 0.0 : loss_sum / static_cast<double>(train_order.size());
  };
  auto holdout_loss = [&]() {
    double sum = 0.0;
    for (std::size_t idx : split.holdout) sum += filter_instance_loss(model, instances[idx]);
    return sum / static_cast<double>(split.holdout.size());
  };
  return run_epochs(model, config, !split.holdout.empty(), step_epoch, holdout_loss);
}

TrainResult train_relabel(DenoiserModel& model,
                          const std::vector<DropInstance>& instances,
                          const nn::TrainConfig& config) {
  config.validate();
  if (instances.empty()) throw ContractError("train_relabel: no instances");
  model.train_config() = config;
  model.params().initialize(derive_seed(config.seed, fnv1a64("denoiser-init")));

  const auto split = split_holdout(instances.size(), config.holdout_fraction,
                                   config.seed);
  Rng rng(derive_seed(config.seed, fnv1a64("relabel-train")));
  nn::AdamOptimizer adam(config);

  auto train_order = split.train;
  auto step_epoch = [&](int epoch, TrainResult& result) {
    rng.shuffle(train_order);
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < train_order.size();
         start += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t end = std::min(
          train_order.size(), start + static_cast<std::size_t>(config.batch_size));
      const auto batch_n = static_cast<double>(end - start);
      model.params().zero_grads();
      for (std::size_t k = start; k < end; ++k) {
        const DropInstance& instance = instances[train_order[k]];
        DenoiserModel::Cache cache;
        const Vec z = model.relabel_logits(instance.example, instance.noisy_types,
                                           true, &rng, cache);
        Vec grad;
        const double loss =
            partitioned_loss_logits(z, instance.example.types, model.vocab(), &grad);
        if (!std::isfinite(loss)) {
          throw std::runtime_error("train_relabel: non-finite loss at epoch " +
                                   std::to_string(epoch));
        }
        loss_sum += loss;
        grad /= batch_n;
        model.relabel_backward(cache, grad);
      }
      adam.step(model.params());
      ++result.steps;
      if (config.max_steps > 0 && result.steps >= config.max_steps) break;
    }
    return train_order.empty() ? 0.0 : loss_sum / static_cast<double>(train_order.size());
  };
  auto holdout_loss = [&]() {
    double sum = 0.0;
    for (std::size_t idx : split.holdout) sum += relabel_instance_loss(model, instances[idx]);
    return sum / static_cast<double>(split.holdout.size());
  };
  return run_epochs(model, config, !split.holdout.empty(), step_epoch, holdout_loss);
}

TrainResult train_denoiser(DenoiserModel& model,
                           const std::vector<FilterInstance>& error_instances,
                           const std::vector<DropInstance>& drop_instances,
                           const nn::TrainConfig& config) {
  config.validate();
  if (model.head() != DenoiserModel::Head::kBoth) {
    throw ContractError("train_denoiser needs a model with both heads");
  }
  if (error_instances.empty() || drop_instances.empty()) {
    throw ContractError("train_denoiser: both instance sets must be non-empty");
  }
  model.train_config() = config;
  model.params().initialize(derive_seed(config.seed, fnv1a64("denoiser-init")));

  const auto filter_split = split_holdout(error_instances.size(),
                                          config.holdout_fraction, config.seed);
  const auto relabel_split = split_holdout(drop_instances.size(),
                                           config.holdout_fraction, config.seed + 1);
  Rng rng(derive_seed(config.seed, fnv1a64("denoiser-train")));
  nn::AdamOptimizer adam(config);

  auto filter_order = filter_split.train;
  auto relabel_order = relabel_split.train;
  const auto batch = static_cast<std::size_t>(config.batch_size);

  auto step_epoch = [&](int epoch, TrainResult& result) {
    rng.shuffle(filter_order);
    rng.shuffle(relabel_order);
    double loss_sum = 0.0;
    std::size_t fpos = 0, rpos = 0;
    // Alternate filter and relabel batches so the shared encoder sees both
    // objectives throughout the epoch.
    while (fpos < filter_order.size() || rpos < relabel_order.size()) {
      if (fpos < filter_order.size()) {
        const std::size_t end = std::min(filter_order.size(), fpos + batch);
        const auto batch_n = static_cast<double>(end - fpos);
        model.params().zero_grads();
        for (; fpos < end; ++fpos) {
          const FilterInstance& instance = error_instances[filter_order[fpos]];
          DenoiserModel::Cache cache;
          const double z = model.filter_logit(instance.example,
                                              instance.presented_types, true, &rng,
                                              cache);
          const double y = instance.corrupted ? 1.0 : 0.0;
          const double loss = nn::bce_logit(z, y);
          if (!std::isfinite(loss)) {
            throw std::runtime_error("train_denoiser: non-finite filter loss at epoch " +
                                     std::to_string(epoch));
          }
          loss_sum += loss;
          model.filter_backward(cache, (nn::sigmoid(z) - y) / batch_n);
        }
        adam.step(model.params());
        ++result.steps;
      }
      if (rpos < relabel_order.size()) {
        const std::size_t end = std::min(relabel_order.size(), rpos + batch);
        const auto batch_n = static_cast<double>(end - rpos);
        model.params().zero_grads();
        for (; rpos < end; ++rpos) {
          const DropInstance& instance = drop_instances[relabel_order[rpos]];
          DenoiserModel::Cache cache;
          const Vec z = model.relabel_logits(instance.example, instance.noisy_types,
                                             true, &rng, cache);
          Vec grad;
          const double loss =
              partitioned_loss_logits(z, instance.example.types, model.vocab(), &grad);
          if (!std::isfinite(loss)) {
            throw std::runtime_error(
                "train_denoiser: non-finite relabel loss at epoch " +
                std::to_string(epoch));
          }
          loss_sum += loss;
          grad /= batch_n;
          model.relabel_backward(cache, grad);
        }
        adam.step(model.params());
        ++result.steps;
      }
    }
    const auto total = static_cast<double>(filter_order.size() + relabel_order.size());
    return total > 0 ? loss_sum / total : 0.0;
  };

  const bool has_holdout =
      !filter_split.holdout.empty() && !relabel_split.holdout.empty();
  auto holdout_loss = [&]() {
    double sum = 0.0;
    for (std::size_t idx : filter_split.holdout) {
      sum += filter_instance_loss(model, error_instances[idx]);
    }
    double fsum = sum / static_cast<double>(filter_split.holdout.size());
    sum = 0.0;
    for (std::size_t idx : relabel_split.holdout) {
      sum += relabel_instance_loss(model, drop_instances[idx]);
    }
    return fsum + sum / static_cast<double>(relabel_split.holdout.size());
  };
  return run_epochs(model, config, has_holdout, step_epoch, holdout_loss);
}

// ---------------------------------------------------------------------------
// Application
// ---------------------------------------------------------------------------

FilterSplit apply_filter(const Dataset& distant, const DenoiserModel& model,
                         double threshold) {
  FilterSplit split;
  split.kept.vocabulary = distant.vocabulary;
  split.kept.provenance = distant.provenance;
  split.discarded.vocabulary = distant.vocabulary;
  split.discarded.provenance = distant.provenance + "+discarded";
  for (const auto& example : distant.examples) {
    const double p = model.filter_score(example, example.types);
    if (p > threshold) {
      split.discarded.examples.push_back(example);
    } else {
      split.kept.examples.push_back(example);
    }
  }
  return split;
}

Dataset apply_relabel(const Dataset& kept, const DenoiserModel& model,
                      double threshold, int min_types, DenoiseLog* log) {
  if (min_types < 0) throw ValidationError("min_types must be non-negative");
  Dataset out;
  out.vocabulary = kept.vocabulary;
  out.provenance = "denoised";
  for (const auto& example : kept.examples) {
    const Vec scores = model.relabel_scores(example, example.types);
    std::vector<TypeId> relabeled;
    for (Eigen::Index i = 0; i < scores.size(); ++i) {
      if (scores[i] > threshold) relabeled.push_back(static_cast<TypeId>(i));
    }
    DenoiseRecord record;
    record.id = example.id;
    record.p_error = 0.0;
    record.kept = true;
    record.old_types = example.types;
    if (relabeled.size() >= static_cast<std::size_t>(min_types)) {
      Example updated = example;
      updated.types = relabeled;
      out.examples.push_back(std::move(updated));
      record.new_types = std::move(relabeled);
    }
    if (log != nullptr) log->records.push_back(std::move(record));
  }
  return out;
}

Dataset denoise(const Dataset& distant, const DenoiserModel& filter,
                const DenoiserModel& relabel, DenoiseLog& log,
                double filter_threshold, double relabel_threshold, int min_types) {
  const std::string& vocab_fp = distant.vocabulary->fingerprint();
  if (filter.vocab().fingerprint() != vocab_fp ||
      relabel.vocab().fingerprint() != vocab_fp) {
    throw ValidationError(
        "denoise: filter/relabel models and data disagree on the vocabulary "
        "fingerprint");
  }

  Dataset out;
  out.vocabulary = distant.vocabulary;
  out.provenance = "denoised";
  for (const auto& example : distant.examples) {
    DenoiseRecord record;
    record.id = example.id;
    record.old_types = example.types;
    record.p_error = filter.filter_score(example, example.types);
    record.kept = !(record.p_error > filter_threshold);
    if (record.kept) {
      const Vec scores = relabel.relabel_scores(example, example.types);
      std::vector<TypeId> relabeled;
      for (Eigen::Index i = 0; i < scores.size(); ++i) {
        if (scores[i] > relabel_threshold) relabeled.push_back(static_cast<TypeId>(i));
      }
      if (relabeled.size() >= static_cast<std::size_t>(min_types)) {
        Example updated = example;
        updated.types = relabeled;
        out.examples.push_back(std::move(updated));
        record.new_types = std::move(relabeled);
      }
    }
    log.records.push_back(std::move(record));
  }
  return out;
}

}  // namespace etd
