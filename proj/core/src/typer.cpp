#include "etd/typer.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include <nlohmann/json.hpp>

#include "etd/nn/checkpoint.hpp"

namespace etd {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

std::vector<TypeId> predict_types(const Vec& scores, double threshold) {
  if (scores.size() == 0) throw ContractError("predict_types: empty score vector");
  std::vector<TypeId> out;
  for (Eigen::Index i = 0; i < scores.size(); ++i) {
    if (scores[i] > threshold) out.push_back(static_cast<TypeId>(i));
  }
  if (out.empty()) {
    Eigen::Index best = 0;
    for (Eigen::Index i = 1; i < scores.size(); ++i) {
      if (scores[i] > scores[best]) best = i;  // ties keep the lowest index
    }
    out.push_back(static_cast<TypeId>(best));
  }
  return out;
}

namespace {

std::array<bool, 3> active_tiers(const std::vector<TypeId>& gold,
                                 const TypeVocabulary& vocab) {
  std::array<bool, 3> active = {false, false, false};
  for (TypeId id : gold) active[static_cast<std::size_t>(vocab.tier(id))] = true;
  return active;
}

}  // namespace

double partitioned_loss(const Vec& probabilities, const std::vector<TypeId>& gold_types,
                        const TypeVocabulary& vocab) {
  if (gold_types.empty()) throw ContractError("partitioned_loss: empty gold set");
  if (probabilities.size() != static_cast<Eigen::Index>(vocab.size())) {
    throw ContractError("partitioned_loss: score width != vocabulary size");
  }
  const auto active = active_tiers(gold_types, vocab);
  double loss = 0.0;
  for (Eigen::Index i = 0; i < probabilities.size(); ++i) {
    const auto id = static_cast<TypeId>(i);
    if (!active[static_cast<std::size_t>(vocab.tier(id))]) continue;
    const double y =
        std::binary_search(gold_types.begin(), gold_types.end(), id) ? 1.0 : 0.0;
    loss += nn::bce_prob(probabilities[i], y);
  }
  return loss;
}

double partitioned_loss_logits(const Vec& logits, const std::vector<TypeId>& gold_types,
                               const TypeVocabulary& vocab, Vec* grad) {
  if (gold_types.empty()) throw ContractError("partitioned_loss: empty gold set");
  if (logits.size() != static_cast<Eigen::Index>(vocab.size())) {
    throw ContractError("partitioned_loss: logit width != vocabulary size");
  }
  const auto active = active_tiers(gold_types, vocab);
  if (grad != nullptr) *grad = Vec::Zero(logits.size());
  double loss = 0.0;
  for (Eigen::Index i = 0; i < logits.size(); ++i) {
    const auto id = static_cast<TypeId>(i);
    if (!active[static_cast<std::size_t>(vocab.tier(id))]) continue;
    const double y =
        std::binary_search(gold_types.begin(), gold_types.end(), id) ? 1.0 : 0.0;
    loss += nn::bce_logit(logits[i], y);
    if (grad != nullptr) (*grad)[i] = nn::sigmoid(logits[i]) - y;
  }
  return loss;
}

// ---------------------------------------------------------------------------
// TypingModel
// ---------------------------------------------------------------------------

TypingModel::TypingModel(EncoderConfig config, std::shared_ptr<const TypeVocabulary> vocab,
                         const EmbeddingTable* word_table,
                         const ContextualVectorStore* store)
    : config_(config), vocab_(std::move(vocab)) {
  if (config_.use_contextual) {
    if (store == nullptr) {
      throw ValidationError("typing model: contextual mode needs a vector store");
    }
    config_.d_emb = store->dimension();
    config_.contextual_layers = store->layer_count();
  } else {
    if (word_table == nullptr) {
      throw ValidationError("typing model: static mode needs an embedding table");
    }
    config_.d_emb = word_table->dimension();
  }
  if (config_.d_def_word == 0 && word_table != nullptr) {
    config_.d_def_word = word_table->dimension();
  }
  config_.validate();

  if (config_.use_contextual) {
    provider_ = std::make_unique<ContextualTokenProvider>(
        params_, "encoder.mention.mix", store, config_.contextual_layers);
  } else {
    provider_ = std::make_unique<StaticTokenProvider>(word_table);
  }
  mention_ = std::make_unique<MentionEncoder>(params_, config_);
  decoder_ = &params_.add("typer.E", static_cast<Eigen::Index>(vocab_->size()),
                          config_.mention_dim());
  params_.initialize(derive_seed(train_config_.seed, fnv1a64("typer-init")));
}

Vec TypingModel::logits(const Example& example, bool train, Rng* rng,
                        Cache& cache) const {
  cache.v_m = mention_->forward(example, *provider_, train, train_config_.dropout_embed,
                                train_config_.dropout_mention, rng, cache.mention);
  return decoder_->value * cache.v_m;
}

void TypingModel::backward(Cache& cache, const Vec& dLogits) {
  decoder_->grad.noalias() += dLogits * cache.v_m.transpose();
  Vec dV = decoder_->value.transpose() * dLogits;
  mention_->backward(*provider_, cache.mention, dV);
}

Vec TypingModel::scores(const Example& example) const {
  Cache cache;
  Vec z = logits(example, false, nullptr, cache);
  return z.unaryExpr([](double v) { return nn::sigmoid(v); });
}

std::vector<TypeId> TypingModel::predict(const Example& example, double threshold) const {
  return predict_types(scores(example), threshold);
}

void TypingModel::save(const std::string& path) const {
  nn::CheckpointHeader header;
  header.config_fingerprint = config_.fingerprint();
  header.vocab_fingerprint = vocab_->fingerprint();
  header.provenance = provenance_;
  nn::save_checkpoint(path, header, params_);
}

void TypingModel::load(const std::string& path, bool force) {
  auto header = nn::load_checkpoint(path, params_, config_.fingerprint(),
                                    vocab_->fingerprint(), force);
  provenance_ = header.provenance;
}

// ---------------------------------------------------------------------------
// Training
// ---------------------------------------------------------------------------

std::string TrainResult::to_json() const {
  ordered_json obj;
  obj["best_epoch"] = best_epoch;
  obj["best_metric"] = best_metric;
  obj["steps"] = steps;
  ordered_json entries = ordered_json::array();
  for (const auto& entry : log) {
    ordered_json e;
    e["epoch"] = entry.epoch;
    e["train_loss"] = entry.train_loss;
    if (entry.has_dev) e["dev_metric"] = entry.dev_metric;
    entries.push_back(e);
  }
  obj["epochs"] = entries;
  return obj.dump(2) + "\n";
}

TypeSetMap dataset_type_map(const Dataset& dataset) {
  TypeSetMap map;
  for (const auto& example : dataset.examples) {
    if (!map.emplace(example.id, example.types).second) {
      throw ContractError("dataset repeats id: " + example.id);
    }
  }
  return map;
}

TrainResult train_typer(TypingModel& model, const Dataset& gold,
                        const Dataset* augment, const Dataset* dev,
                        const nn::TrainConfig& config) {
  config.validate();
  if (gold.examples.empty()) throw ContractError("train_typer: empty gold dataset");
  const std::string vocab_fp = model.vocab().fingerprint();
  for (const Dataset* ds : {&gold, augment, dev}) {
    if (ds != nullptr && ds->vocabulary->fingerprint() != vocab_fp) {
      throw ValidationError("train_typer: datasets bound to a different vocabulary");
    }
  }
  model.train_config() = config;
  model.params().initialize(derive_seed(config.seed, fnv1a64("typer-init")));

  std::vector<const Example*> pool;
  for (const auto& example : gold.examples) pool.push_back(&example);
  if (augment != nullptr) {
    for (const auto& example : augment->examples) pool.push_back(&example);
  }

  TypeSetMap dev_gold;
  if (dev != nullptr) dev_gold = dataset_type_map(*dev);

  Rng rng(derive_seed(config.seed, fnv1a64("typer-train")));
  nn::AdamOptimizer adam(config);
  TrainResult result;
  auto best_values = model.params().snapshot_values();
  int epochs_since_best = 0;

  std::vector<std::size_t> order(pool.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  bool step_capped = false;
  for (int epoch = 1; epoch <= config.epochs && !step_capped; ++epoch) {
    rng.shuffle(order);
    double loss_sum = 0.0;
    std::size_t seen = 0;
    for (std::size_t start = 0; start < order.size() && !step_capped;
         start += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t end =
          std::min(order.size(), start + static_cast<std::size_t>(config.batch_size));
      const auto batch_n = static_cast<double>(end - start);
      model.params().zero_grads();
      for (std::size_t k = start; k < end; ++k) {
        const Example& example = *pool[order[k]];
        TypingModel::Cache cache;
        Vec z = model.logits(example, true, &rng, cache);
        Vec grad;
        const double loss = partitioned_loss_logits(z, example.types,
                                                    model.vocab(), &grad);
        if (!std::isfinite(loss)) {
          throw std::runtime_error("train_typer: non-finite loss at epoch " +
                                   std::to_string(epoch));
        }
        loss_sum += loss;
        ++seen;
        grad /= batch_n;
        model.backward(cache, grad);
      }
      adam.step(model.params());
      ++result.steps;
      if (config.max_steps > 0 && result.steps >= config.max_steps) step_capped = true;
    }

    TrainLogEntry entry;
    entry.epoch = epoch;
    entry.train_loss = seen > 0 ? loss_sum / static_cast<double>(seen) : 0.0;

    if (dev != nullptr) {
      TypeSetMap predictions;
      for (const auto& example : dev->examples) {
        predictions.emplace(example.id, model.predict(example));
      }
      const PrfScores scores = macro_prf(predictions, dev_gold, model.vocab());
      entry.dev_metric = scores.f1;
      entry.has_dev = true;
      if (result.best_epoch < 0 || scores.f1 > result.best_metric) {
        result.best_metric = scores.f1;
        result.best_epoch = epoch;
        best_values = model.params().snapshot_values();
        epochs_since_best = 0;
      } else if (++epochs_since_best >= config.patience) {
        result.log.push_back(entry);
        break;
      }
    }
    result.log.push_back(entry);
  }

  if (dev != nullptr && result.best_epoch >= 0) {
    model.params().restore_values(best_values);
  }
  return result;
}

// ---------------------------------------------------------------------------
// Prediction dumps
// ---------------------------------------------------------------------------

void write_predictions(const TypingModel& model, const Dataset& dataset,
                       const std::string& path, int topk, double threshold) {
  const TypeVocabulary& vocab = model.vocab();
  std::string out;
  for (const auto& example : dataset.examples) {
    const Vec scores = model.scores(example);
    const auto predicted = predict_types(scores, threshold);

    std::vector<TypeId> ranked(static_cast<std::size_t>(scores.size()));
    for (std::size_t i = 0; i < ranked.size(); ++i) ranked[i] = static_cast<TypeId>(i);
    std::stable_sort(ranked.begin(), ranked.end(), [&](TypeId a, TypeId b) {
      return scores[a] > scores[b];
    });
    const auto k = std::min<std::size_t>(ranked.size(),
                                         static_cast<std::size_t>(std::max(topk, 0)));

    ordered_json obj;
    obj["id"] = example.id;
    obj["pred_types"] = to_type_names(predicted, vocab);
    ordered_json top = ordered_json::array();
    for (std::size_t i = 0; i < k; ++i) {
      top.push_back(ordered_json::array({vocab.name(ranked[i]), scores[ranked[i]]}));
    }
    obj["scores_topk"] = top;
    out += obj.dump();
    out += '\n';
  }
  write_file(path, out);
}

TypeSetMap load_predictions(const std::string& path, const TypeVocabulary& vocab) {
  TypeSetMap map;
  std::istringstream in(read_file(path));
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      json obj = json::parse(line);
      const std::string id = obj.at("id").get<std::string>();
      auto types =
          to_type_ids(obj.at("pred_types").get<std::vector<std::string>>(), vocab);
      if (!map.emplace(id, std::move(types)).second) {
        throw ValidationError("duplicate prediction id: " + id);
      }
    } catch (const ValidationError&) {
      throw;
    } catch (const std::exception& err) {
      throw ValidationError(path + ":" + std::to_string(line_no) +
                            ": parse error: " + err.what());
    }
  }
  return map;
}

}  // namespace etd
