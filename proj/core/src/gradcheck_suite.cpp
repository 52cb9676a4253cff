#include "etd/gradcheck_suite.hpp"

#include "etd/denoiser.hpp"
#include "etd/synthetic.hpp"

namespace etd {

namespace {

SyntheticSpec reduced_spec() {
  SyntheticSpec spec;
  spec.n_general = 2;
  spec.n_fine = 4;
  spec.n_ultra = 6;  // vocabulary of 12
  spec.n_profiles = 4;
  spec.profile_generals = 1;
  spec.profile_fines = 2;
  spec.profile_ultras = 3;
  spec.n_gold = 8;
  spec.n_distant = 0;
  spec.embedding_dim = 10;
  return spec;
}

EncoderConfig reduced_encoder() {
  EncoderConfig config;
  config.d_hid = 8;
  config.d_type = 8;
  config.d_loc = 4;
  config.char_embed = 6;
  config.char_filters = 5;
  config.char_width = 3;
  config.d_def = 8;
  return config;
}

/// Two random layers per example, stored-record shapes matching the corpus.
ContextualVectorStore make_store(const Dataset& dataset, int dimension,
                                 std::uint64_t seed) {
  std::map<std::string, ContextualVectorStore::Record> records;
  for (std::size_t i = 0; i < dataset.examples.size(); ++i) {
    const Example& example = dataset.examples[i];
    Rng rng(derive_seed(seed, fnv1a64("store"), i));
    ContextualVectorStore::Record record;
    record.layers.resize(2);
    for (auto& layer : record.layers) {
      layer.resize(example.sentence_length(), Vec(dimension));
      for (auto& vec : layer) {
        for (int d = 0; d < dimension; ++d) vec[d] = rng.uniform(-0.5, 0.5);
      }
    }
    records.emplace(example.id, std::move(record));
  }
  return ContextualVectorStore(2, dimension, std::move(records));
}

/// Random values everywhere (biases included) so no gradient path sits at a
/// symmetric zero.
void randomize(nn::ParameterSet& params, std::uint64_t seed) {
  for (auto& [name, tensor] : params.tensors()) {
    Rng rng(derive_seed(seed, fnv1a64(name)));
    const double bound = 0.4;
    for (Eigen::Index r = 0; r < tensor.value.rows(); ++r) {
      for (Eigen::Index c = 0; c < tensor.value.cols(); ++c) {
        tensor.value(r, c) = rng.uniform(-bound, bound);
      }
    }
  }
}

}  // namespace

StandardGradChecks run_standard_grad_checks(double tolerance, double fd_step) {
  const SyntheticSpec spec = reduced_spec();
  const SyntheticBundle bundle = generate_synthetic_corpus(spec, 20240229);
  const DefinitionMap definitions(
      *bundle.vocabulary,
      std::unordered_map<std::string, std::vector<std::string>>(
          bundle.definitions.begin(), bundle.definitions.end()));
  const ContextualVectorStore store = make_store(bundle.gold, 10, 7);

  Dataset batch;
  batch.vocabulary = bundle.vocabulary;
  batch.provenance = "gold";
  batch.examples.assign(bundle.gold.examples.begin(), bundle.gold.examples.begin() + 4);

  const auto error_instances = make_error_dataset(batch, 0.5, 11);
  const auto drop_instances = make_drop_dataset(batch, 0.5, 13);

  StandardGradChecks out;

  {
    EncoderConfig config = reduced_encoder();
    config.use_contextual = true;
    DenoiserModel model(config, bundle.vocabulary, DenoiserModel::Head::kFilter,
                        &bundle.embeddings, &definitions, &store);
    randomize(model.params(), 101);
    auto loss = [&]() {
      double sum = 0.0;
      for (const auto& instance : error_instances) {
        DenoiserModel::Cache cache;
        const double z = model.filter_logit(instance.example, instance.presented_types,
                                            false, nullptr, cache);
        sum += nn::bce_logit(z, instance.corrupted ? 1.0 : 0.0);
      }
      return sum / static_cast<double>(error_instances.size());
    };
    auto grads = [&]() {
      model.params().zero_grads();
      const auto n = static_cast<double>(error_instances.size());
      for (const auto& instance : error_instances) {
        DenoiserModel::Cache cache;
        const double z = model.filter_logit(instance.example, instance.presented_types,
                                            false, nullptr, cache);
        const double y = instance.corrupted ? 1.0 : 0.0;
        model.filter_backward(cache, (nn::sigmoid(z) - y) / n);
      }
    };
    out.filter = nn::grad_check(model.params(), loss, grads, tolerance, fd_step);
  }

  {
    DenoiserModel model(reduced_encoder(), bundle.vocabulary,
                        DenoiserModel::Head::kRelabel, &bundle.embeddings,
                        &definitions);
    randomize(model.params(), 202);
    auto loss = [&]() {
      double sum = 0.0;
      for (const auto& instance : drop_instances) {
        DenoiserModel::Cache cache;
        const Vec z = model.relabel_logits(instance.example, instance.noisy_types,
                                           false, nullptr, cache);
        sum += partitioned_loss_logits(z, instance.example.types, model.vocab());
      }
      return sum / static_cast<double>(drop_instances.size());
    };
    auto grads = [&]() {
      model.params().zero_grads();
      const auto n = static_cast<double>(drop_instances.size());
      for (const auto& instance : drop_instances) {
        DenoiserModel::Cache cache;
        const Vec z = model.relabel_logits(instance.example, instance.noisy_types,
                                           false, nullptr, cache);
        Vec grad;
        partitioned_loss_logits(z, instance.example.types, model.vocab(), &grad);
        grad /= n;
        model.relabel_backward(cache, grad);
      }
    };
    out.relabel = nn::grad_check(model.params(), loss, grads, tolerance, fd_step);
  }

  {
    TypingModel model(reduced_encoder(), bundle.vocabulary, &bundle.embeddings);
    randomize(model.params(), 303);
    auto loss = [&]() {
      double sum = 0.0;
      for (const auto& example : batch.examples) {
        TypingModel::Cache cache;
        const Vec z = model.logits(example, false, nullptr, cache);
        sum += partitioned_loss_logits(z, example.types, model.vocab());
      }
      return sum / static_cast<double>(batch.examples.size());
    };
    auto grads = [&]() {
      model.params().zero_grads();
      const auto n = static_cast<double>(batch.examples.size());
      for (const auto& example : batch.examples) {
        TypingModel::Cache cache;
        const Vec z = model.logits(example, false, nullptr, cache);
        Vec grad;
        partitioned_loss_logits(z, example.types, model.vocab(), &grad);
        grad /= n;
        model.backward(cache, grad);
      }
    };
    out.typer = nn::grad_check(model.params(), loss, grads, tolerance, fd_step);
  }

  out.passed = out.filter.passed && out.relabel.passed && out.typer.passed;
  return out;
}

}  // namespace etd
