#include "etd/cli.hpp"

#include <filesystem>
#include <iostream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "etd/config.hpp"
#include "etd/corpus.hpp"
#include "etd/denoiser.hpp"
#include "etd/gradcheck_suite.hpp"
#include "etd/heuristics.hpp"
#include "etd/synthetic.hpp"
#include "etd/typer.hpp"

namespace etd {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace {

struct CommonOpts {
  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int epochs = 0;
};

void add_common(CLI::App* cmd, CommonOpts& opts, bool needs_out = true) {
  cmd->add_option("--config", opts.config_path, "INI configuration file")
      ->check(CLI::ExistingFile);
  auto* out = cmd->add_option("--out", opts.out_dir, "output directory");
  if (needs_out) out->required();
  cmd->add_option_function<std::uint64_t>(
      "--seed",
      [&opts](const std::uint64_t& value) {
        opts.seed = value;
        opts.seed_set = true;
      },
      "seed override (defaults to train.seed)");
}

void add_epochs(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--epochs", opts.epochs, "epoch-count override");
}

RunConfig load_config(const CommonOpts& opts) {
  RunConfig config;
  if (!opts.config_path.empty()) config.load_file(opts.config_path);
  if (opts.seed_set) config.train.seed = opts.seed;
  if (opts.epochs > 0) config.train.epochs = opts.epochs;
  return config;
}

void ensure_out(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ValidationError("cannot create output directory: " + dir);
}

std::shared_ptr<const TypeVocabulary> vocab_from(const RunConfig& config) {
  if (config.tier_general.empty() || config.tier_fine.empty() ||
      config.tier_ultra.empty()) {
    throw ValidationError(
        "paths.tier_general/tier_fine/tier_ultra must be set in the config");
  }
  return std::make_shared<TypeVocabulary>(
      build_vocabulary(config.tier_general, config.tier_fine, config.tier_ultra));
}

struct Resources {
  EmbeddingTable embeddings;
  DefinitionMap definitions;
  std::unique_ptr<ContextualVectorStore> store;
};

Resources load_resources(const RunConfig& config, const TypeVocabulary& vocab) {
  Resources res;
  if (config.embeddings.empty()) {
    throw ValidationError("paths.embeddings must be set for model commands");
  }
  res.embeddings = load_embeddings(config.embeddings);
  res.definitions = config.definitions.empty()
                        ? DefinitionMap::empty(vocab)
                        : load_definitions(config.definitions, vocab);
  if (config.encoder.use_contextual) {
    if (config.contextual_store.empty()) {
      throw ValidationError(
          "encoder.use_contextual needs paths.contextual_store");
    }
    res.store =
        std::make_unique<ContextualVectorStore>(load_contextual_store(config.contextual_store));
  }
  return res;
}

struct DatasetOpts {
  std::string format = "canonical";
  std::string source = "gold";
  std::string unknown_types = "auto";
};

void add_dataset_opts(CLI::App* cmd, DatasetOpts& opts) {
  cmd->add_option("--format", opts.format, "input format")
      ->check(CLI::IsMember({"canonical", "choi"}));
  cmd->add_option("--source", opts.source, "default source for imported lines")
      ->check(CLI::IsMember({"gold", "el", "head"}));
  cmd->add_option("--unknown-types", opts.unknown_types,
                  "unknown-type policy (auto: strict for gold, else permissive)")
      ->check(CLI::IsMember({"auto", "strict", "permissive"}));
}

Dataset load_dataset_cli(const std::string& path, const DatasetOpts& opts,
                         std::shared_ptr<const TypeVocabulary> vocab,
                         LoadReport* report_out = nullptr) {
  const DataFormat format =
      opts.format == "choi" ? DataFormat::kChoi : DataFormat::kCanonical;
  const Source source = source_from_name(opts.source);
  UnknownTypePolicy policy;
  if (opts.unknown_types == "strict") {
    policy = UnknownTypePolicy::kStrict;
  } else if (opts.unknown_types == "permissive") {
    policy = UnknownTypePolicy::kPermissive;
  } else {
    policy = source == Source::kGold ? UnknownTypePolicy::kStrict
                                     : UnknownTypePolicy::kPermissive;
  }
  auto result = load_dataset(path, format, std::move(vocab), policy, source);
  if (result.report.dropped_unknown_types > 0 || result.report.dropped_empty_types > 0) {
    std::cerr << "load " << path << ": dropped "
              << result.report.dropped_unknown_types << " unknown types, "
              << result.report.dropped_empty_types << " unusable lines\n";
  }
  if (report_out != nullptr) *report_out = result.report;
  return std::move(result.dataset);
}

void write_train_log(const TrainResult& result, const std::string& path) {
  write_file(path, result.to_json());
}

int dispatch(const std::vector<std::string>& args);

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  try {
    return dispatch(args);
  } catch (const ValidationError& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 1;
  } catch (const std::exception& err) {
    std::cerr << "failure: " << err.what() << "\n";
    return 2;
  }
}

namespace {

int dispatch(const std::vector<std::string>& args) {
  CLI::App app{"denoising pipeline for distantly labeled entity typing data"};
  app.require_subcommand(1);

  // ---- gen-synthetic ------------------------------------------------------
  auto* gen = app.add_subcommand("gen-synthetic",
                                 "generate a synthetic gold/distant/truth corpus "
                                 "with its resources");
  CommonOpts gen_opts;
  add_common(gen, gen_opts);
  gen->callback([&]() {
    RunConfig config = load_config(gen_opts);
    config.validate();
    ensure_out(gen_opts.out_dir);
    const auto bundle = generate_synthetic_corpus(config.synthetic, config.train.seed);
    write_synthetic_bundle(bundle, gen_opts.out_dir);

    Manifest manifest("gen-synthetic", config, config.train.seed);
    manifest.set_vocab_fingerprint(bundle.vocabulary->fingerprint());
    for (const char* name :
         {"general.txt", "fine.txt", "ultra.txt", "gold.jsonl", "distant.jsonl",
          "truth.jsonl", "embeddings.txt", "definitions.jsonl", "lexicon.jsonl",
          "onto_mapping.jsonl"}) {
      manifest.add_output(gen_opts.out_dir + "/" + name);
    }
    for (const char* name : {"gold.jsonl", "distant.jsonl", "truth.jsonl"}) {
      write_dataset_meta(gen_opts.out_dir + "/" + name,
                         bundle.vocabulary->fingerprint(), config.fingerprint(),
                         name == std::string("gold.jsonl") ? "gold" : "distant");
    }
    manifest.write(gen_opts.out_dir + "/manifest.json");
    std::cout << "gold " << bundle.gold.size() << ", distant "
              << bundle.distant.size() << " -> " << gen_opts.out_dir << "\n";
  });

  // ---- noise --------------------------------------------------------------
  auto* noise = app.add_subcommand(
      "noise", "build the synthetic filter/relabel training sets from gold data");
  CommonOpts noise_opts;
  add_common(noise, noise_opts);
  std::string noise_mode;
  std::string noise_in;
  double noise_fraction = -1.0;
  double noise_rate = -1.0;
  noise->add_option("--mode", noise_mode, "error (type swap) or drop (type deletion)")
      ->required()
      ->check(CLI::IsMember({"error", "drop"}));
  noise->add_option("--in", noise_in, "gold dataset (canonical JSONL)")
      ->required()
      ->check(CLI::ExistingFile);
  noise->add_option("--fraction", noise_fraction, "error mode: corrupted fraction");
  noise->add_option("--rate", noise_rate, "drop mode: per-type deletion rate");
  noise->callback([&]() {
    RunConfig config = load_config(noise_opts);
    if (noise_fraction >= 0.0) config.error_fraction = noise_fraction;
    if (noise_rate >= 0.0) config.drop_rate = noise_rate;
    config.validate();
    ensure_out(noise_opts.out_dir);
    auto vocab = vocab_from(config);
    auto gold = load_dataset_cli(noise_in, DatasetOpts{}, vocab);

    Manifest manifest("noise-" + noise_mode, config, config.train.seed);
    manifest.set_vocab_fingerprint(vocab->fingerprint());
    manifest.add_input(noise_in);

    ordered_json stats_json;
    std::string out_path;
    if (noise_mode == "error") {
      ErrorDatasetStats stats;
      const auto instances =
          make_error_dataset(gold, config.error_fraction, config.train.seed, &stats);
      out_path = noise_opts.out_dir + "/error.jsonl";
      write_error_dataset(instances, *vocab, out_path);
      stats_json["positives"] = stats.positives;
      stats_json["negatives"] = stats.negatives;
      stats_json["demoted"] = stats.demoted;
      std::cout << "error set: " << stats.positives << " positives / "
                << instances.size() << " instances\n";
    } else {
      DropDatasetStats stats;
      const auto instances =
          make_drop_dataset(gold, config.drop_rate, config.train.seed, &stats);
      out_path = noise_opts.out_dir + "/drop.jsonl";
      write_drop_dataset(instances, *vocab, out_path);
      stats_json["slots"] = stats.slots;
      stats_json["dropped_pre_restore"] = stats.dropped_pre_restore;
      stats_json["restored"] = stats.restored;
      std::cout << "drop set: " << stats.dropped_pre_restore << "/" << stats.slots
                << " slots dropped\n";
    }
    write_file(noise_opts.out_dir + "/noise_stats.json", stats_json.dump(2) + "\n");
    manifest.add_output(out_path);
    manifest.add_output(noise_opts.out_dir + "/noise_stats.json");
    manifest.write(noise_opts.out_dir + "/manifest.json");
  });

  // ---- train-filter / train-relabel ---------------------------------------
  struct DenoiserTrainOpts {
    CommonOpts common;
    std::string error_path;
    std::string drop_path;
  };

  auto run_denoiser_training = [](const std::string& command,
                                  const DenoiserTrainOpts& opts) {
    RunConfig config = load_config(opts.common);
    config.validate();
    ensure_out(opts.common.out_dir);
    auto vocab = vocab_from(config);
    auto resources = load_resources(config, *vocab);

    Manifest manifest(command, config, config.train.seed);
    manifest.set_vocab_fingerprint(vocab->fingerprint());

    const bool joint = !opts.error_path.empty() && !opts.drop_path.empty();
    if (joint && config.denoiser_training != "joint") {
      throw ValidationError(
          "both --error and --drop were given but denoise.training=separate");
    }

    std::vector<FilterInstance> error_instances;
    std::vector<DropInstance> drop_instances;
    if (!opts.error_path.empty()) {
      error_instances = load_error_dataset(opts.error_path, vocab);
      manifest.add_input(opts.error_path);
    }
    if (!opts.drop_path.empty()) {
      drop_instances = load_drop_dataset(opts.drop_path, vocab);
      manifest.add_input(opts.drop_path);
    }

    TrainResult result;
    if (joint) {
      DenoiserModel model(config.encoder, vocab, DenoiserModel::Head::kBoth,
                          &resources.embeddings, &resources.definitions,
                          resources.store.get());
      model.set_provenance("synthetic-error+drop");
      result = train_denoiser(model, error_instances, drop_instances, config.train);
      model.save_filter(opts.common.out_dir + "/filter.ckpt");
      model.save_relabel(opts.common.out_dir + "/relabel.ckpt");
      manifest.add_output(opts.common.out_dir + "/filter.ckpt");
      manifest.add_output(opts.common.out_dir + "/relabel.ckpt");
    } else if (!opts.error_path.empty()) {
      DenoiserModel model(config.encoder, vocab, DenoiserModel::Head::kFilter,
                          &resources.embeddings, &resources.definitions,
                          resources.store.get());
      model.set_provenance("synthetic-error");
      result = train_filter(model, error_instances, config.train);
      model.save_filter(opts.common.out_dir + "/filter.ckpt");
      manifest.add_output(opts.common.out_dir + "/filter.ckpt");
    } else {
      DenoiserModel model(config.encoder, vocab, DenoiserModel::Head::kRelabel,
                          &resources.embeddings, &resources.definitions,
                          resources.store.get());
      model.set_provenance("synthetic-drop");
      result = train_relabel(model, drop_instances, config.train);
      model.save_relabel(opts.common.out_dir + "/relabel.ckpt");
      manifest.add_output(opts.common.out_dir + "/relabel.ckpt");
    }
    write_train_log(result, opts.common.out_dir + "/train_log.json");
    manifest.add_output(opts.common.out_dir + "/train_log.json");
    manifest.write(opts.common.out_dir + "/manifest.json");
    std::cout << command << ": " << result.log.size() << " epochs, best epoch "
              << result.best_epoch << "\n";
  };

  auto* train_filter_cmd = app.add_subcommand(
      "train-filter", "train the filtering function on a type-swap set "
                      "(add --drop to train both heads jointly)");
  DenoiserTrainOpts tf_opts;
  add_common(train_filter_cmd, tf_opts.common);
  add_epochs(train_filter_cmd, tf_opts.common);
  train_filter_cmd->add_option("--error", tf_opts.error_path, "error instances")
      ->required()
      ->check(CLI::ExistingFile);
  train_filter_cmd->add_option("--drop", tf_opts.drop_path,
                               "drop instances (enables joint training)")
      ->check(CLI::ExistingFile);
  train_filter_cmd->callback([&]() { run_denoiser_training("train-filter", tf_opts); });

  auto* train_relabel_cmd = app.add_subcommand(
      "train-relabel", "train the relabeling function on a type-drop set "
                       "(add --error to train both heads jointly)");
  DenoiserTrainOpts tr_opts;
  add_common(train_relabel_cmd, tr_opts.common);
  add_epochs(train_relabel_cmd, tr_opts.common);
  train_relabel_cmd->add_option("--drop", tr_opts.drop_path, "drop instances")
      ->required()
      ->check(CLI::ExistingFile);
  train_relabel_cmd->add_option("--error", tr_opts.error_path,
                                "error instances (enables joint training)")
      ->check(CLI::ExistingFile);
  train_relabel_cmd->callback(
      [&]() { run_denoiser_training("train-relabel", tr_opts); });

  // ---- denoise --------------------------------------------------------------
  auto* denoise_cmd =
      app.add_subcommand("denoise", "filter then relabel a distant dataset");
  CommonOpts dn_opts;
  add_common(denoise_cmd, dn_opts);
  std::string dn_in, dn_filter, dn_relabel;
  bool dn_force = false;
  DatasetOpts dn_data;
  dn_data.source = "el";
  denoise_cmd->add_option("--in", dn_in, "distant dataset")->required()->check(CLI::ExistingFile);
  denoise_cmd->add_option("--filter", dn_filter, "filter checkpoint")->required()->check(CLI::ExistingFile);
  denoise_cmd->add_option("--relabel", dn_relabel, "relabel checkpoint")->required()->check(CLI::ExistingFile);
  denoise_cmd->add_flag("--force", dn_force, "ignore fingerprint mismatches");
  add_dataset_opts(denoise_cmd, dn_data);
  denoise_cmd->callback([&]() {
    RunConfig config = load_config(dn_opts);
    config.validate();
    ensure_out(dn_opts.out_dir);
    auto vocab = vocab_from(config);
    auto resources = load_resources(config, *vocab);
    auto distant = load_dataset_cli(dn_in, dn_data, vocab);

    DenoiserModel filter(config.encoder, vocab, DenoiserModel::Head::kFilter,
                         &resources.embeddings, &resources.definitions,
                         resources.store.get());
    filter.load_filter(dn_filter, dn_force);
    DenoiserModel relabel(config.encoder, vocab, DenoiserModel::Head::kRelabel,
                          &resources.embeddings, &resources.definitions,
                          resources.store.get());
    relabel.load_relabel(dn_relabel, dn_force);

    DenoiseLog log;
    Dataset denoised = denoise(distant, filter, relabel, log,
                               config.filter_threshold, config.relabel_threshold,
                               config.min_types);
    const std::string out_data = dn_opts.out_dir + "/denoised.jsonl";
    const std::string out_log = dn_opts.out_dir + "/denoise_log.jsonl";
    write_dataset(denoised, out_data);
    write_dataset_meta(out_data, vocab->fingerprint(), config.fingerprint(),
                       "denoised");
    write_denoise_log(log, *vocab, out_log);

    Manifest manifest("denoise", config, config.train.seed);
    manifest.set_vocab_fingerprint(vocab->fingerprint());
    manifest.add_input(dn_in);
    manifest.add_input(dn_filter);
    manifest.add_input(dn_relabel);
    manifest.add_output(out_data);
    manifest.add_output(out_log);
    manifest.write(dn_opts.out_dir + "/manifest.json");
    std::cout << "denoise: " << distant.size() << " in, " << denoised.size()
              << " out (" << log.filter_discards() << " filtered, "
              << log.relabel_discards() << " under min-types)\n";
  });

  // ---- heuristic-denoise ----------------------------------------------------
  auto* heur = app.add_subcommand("heuristic-denoise",
                                  "apply a non-learned denoising baseline");
  CommonOpts heur_opts;
  add_common(heur, heur_opts);
  std::string heur_in, heur_method, heur_gold, heur_model;
  DatasetOpts heur_data;
  heur_data.source = "el";
  heur->add_option("--in", heur_in, "distant dataset")->required()->check(CLI::ExistingFile);
  heur->add_option("--method", heur_method, "synhyper | pairs | overlap")
      ->required()
      ->check(CLI::IsMember({"synhyper", "pairs", "overlap"}));
  heur->add_option("--gold", heur_gold, "gold dataset (pairs)")->check(CLI::ExistingFile);
  heur->add_option("--model", heur_model, "gold-only typer checkpoint (overlap)")
      ->check(CLI::ExistingFile);
  add_dataset_opts(heur, heur_data);
  heur->callback([&]() {
    RunConfig config = load_config(heur_opts);
    config.validate();
    ensure_out(heur_opts.out_dir);
    auto vocab = vocab_from(config);
    auto distant = load_dataset_cli(heur_in, heur_data, vocab);

    Manifest manifest("heuristic-" + heur_method, config, config.train.seed);
    manifest.set_vocab_fingerprint(vocab->fingerprint());
    manifest.add_input(heur_in);

    Dataset result;
    if (heur_method == "synhyper") {
      if (config.lexicon.empty()) {
        throw ValidationError("synhyper needs paths.lexicon in the config");
      }
      const TypeLexicon lexicon = load_lexicon(config.lexicon, *vocab);
      manifest.add_input(config.lexicon);
      result = apply_lexical(distant, lexicon);
    } else if (heur_method == "pairs") {
      if (heur_gold.empty()) throw ValidationError("pairs needs --gold");
      auto gold = load_dataset_cli(heur_gold, DatasetOpts{}, vocab);
      manifest.add_input(heur_gold);
      const PairTable table =
          build_pair_table(gold, config.pair_threshold,
                           static_cast<std::size_t>(config.pair_min_support));
      write_pair_table(table, *vocab, heur_opts.out_dir + "/pair_table.jsonl");
      manifest.add_output(heur_opts.out_dir + "/pair_table.jsonl");
      result = apply_pairs(distant, table);
    } else {
      if (heur_model.empty()) throw ValidationError("overlap needs --model");
      auto resources = load_resources(config, *vocab);
      TypingModel model(config.encoder, vocab, &resources.embeddings,
                        resources.store.get());
      model.load(heur_model);
      manifest.add_input(heur_model);
      result = overlap_denoise(distant, model, config.overlap_discard_on_miss);
    }

    const std::string out_data = heur_opts.out_dir + "/denoised.jsonl";
    write_dataset(result, out_data);
    write_dataset_meta(out_data, vocab->fingerprint(), config.fingerprint(),
                       result.provenance);
    manifest.add_output(out_data);
    manifest.write(heur_opts.out_dir + "/manifest.json");
    std::cout << "heuristic " << heur_method << ": " << result.size()
              << " examples\n";
  });

  // ---- train-typer ----------------------------------------------------------
  auto* tt = app.add_subcommand("train-typer",
                                "train the typing model on gold (+ augmentation)");
  CommonOpts tt_opts;
  add_common(tt, tt_opts);
  add_epochs(tt, tt_opts);
  std::string tt_gold, tt_augment, tt_dev;
  DatasetOpts tt_augment_data;
  tt_augment_data.source = "el";
  tt->add_option("--gold", tt_gold, "gold dataset")->required()->check(CLI::ExistingFile);
  tt->add_option("--augment", tt_augment, "augmentation dataset")->check(CLI::ExistingFile);
  tt->add_option("--dev", tt_dev, "dev dataset for early stopping")->check(CLI::ExistingFile);
  add_dataset_opts(tt, tt_augment_data);
  tt->callback([&]() {
    RunConfig config = load_config(tt_opts);
    config.validate();
    ensure_out(tt_opts.out_dir);
    auto vocab = vocab_from(config);
    auto resources = load_resources(config, *vocab);

    auto gold = load_dataset_cli(tt_gold, DatasetOpts{}, vocab);
    std::unique_ptr<Dataset> augment;
    if (!tt_augment.empty()) {
      augment = std::make_unique<Dataset>(
          load_dataset_cli(tt_augment, tt_augment_data, vocab));
    }
    std::unique_ptr<Dataset> dev;
    if (!tt_dev.empty()) {
      dev = std::make_unique<Dataset>(load_dataset_cli(tt_dev, DatasetOpts{}, vocab));
    }

    TypingModel model(config.encoder, vocab, &resources.embeddings,
                      resources.store.get());
    const TrainResult result =
        train_typer(model, gold, augment.get(), dev.get(), config.train);
    model.set_provenance(augment ? "gold+augment" : "gold");
    model.save(tt_opts.out_dir + "/typer.ckpt");
    write_train_log(result, tt_opts.out_dir + "/train_log.json");

    Manifest manifest("train-typer", config, config.train.seed);
    manifest.set_vocab_fingerprint(vocab->fingerprint());
    manifest.add_input(tt_gold);
    if (!tt_augment.empty()) manifest.add_input(tt_augment);
    if (!tt_dev.empty()) manifest.add_input(tt_dev);
    manifest.add_output(tt_opts.out_dir + "/typer.ckpt");
    manifest.add_output(tt_opts.out_dir + "/train_log.json");
    manifest.write(tt_opts.out_dir + "/manifest.json");
    std::cout << "train-typer: best epoch " << result.best_epoch << " (dev F1 "
              << result.best_metric << ")\n";
  });

  // ---- predict ---------------------------------------------------------------
  auto* pred = app.add_subcommand("predict", "dump typing predictions");
  CommonOpts pred_opts;
  add_common(pred, pred_opts);
  std::string pred_in, pred_model;
  DatasetOpts pred_data;
  pred->add_option("--in", pred_in, "dataset")->required()->check(CLI::ExistingFile);
  pred->add_option("--model", pred_model, "typer checkpoint")->required()->check(CLI::ExistingFile);
  add_dataset_opts(pred, pred_data);
  pred->callback([&]() {
    RunConfig config = load_config(pred_opts);
    config.validate();
    ensure_out(pred_opts.out_dir);
    auto vocab = vocab_from(config);
    auto resources = load_resources(config, *vocab);
    auto data = load_dataset_cli(pred_in, pred_data, vocab);

    TypingModel model(config.encoder, vocab, &resources.embeddings,
                      resources.store.get());
    model.load(pred_model);
    const std::string out_path = pred_opts.out_dir + "/predictions.jsonl";
    write_predictions(model, data, out_path, config.predict_topk,
                      config.predict_threshold);

    Manifest manifest("predict", config, config.train.seed);
    manifest.set_vocab_fingerprint(vocab->fingerprint());
    manifest.add_input(pred_in);
    manifest.add_input(pred_model);
    manifest.add_output(out_path);
    manifest.write(pred_opts.out_dir + "/manifest.json");
    std::cout << "predict: " << data.size() << " examples -> " << out_path << "\n";
  });

  // ---- evaluate ---------------------------------------------------------------
  auto* eval = app.add_subcommand("evaluate", "macro P/R/F1 of a prediction dump");
  CommonOpts eval_opts;
  add_common(eval, eval_opts);
  std::string eval_pred, eval_gold;
  eval->add_option("--pred", eval_pred, "prediction dump")->required()->check(CLI::ExistingFile);
  eval->add_option("--gold", eval_gold, "gold dataset")->required()->check(CLI::ExistingFile);
  eval->callback([&]() {
    RunConfig config = load_config(eval_opts);
    config.validate();
    ensure_out(eval_opts.out_dir);
    auto vocab = vocab_from(config);
    auto gold = load_dataset_cli(eval_gold, DatasetOpts{}, vocab);
    const auto predictions = load_predictions(eval_pred, *vocab);
    const auto report = full_metric_report(predictions, dataset_type_map(gold), *vocab);

    write_file(eval_opts.out_dir + "/metrics.json", report.to_json());
    std::cout << report.to_table("predictions");

    Manifest manifest("evaluate", config, config.train.seed);
    manifest.set_vocab_fingerprint(vocab->fingerprint());
    manifest.add_input(eval_pred);
    manifest.add_input(eval_gold);
    manifest.add_output(eval_opts.out_dir + "/metrics.json");
    manifest.write(eval_opts.out_dir + "/manifest.json");
  });

  // ---- analyze ----------------------------------------------------------------
  auto* ana = app.add_subcommand(
      "analyze", "per-tier added/deleted averages and the filter discard ratio");
  CommonOpts ana_opts;
  add_common(ana, ana_opts);
  std::string ana_before, ana_log;
  DatasetOpts ana_data;
  ana_data.source = "el";
  ana->add_option("--before", ana_before, "pre-denoise dataset")->required()->check(CLI::ExistingFile);
  ana->add_option("--log", ana_log, "denoise log")->required()->check(CLI::ExistingFile);
  add_dataset_opts(ana, ana_data);
  ana->callback([&]() {
    RunConfig config = load_config(ana_opts);
    config.validate();
    ensure_out(ana_opts.out_dir);
    auto vocab = vocab_from(config);
    auto before = load_dataset_cli(ana_before, ana_data, vocab);
    const DenoiseLog log = load_denoise_log(ana_log, *vocab);
    const AnalysisReport report = relabel_analysis(before, log, *vocab);

    write_file(ana_opts.out_dir + "/analysis.json", report.to_json());
    std::cout << report.to_table(before.provenance);

    Manifest manifest("analyze", config, config.train.seed);
    manifest.set_vocab_fingerprint(vocab->fingerprint());
    manifest.add_input(ana_before);
    manifest.add_input(ana_log);
    manifest.add_output(ana_opts.out_dir + "/analysis.json");
    manifest.write(ana_opts.out_dir + "/manifest.json");
  });

  // ---- project-onto -------------------------------------------------------------
  auto* proj = app.add_subcommand("project-onto",
                                  "project ultra-fine types onto OntoNotes paths");
  CommonOpts proj_opts;
  add_common(proj, proj_opts);
  std::string proj_in, proj_mapping;
  DatasetOpts proj_data;
  proj_data.source = "el";
  proj->add_option("--in", proj_in, "dataset")->required()->check(CLI::ExistingFile);
  proj->add_option("--mapping", proj_mapping, "mapping file (default: paths.onto_mapping)")
      ->check(CLI::ExistingFile);
  add_dataset_opts(proj, proj_data);
  proj->callback([&]() {
    RunConfig config = load_config(proj_opts);
    config.validate();
    ensure_out(proj_opts.out_dir);
    auto vocab = vocab_from(config);
    const std::string mapping_path =
        proj_mapping.empty() ? config.onto_mapping : proj_mapping;
    if (mapping_path.empty()) {
      throw ValidationError("project-onto needs --mapping or paths.onto_mapping");
    }
    const OntoMapping mapping = load_onto_mapping(mapping_path, *vocab);
    auto data = load_dataset_cli(proj_in, proj_data, vocab);
    const ProjectionResult result = project_ontonotes(data, mapping);

    const std::string out_data = proj_opts.out_dir + "/projected.jsonl";
    write_dataset(result.projected, out_data);
    ordered_json counts;
    counts["usable"] = result.usable;
    counts["dropped"] = result.dropped;
    counts["total"] = result.usable + result.dropped;
    write_file(proj_opts.out_dir + "/projection.json", counts.dump(2) + "\n");
    std::cout << result.accounting_line() << "\n";

    Manifest manifest("project-onto", config, config.train.seed);
    manifest.set_vocab_fingerprint(vocab->fingerprint());
    manifest.add_input(proj_in);
    manifest.add_input(mapping_path);
    manifest.add_output(out_data);
    manifest.add_output(proj_opts.out_dir + "/projection.json");
    manifest.write(proj_opts.out_dir + "/manifest.json");
  });

  // ---- grad-check ------------------------------------------------------------
  auto* gc = app.add_subcommand("grad-check",
                                "finite-difference check of all trained losses");
  CommonOpts gc_opts;
  add_common(gc, gc_opts, /*needs_out=*/false);
  double gc_tolerance = 1e-4;
  gc->add_option("--tolerance", gc_tolerance, "max relative error");
  gc->callback([&]() {
    const StandardGradChecks checks = run_standard_grad_checks(gc_tolerance);
    std::cout << "filter BCE loss\n" << checks.filter.to_string()
              << "relabel partitioned loss\n" << checks.relabel.to_string()
              << "typer partitioned loss\n" << checks.typer.to_string();
    if (!gc_opts.out_dir.empty()) {
      ensure_out(gc_opts.out_dir);
      ordered_json obj;
      obj["tolerance"] = gc_tolerance;
      obj["filter_max_rel_error"] = checks.filter.max_rel_error;
      obj["relabel_max_rel_error"] = checks.relabel.max_rel_error;
      obj["typer_max_rel_error"] = checks.typer.max_rel_error;
      obj["passed"] = checks.passed;
      write_file(gc_opts.out_dir + "/gradcheck.json", obj.dump(2) + "\n");
    }
    if (!checks.passed) throw std::runtime_error("gradient check failed");
  });

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? 0 : 1;
  }
  return 0;
}

}  // namespace

}  // namespace etd
