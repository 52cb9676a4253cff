#include "etd/config.hpp"

#include <cctype>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>

#include <nlohmann/json.hpp>

namespace etd {

using ordered_json = nlohmann::ordered_json;

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double out = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return out;
  } catch (const std::exception&) {
    throw ValidationError("config: bad number for " + key + ": '" + value + "'");
  }
}

long parse_int(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const long out = std::stol(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return out;
  } catch (const std::exception&) {
    throw ValidationError("config: bad integer for " + key + ": '" + value + "'");
  }
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw ValidationError("config: bad boolean for " + key + ": '" + value + "'");
}

std::string format_double(double value) {
  std::ostringstream out;
  out.precision(17);
  out << value;
  return out.str();
}

}  // namespace

void RunConfig::set(const std::string& dotted_key, const std::string& value) {
  using Setter = std::function<void(RunConfig&, const std::string&)>;
  auto str = [](std::string RunConfig::*field) {
    return Setter([field](RunConfig& c, const std::string&v) { c.*field = v; });
  };

  static const std::map<std::string, Setter> setters = {
      {"paths.tier_general", str(&RunConfig::tier_general)},
      {"paths.tier_fine", str(&RunConfig::tier_fine)},
      {"paths.tier_ultra", str(&RunConfig::tier_ultra)},
      {"paths.embeddings", str(&RunConfig::embeddings)},
      {"paths.definitions", str(&RunConfig::definitions)},
      {"paths.contextual_store", str(&RunConfig::contextual_store)},
      {"paths.lexicon", str(&RunConfig::lexicon)},
      {"paths.onto_mapping", str(&RunConfig::onto_mapping)},

      {"encoder.d_emb", [](RunConfig& c, const std::string& v) { c.encoder.d_emb = static_cast<int>(parse_int("encoder.d_emb", v)); }},
      {"encoder.d_loc", [](RunConfig& c, const std::string& v) { c.encoder.d_loc = static_cast<int>(parse_int("encoder.d_loc", v)); }},
      {"encoder.d_hid", [](RunConfig& c, const std::string& v) { c.encoder.d_hid = static_cast<int>(parse_int("encoder.d_hid", v)); }},
      {"encoder.char_embed", [](RunConfig& c, const std::string& v) { c.encoder.char_embed = static_cast<int>(parse_int("encoder.char_embed", v)); }},
      {"encoder.char_filters", [](RunConfig& c, const std::string& v) { c.encoder.char_filters = static_cast<int>(parse_int("encoder.char_filters", v)); }},
      {"encoder.char_width", [](RunConfig& c, const std::string& v) { c.encoder.char_width = static_cast<int>(parse_int("encoder.char_width", v)); }},
      {"encoder.char_max_len", [](RunConfig& c, const std::string& v) { c.encoder.char_max_len = static_cast<int>(parse_int("encoder.char_max_len", v)); }},
      {"encoder.d_type", [](RunConfig& c, const std::string& v) { c.encoder.d_type = static_cast<int>(parse_int("encoder.d_type", v)); }},
      {"encoder.d_def", [](RunConfig& c, const std::string& v) { c.encoder.d_def = static_cast<int>(parse_int("encoder.d_def", v)); }},
      {"encoder.d_def_word", [](RunConfig& c, const std::string& v) { c.encoder.d_def_word = static_cast<int>(parse_int("encoder.d_def_word", v)); }},
      {"encoder.use_contextual", [](RunConfig& c, const std::string& v) { c.encoder.use_contextual = parse_bool("encoder.use_contextual", v); }},
      {"encoder.contextual_layers", [](RunConfig& c, const std::string& v) { c.encoder.contextual_layers = static_cast<int>(parse_int("encoder.contextual_layers", v)); }},

      {"train.batch_size", [](RunConfig& c, const std::string& v) { c.train.batch_size = static_cast<int>(parse_int("train.batch_size", v)); }},
      {"train.learning_rate", [](RunConfig& c, const std::string& v) { c.train.learning_rate = parse_double("train.learning_rate", v); }},
      {"train.adam_beta1", [](RunConfig& c, const std::string& v) { c.train.adam_beta1 = parse_double("train.adam_beta1", v); }},
      {"train.adam_beta2", [](RunConfig& c, const std::string& v) { c.train.adam_beta2 = parse_double("train.adam_beta2", v); }},
      {"train.adam_epsilon", [](RunConfig& c, const std::string& v) { c.train.adam_epsilon = parse_double("train.adam_epsilon", v); }},
      {"train.epochs", [](RunConfig& c, const std::string& v) { c.train.epochs = static_cast<int>(parse_int("train.epochs", v)); }},
      {"train.max_steps", [](RunConfig& c, const std::string& v) { c.train.max_steps = parse_int("train.max_steps", v); }},
      {"train.dropout_embed", [](RunConfig& c, const std::string& v) { c.train.dropout_embed = parse_double("train.dropout_embed", v); }},
      {"train.dropout_mention", [](RunConfig& c, const std::string& v) { c.train.dropout_mention = parse_double("train.dropout_mention", v); }},
      {"train.seed", [](RunConfig& c, const std::string& v) { c.train.seed = static_cast<std::uint64_t>(parse_int("train.seed", v)); }},
      {"train.patience", [](RunConfig& c, const std::string& v) { c.train.patience = static_cast<int>(parse_int("train.patience", v)); }},
      {"train.holdout_fraction", [](RunConfig& c, const std::string& v) { c.train.holdout_fraction = parse_double("train.holdout_fraction", v); }},

      {"noising.error_fraction", [](RunConfig& c, const std::string& v) { c.error_fraction = parse_double("noising.error_fraction", v); }},
      {"noising.drop_rate", [](RunConfig& c, const std::string& v) { c.drop_rate = parse_double("noising.drop_rate", v); }},

      {"denoise.filter_threshold", [](RunConfig& c, const std::string& v) { c.filter_threshold = parse_double("denoise.filter_threshold", v); }},
      {"denoise.relabel_threshold", [](RunConfig& c, const std::string& v) { c.relabel_threshold = parse_double("denoise.relabel_threshold", v); }},
      {"denoise.min_types", [](RunConfig& c, const std::string& v) { c.min_types = static_cast<int>(parse_int("denoise.min_types", v)); }},
      {"denoise.training", [](RunConfig& c, const std::string& v) {
         if (v != "joint" && v != "separate") {
           throw ValidationError("config: denoise.training must be joint or separate");
         }
         c.denoiser_training = v;
       }},

      {"heuristics.pair_threshold", [](RunConfig& c, const std::string& v) { c.pair_threshold = parse_double("heuristics.pair_threshold", v); }},
      {"heuristics.pair_min_support", [](RunConfig& c, const std::string& v) { c.pair_min_support = static_cast<int>(parse_int("heuristics.pair_min_support", v)); }},
      {"heuristics.overlap_discard_on_miss", [](RunConfig& c, const std::string& v) { c.overlap_discard_on_miss = parse_bool("heuristics.overlap_discard_on_miss", v); }},

      {"predict.topk", [](RunConfig& c, const std::string& v) { c.predict_topk = static_cast<int>(parse_int("predict.topk", v)); }},
      {"predict.threshold", [](RunConfig& c, const std::string& v) { c.predict_threshold = parse_double("predict.threshold", v); }},

      {"synthetic.n_general", [](RunConfig& c, const std::string& v) { c.synthetic.n_general = static_cast<int>(parse_int("synthetic.n_general", v)); }},
      {"synthetic.n_fine", [](RunConfig& c, const std::string& v) { c.synthetic.n_fine = static_cast<int>(parse_int("synthetic.n_fine", v)); }},
      {"synthetic.n_ultra", [](RunConfig& c, const std::string& v) { c.synthetic.n_ultra = static_cast<int>(parse_int("synthetic.n_ultra", v)); }},
      {"synthetic.n_profiles", [](RunConfig& c, const std::string& v) { c.synthetic.n_profiles = static_cast<int>(parse_int("synthetic.n_profiles", v)); }},
      {"synthetic.profile_generals", [](RunConfig& c, const std::string& v) { c.synthetic.profile_generals = static_cast<int>(parse_int("synthetic.profile_generals", v)); }},
      {"synthetic.profile_fines", [](RunConfig& c, const std::string& v) { c.synthetic.profile_fines = static_cast<int>(parse_int("synthetic.profile_fines", v)); }},
      {"synthetic.profile_ultras", [](RunConfig& c, const std::string& v) { c.synthetic.profile_ultras = static_cast<int>(parse_int("synthetic.profile_ultras", v)); }},
      {"synthetic.p_general", [](RunConfig& c, const std::string& v) { c.synthetic.p_general = parse_double("synthetic.p_general", v); }},
      {"synthetic.p_fine", [](RunConfig& c, const std::string& v) { c.synthetic.p_fine = parse_double("synthetic.p_fine", v); }},
      {"synthetic.p_ultra", [](RunConfig& c, const std::string& v) { c.synthetic.p_ultra = parse_double("synthetic.p_ultra", v); }},
      {"synthetic.n_gold", [](RunConfig& c, const std::string& v) { c.synthetic.n_gold = static_cast<int>(parse_int("synthetic.n_gold", v)); }},
      {"synthetic.n_distant", [](RunConfig& c, const std::string& v) { c.synthetic.n_distant = static_cast<int>(parse_int("synthetic.n_distant", v)); }},
      {"synthetic.p_wrong", [](RunConfig& c, const std::string& v) { c.synthetic.p_wrong = parse_double("synthetic.p_wrong", v); }},
      {"synthetic.p_miss", [](RunConfig& c, const std::string& v) { c.synthetic.p_miss = parse_double("synthetic.p_miss", v); }},
      {"synthetic.min_context", [](RunConfig& c, const std::string& v) { c.synthetic.min_context = static_cast<int>(parse_int("synthetic.min_context", v)); }},
      {"synthetic.max_context", [](RunConfig& c, const std::string& v) { c.synthetic.max_context = static_cast<int>(parse_int("synthetic.max_context", v)); }},
      {"synthetic.max_mention", [](RunConfig& c, const std::string& v) { c.synthetic.max_mention = static_cast<int>(parse_int("synthetic.max_mention", v)); }},
      {"synthetic.embedding_dim", [](RunConfig& c, const std::string& v) { c.synthetic.embedding_dim = static_cast<int>(parse_int("synthetic.embedding_dim", v)); }},
  };

  auto it = setters.find(dotted_key);
  if (it == setters.end()) {
    throw ValidationError("config: unknown key: " + dotted_key);
  }
  it->second(*this, value);
}

void RunConfig::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config: " + path);
  std::string line;
  std::string section;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string text = trim(line);
    if (text.empty() || text[0] == '#' || text[0] == ';') continue;
    if (text.front() == '[') {
      if (text.back() != ']') {
        throw ValidationError(path + ":" + std::to_string(line_no) + ": bad section");
      }
      section = trim(text.substr(1, text.size() - 2));
      continue;
    }
    const auto eq = text.find('=');
    if (eq == std::string::npos) {
      throw ValidationError(path + ":" + std::to_string(line_no) +
                            ": expected key = value");
    }
    const std::string key = trim(text.substr(0, eq));
    const std::string value = trim(text.substr(eq + 1));
    if (section.empty()) {
      throw ValidationError(path + ":" + std::to_string(line_no) +
                            ": key outside any section");
    }
    try {
      set(section + "." + key, value);
    } catch (const ValidationError& err) {
      throw ValidationError(path + ":" + std::to_string(line_no) + ": " + err.what());
    }
  }
}

void RunConfig::validate() const {
  for (const std::string* path :
       {&tier_general, &tier_fine, &tier_ultra, &embeddings, &definitions,
        &contextual_store, &lexicon, &onto_mapping}) {
    if (!path->empty() && !std::filesystem::exists(*path)) {
      throw ValidationError("config: path does not exist: " + *path);
    }
  }
  train.validate();
  synthetic.validate();
  if (error_fraction < 0.0 || error_fraction > 1.0) {
    throw ValidationError("noising.error_fraction must be in [0, 1]");
  }
  if (drop_rate < 0.0 || drop_rate >= 1.0) {
    throw ValidationError("noising.drop_rate must be in [0, 1)");
  }
  if (min_types < 0) throw ValidationError("denoise.min_types must be >= 0");
  if (pair_threshold < 0.0 || pair_threshold >= 1.0) {
    throw ValidationError("heuristics.pair_threshold must be in [0, 1)");
  }
  if (predict_topk < 0) throw ValidationError("predict.topk must be >= 0");
}

std::string RunConfig::canonical() const {
  std::ostringstream out;
  auto emit = [&](const std::string& key, const std::string& value) {
    out << key << "=" << value << "\n";
  };
  emit("denoise.filter_threshold", format_double(filter_threshold));
  emit("denoise.min_types", std::to_string(min_types));
  emit("denoise.relabel_threshold", format_double(relabel_threshold));
  emit("denoise.training", denoiser_training);
  emit("encoder.char_embed", std::to_string(encoder.char_embed));
  emit("encoder.char_filters", std::to_string(encoder.char_filters));
  emit("encoder.char_max_len", std::to_string(encoder.char_max_len));
  emit("encoder.char_width", std::to_string(encoder.char_width));
  emit("encoder.contextual_layers", std::to_string(encoder.contextual_layers));
  emit("encoder.d_def", std::to_string(encoder.d_def));
  emit("encoder.d_def_word", std::to_string(encoder.d_def_word));
  emit("encoder.d_emb", std::to_string(encoder.d_emb));
  emit("encoder.d_hid", std::to_string(encoder.d_hid));
  emit("encoder.d_loc", std::to_string(encoder.d_loc));
  emit("encoder.d_type", std::to_string(encoder.d_type));
  emit("encoder.use_contextual", encoder.use_contextual ? "true" : "false");
  emit("heuristics.overlap_discard_on_miss", overlap_discard_on_miss ? "true" : "false");
  emit("heuristics.pair_min_support", std::to_string(pair_min_support));
  emit("heuristics.pair_threshold", format_double(pair_threshold));
  emit("noising.drop_rate", format_double(drop_rate));
  emit("noising.error_fraction", format_double(error_fraction));
  emit("paths.contextual_store", contextual_store);
  emit("paths.definitions", definitions);
  emit("paths.embeddings", embeddings);
  emit("paths.lexicon", lexicon);
  emit("paths.onto_mapping", onto_mapping);
  emit("paths.tier_fine", tier_fine);
  emit("paths.tier_general", tier_general);
  emit("paths.tier_ultra", tier_ultra);
  emit("predict.threshold", format_double(predict_threshold));
  emit("predict.topk", std::to_string(predict_topk));
  emit("synthetic.embedding_dim", std::to_string(synthetic.embedding_dim));
  emit("synthetic.max_context", std::to_string(synthetic.max_context));
  emit("synthetic.max_mention", std::to_string(synthetic.max_mention));
  emit("synthetic.min_context", std::to_string(synthetic.min_context));
  emit("synthetic.n_distant", std::to_string(synthetic.n_distant));
  emit("synthetic.n_fine", std::to_string(synthetic.n_fine));
  emit("synthetic.n_general", std::to_string(synthetic.n_general));
  emit("synthetic.n_gold", std::to_string(synthetic.n_gold));
  emit("synthetic.n_profiles", std::to_string(synthetic.n_profiles));
  emit("synthetic.n_ultra", std::to_string(synthetic.n_ultra));
  emit("synthetic.p_fine", format_double(synthetic.p_fine));
  emit("synthetic.p_general", format_double(synthetic.p_general));
  emit("synthetic.p_miss", format_double(synthetic.p_miss));
  emit("synthetic.p_ultra", format_double(synthetic.p_ultra));
  emit("synthetic.p_wrong", format_double(synthetic.p_wrong));
  emit("synthetic.profile_fines", std::to_string(synthetic.profile_fines));
  emit("synthetic.profile_generals", std::to_string(synthetic.profile_generals));
  emit("synthetic.profile_ultras", std::to_string(synthetic.profile_ultras));
  emit("train.adam_beta1", format_double(train.adam_beta1));
  emit("train.adam_beta2", format_double(train.adam_beta2));
  emit("train.adam_epsilon", format_double(train.adam_epsilon));
  emit("train.batch_size", std::to_string(train.batch_size));
  emit("train.dropout_embed", format_double(train.dropout_embed));
  emit("train.dropout_mention", format_double(train.dropout_mention));
  emit("train.epochs", std::to_string(train.epochs));
  emit("train.holdout_fraction", format_double(train.holdout_fraction));
  emit("train.learning_rate", format_double(train.learning_rate));
  emit("train.max_steps", std::to_string(train.max_steps));
  emit("train.patience", std::to_string(train.patience));
  emit("train.seed", std::to_string(train.seed));
  return out.str();
}

std::string RunConfig::fingerprint() const { return etd::fingerprint(canonical()); }

// ---------------------------------------------------------------------------
// Manifest
// ---------------------------------------------------------------------------

Manifest::Manifest(std::string command, const RunConfig& config, std::uint64_t seed)
    : command_(std::move(command)),
      config_canonical_(config.canonical()),
      config_fingerprint_(config.fingerprint()),
      seed_(seed) {}

void Manifest::add_input(const std::string& path) {
  inputs_[path] = fingerprint_file(path);
}

void Manifest::add_output(const std::string& path) {
  outputs_[path] = fingerprint_file(path);
}

void Manifest::write(const std::string& path) const {
  ordered_json obj;
  obj["command"] = command_;
  obj["seed"] = seed_;
  obj["config_fingerprint"] = config_fingerprint_;
  if (!vocab_fingerprint_.empty()) obj["vocab_fingerprint"] = vocab_fingerprint_;

  ordered_json config = ordered_json::object();
  std::istringstream lines(config_canonical_);
  std::string line;
  while (std::getline(lines, line)) {
    const auto eq = line.find('=');
    if (eq != std::string::npos) config[line.substr(0, eq)] = line.substr(eq + 1);
  }
  obj["config"] = config;
  obj["inputs"] = inputs_;
  obj["outputs"] = outputs_;
  write_file(path, obj.dump(2) + "\n");
}

}  // namespace etd
