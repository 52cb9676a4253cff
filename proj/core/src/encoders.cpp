#include "etd/encoders.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <sstream>

namespace etd {

void EncoderConfig::validate() const {
  if (d_emb <= 0 || d_loc <= 0 || d_hid <= 0 || char_embed <= 0 ||
      char_filters <= 0 || char_width <= 0 || char_max_len <= 0 || d_type <= 0 ||
      d_def <= 0) {
    throw ValidationError("encoder sizes must be positive");
  }
  if (d_def % 2 != 0) {
    throw ValidationError("d_def must be even (bi-directional concatenation)");
  }
  if (char_width > char_max_len) {
    throw ValidationError("char_width must not exceed char_max_len");
  }
  if (use_contextual && contextual_layers <= 0) {
    throw ValidationError("contextual_layers must be positive");
  }
}

std::string EncoderConfig::fingerprint() const {
  std::ostringstream out;
  out << "d_emb=" << d_emb << ";d_loc=" << d_loc << ";d_hid=" << d_hid
      << ";char_embed=" << char_embed << ";char_filters=" << char_filters
      << ";char_width=" << char_width << ";char_max_len=" << char_max_len
      << ";d_type=" << d_type << ";d_def=" << d_def
      << ";d_def_word=" << resolved_def_word()
      << ";use_contextual=" << (use_contextual ? 1 : 0)
      << ";contextual_layers=" << contextual_layers;
  return etd::fingerprint(out.str());
}

int find_headword(const std::vector<std::string>& mention_tokens) {
  if (mention_tokens.empty()) throw ContractError("find_headword: empty mention");
  static const std::array<const char*, 7> boundaries = {"of", "in", "for", "at",
                                                        "on", "with", ","};
  auto lower = [](const std::string& s) {
    std::string out = s;
    for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
  };

  std::size_t end = mention_tokens.size();
  while (end > 0 && is_punctuation_token(mention_tokens[end - 1])) --end;
  if (end == 0) return static_cast<int>(mention_tokens.size()) - 1;  // all punctuation

  for (std::size_t i = 0; i < end; ++i) {
    const std::string token = lower(mention_tokens[i]);
    for (const char* boundary : boundaries) {
      if (token == boundary && i > 0) return static_cast<int>(i) - 1;
    }
  }
  for (std::size_t i = end; i-- > 0;) {
    if (!is_punctuation_token(mention_tokens[i])) return static_cast<int>(i);
  }
  return static_cast<int>(end) - 1;
}

// ---------------------------------------------------------------------------
// Providers
// ---------------------------------------------------------------------------

void StaticTokenProvider::forward(const Example& example, Batch& out) const {
  const auto tokens = example.sentence_tokens();
  out.vecs.clear();
  out.vecs.reserve(tokens.size());
  for (const auto& token : tokens) out.vecs.push_back(table_->lookup(token));
}

ContextualTokenProvider::ContextualTokenProvider(nn::ParameterSet& params,
                                                 const std::string& prefix,
                                                 const ContextualVectorStore* store,
                                                 int layer_count)
    : store_(store), mix_(params, prefix, layer_count) {}

void ContextualTokenProvider::forward(const Example& example, Batch& out) const {
  const auto& record = store_->lookup(example.id);
  if (record.layers.front().size() != example.sentence_length()) {
    throw ValidationError("contextual record for example " + example.id +
                          " has wrong token count");
  }
  out.vecs = mix_.run(record, out.mix_cache);
}

void ContextualTokenProvider::backward(Batch& batch,
                                       const std::vector<Vec>& dVecs) const {
  mix_.backward(batch.mix_cache, dVecs);
}

std::vector<Vec> mix_layers(const std::vector<std::vector<Vec>>& layers,
                            double gamma, const Vec& scales) {
  if (layers.empty()) throw ContractError("mix_layers: need at least one layer");
  if (scales.size() != static_cast<Eigen::Index>(layers.size())) {
    throw ContractError("mix_layers: layer count mismatch");
  }
  const Vec beta = nn::softmax(scales);
  const std::size_t tokens = layers.front().size();
  for (const auto& layer : layers) {
    if (layer.size() != tokens) throw ContractError("mix_layers: ragged layers");
  }
  std::vector<Vec> out(tokens);
  for (std::size_t t = 0; t < tokens; ++t) {
    Vec mixed = Vec::Zero(layers.front()[t].size());
    for (std::size_t k = 0; k < layers.size(); ++k) {
      mixed += beta[static_cast<Eigen::Index>(k)] * layers[k][t];
    }
    out[t] = gamma * mixed;
  }
  return out;
}

// ---------------------------------------------------------------------------
// MentionEncoder
// ---------------------------------------------------------------------------

MentionEncoder::MentionEncoder(nn::ParameterSet& params, const EncoderConfig& config,
                               HeadwordFinder headword, const std::string& prefix)
    : config_(config),
      sent_lstm_(params, prefix + ".sent_lstm", config.d_emb + config.d_loc,
                 config.d_hid),
      sent_attn_(params, prefix + ".sent_attn", 2 * config.d_hid, config.d_hid),
      ment_lstm_(params, prefix + ".ment_lstm", config.d_emb, config.d_hid),
      ment_attn_(params, prefix + ".ment_attn", 2 * config.d_hid, config.d_hid),
      char_cnn_(params, prefix + ".char", config.char_embed, config.char_filters,
                config.char_width, config.char_max_len),
      headword_(std::move(headword)) {
  loc_embed_ = &params.add(prefix + ".loc_embed", 4, config.d_loc);
}

std::vector<int> MentionEncoder::location_ids(std::size_t left, std::size_t mention,
                                              std::size_t right) {
  std::vector<int> ids;
  ids.reserve(left + mention + right);
  for (std::size_t i = 0; i < left; ++i) ids.push_back(0);
  for (std::size_t i = 0; i < mention; ++i) ids.push_back(i == 0 ? 1 : 2);
  for (std::size_t i = 0; i < right; ++i) ids.push_back(3);
  return ids;
}

Vec MentionEncoder::forward(const Example& example, const TokenVectorProvider& provider,
                            bool train, double dropout_embed, double dropout_mention,
                            Rng* rng, Cache& cache) const {
  if (example.mention_tokens.empty()) {
    throw ContractError("encode_mention: empty mention");
  }
  if (train && rng == nullptr) {
    throw ContractError("encode_mention: training mode needs an RNG");
  }
  provider.forward(example, cache.batch);
  const std::size_t total = example.sentence_length();
  if (cache.batch.vecs.size() != total) {
    throw ValidationError("provider returned wrong token count for example " +
                          example.id);
  }

  cache.left_len = example.left_tokens.size();
  cache.mention_len = example.mention_tokens.size();

  cache.embed_masks.assign(total, nn::DropoutMask{});
  cache.dropped.resize(total);
  for (std::size_t i = 0; i < total; ++i) {
    cache.dropped[i] = nn::dropout_forward(cache.batch.vecs[i], dropout_embed, train,
                                           rng, cache.embed_masks[i]);
  }

  const auto loc_ids = location_ids(cache.left_len, cache.mention_len,
                                    example.right_tokens.size());
  std::vector<Vec> sent_inputs(total);
  for (std::size_t i = 0; i < total; ++i) {
    Vec input(config_.d_emb + config_.d_loc);
    input.segment(0, config_.d_emb) = cache.dropped[i];
    input.segment(config_.d_emb, config_.d_loc) =
        loc_embed_->value.row(loc_ids[i]).transpose();
    sent_inputs[i] = std::move(input);
  }
  auto sent_out = sent_lstm_.run(sent_inputs, cache.sent_lstm);
  Vec s = sent_attn_.run(sent_out.states, cache.sent_attn);

  std::vector<Vec> mention_vecs(cache.dropped.begin() + static_cast<long>(cache.left_len),
                                cache.dropped.begin() +
                                    static_cast<long>(cache.left_len + cache.mention_len));
  auto ment_out = ment_lstm_.run(mention_vecs, cache.ment_lstm);
  Vec m_word = ment_attn_.run(ment_out.states, cache.ment_attn);

  Vec m_char = char_cnn_.run(example.mention_chars(), cache.chars);

  const int head = headword_(example.mention_tokens);
  if (head < 0 || static_cast<std::size_t>(head) >= cache.mention_len) {
    throw ContractError("headword finder returned an out-of-mention index");
  }
  cache.head_index = cache.left_len + static_cast<std::size_t>(head);
  const Vec& m_head = cache.dropped[cache.head_index];

  Vec mention_part(2 * config_.d_hid + config_.char_filters + config_.d_emb);
  mention_part.segment(0, 2 * config_.d_hid) = m_word;
  mention_part.segment(2 * config_.d_hid, config_.char_filters) = m_char;
  mention_part.segment(2 * config_.d_hid + config_.char_filters, config_.d_emb) = m_head;
  Vec masked = nn::dropout_forward(mention_part, dropout_mention, train, rng,
                                   cache.mention_mask);

  Vec v(config_.mention_dim());
  v.segment(0, 2 * config_.d_hid) = s;
  v.segment(2 * config_.d_hid, masked.size()) = masked;
  return v;
}

void MentionEncoder::backward(const TokenVectorProvider& provider, Cache& cache,
                              const Vec& dOut) const {
  const std::size_t total = cache.dropped.size();
  const int two_h = 2 * config_.d_hid;

  Vec dS = dOut.segment(0, two_h);
  Vec dMasked = dOut.segment(two_h, two_h + config_.char_filters + config_.d_emb);
  Vec dMention = nn::dropout_backward(cache.mention_mask, dMasked);

  Vec dWord = dMention.segment(0, two_h);
  Vec dChar = dMention.segment(two_h, config_.char_filters);
  Vec dHead = dMention.segment(two_h + config_.char_filters, config_.d_emb);

  std::vector<Vec> dDropped(total, Vec(Vec::Zero(config_.d_emb)));
  dDropped[cache.head_index] += dHead;

  char_cnn_.backward(cache.chars, dChar);

  auto dMentStates = ment_attn_.backward(cache.ment_attn, dWord);
  auto dMentInputs = ment_lstm_.backward(cache.ment_lstm, dMentStates);
  for (std::size_t k = 0; k < dMentInputs.size(); ++k) {
    dDropped[cache.left_len + k] += dMentInputs[k];
  }

  auto dSentStates = sent_attn_.backward(cache.sent_attn, dS);
  auto dSentInputs = sent_lstm_.backward(cache.sent_lstm, dSentStates);
  const auto loc_ids = location_ids(cache.left_len, cache.mention_len,
                                    total - cache.left_len - cache.mention_len);
  for (std::size_t i = 0; i < total; ++i) {
    dDropped[i] += dSentInputs[i].segment(0, config_.d_emb);
    loc_embed_->grad.row(loc_ids[i]) +=
        dSentInputs[i].segment(config_.d_emb, config_.d_loc).transpose();
  }

  std::vector<Vec> dVecs(total);
  for (std::size_t i = 0; i < total; ++i) {
    dVecs[i] = nn::dropout_backward(cache.embed_masks[i], dDropped[i]);
  }
  provider.backward(cache.batch, dVecs);
}

// ---------------------------------------------------------------------------
// TypeEncoder
// ---------------------------------------------------------------------------

TypeEncoder::TypeEncoder(nn::ParameterSet& params, const EncoderConfig& config,
                         std::size_t vocab_size, const std::string& prefix)
    : config_(config),
      def_lstm_(params, prefix + ".def_lstm", config.resolved_def_word(),
                config.d_def / 2) {
  type_embed_ = &params.add(prefix + ".embed",
                            static_cast<Eigen::Index>(vocab_size), config.d_type);
}

Vec TypeEncoder::forward(const std::vector<TypeId>& types,
                         const DefinitionMap& definitions,
                         const EmbeddingTable& def_words, Cache& cache) const {
  if (def_words.dimension() != config_.resolved_def_word()) {
    throw ValidationError("definition word vectors have wrong dimension");
  }
  cache.types = types;
  std::sort(cache.types.begin(), cache.types.end());
  cache.types.erase(std::unique(cache.types.begin(), cache.types.end()),
                    cache.types.end());

  Vec out = Vec::Zero(config_.type_dim());
  cache.def_caches.assign(cache.types.size(), nn::BiLstm::Cache{});
  cache.def_present.assign(cache.types.size(), false);

  for (std::size_t j = 0; j < cache.types.size(); ++j) {
    const TypeId id = cache.types[j];
    if (id < 0 || id >= type_embed_->value.rows()) {
      throw ValidationError("encode_types: type id out of vocabulary");
    }
    out.segment(0, config_.d_type) += type_embed_->value.row(id).transpose();

    const auto& def_tokens = definitions.tokens(id);
    if (def_tokens.empty()) continue;
    std::vector<Vec> inputs;
    inputs.reserve(def_tokens.size());
    for (const auto& token : def_tokens) inputs.push_back(def_words.lookup(token));
    auto def_out = def_lstm_.run(inputs, cache.def_caches[j]);
    cache.def_present[j] = true;
    out.segment(config_.d_type, config_.d_def) += def_out.last_concat;
  }
  return out;
}

void TypeEncoder::backward(Cache& cache, const Vec& dOut) const {
  const Vec dType = dOut.segment(0, config_.d_type);
  const Vec dDef = dOut.segment(config_.d_type, config_.d_def);
  for (std::size_t j = 0; j < cache.types.size(); ++j) {
    type_embed_->grad.row(cache.types[j]) += dType.transpose();
    if (cache.def_present[j]) {
      def_lstm_.backward(cache.def_caches[j], {}, &dDef);
    }
  }
}

}  // namespace etd
