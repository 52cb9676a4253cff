#pragma once

#include <functional>

#include "etd/example.hpp"
#include "etd/nn/blocks.hpp"
#include "etd/resources.hpp"

namespace etd {

/// Architecture hyperparameters shared by the denoising and typing models.
/// Defaults follow the reference setting: d_loc 50, d_hid 100, 50 char
/// filters, char embeddings 100, type / definition embeddings 1024.
struct EncoderConfig {
  int d_emb = 1024;       // token vector width delivered by the provider
  int d_loc = 50;         // location embedding width
  int d_hid = 100;        // bi-LSTM hidden width (per direction)
  int char_embed = 100;   // character embedding width
  int char_filters = 50;  // convolution filter count
  int char_width = 5;     // convolution window
  int char_max_len = 25;  // character input pad / truncate length
  int d_type = 1024;      // type embedding width
  int d_def = 1024;       // definition encoding width (2 * def-LSTM hidden)
  int d_def_word = 0;     // definition word vector width; 0 = d_emb
  bool use_contextual = false;
  int contextual_layers = 3;

  void validate() const;

  int resolved_def_word() const { return d_def_word > 0 ? d_def_word : d_emb; }
  /// v_m = [s ; m_word ; m_char ; m_head]
  int mention_dim() const { return 4 * d_hid + char_filters + d_emb; }
  /// v_t = [t ; w]
  int type_dim() const { return d_type + d_def; }
  int feature_dim() const { return mention_dim() + type_dim(); }

  /// Stable hash of every field; stamped into checkpoints.
  std::string fingerprint() const;
};

/// Default headword heuristic: drop trailing punctuation; if a boundary token
/// (of, in, for, at, on, with, ",") occurs past position 0, take the token
/// just before the first boundary, otherwise the rightmost non-punctuation
/// token. Total on any non-empty mention.
int find_headword(const std::vector<std::string>& mention_tokens);

using HeadwordFinder = std::function<int(const std::vector<std::string>&)>;

// ---------------------------------------------------------------------------
// Token vector providers. The static provider looks tokens up in a frozen
// embedding table; the contextual provider reads precomputed layers from a
// ContextualVectorStore and mixes them with trained (gamma, scales).
// ---------------------------------------------------------------------------
class TokenVectorProvider {
 public:
  struct Batch {
    std::vector<Vec> vecs;
    nn::MixLayers::Cache mix_cache;
  };

  virtual ~TokenVectorProvider() = default;
  virtual int dim() const = 0;
  virtual void forward(const Example& example, Batch& out) const = 0;
  /// dVecs entries may be empty (no gradient for that token).
  virtual void backward(Batch& batch, const std::vector<Vec>& dVecs) const = 0;
};

class StaticTokenProvider final : public TokenVectorProvider {
 public:
  explicit StaticTokenProvider(const EmbeddingTable* table) : table_(table) {}
  int dim() const override { return table_->dimension(); }
  void forward(const Example& example, Batch& out) const override;
  void backward(Batch&, const std::vector<Vec>&) const override {}

 private:
  const EmbeddingTable* table_;
};

class ContextualTokenProvider final : public TokenVectorProvider {
 public:
  /// Adds the mixing parameters under `prefix`.
  ContextualTokenProvider(nn::ParameterSet& params, const std::string& prefix,
                          const ContextualVectorStore* store, int layer_count);
  int dim() const override { return store_->dimension(); }
  void forward(const Example& example, Batch& out) const override;
  void backward(Batch& batch, const std::vector<Vec>& dVecs) const override;

 private:
  const ContextualVectorStore* store_;
  nn::MixLayers mix_;
};

/// One-step layer mix without a store record, exposed for reuse and testing:
/// out_i = gamma * sum_k softmax(s)_k layer_k[i].
std::vector<Vec> mix_layers(const std::vector<std::vector<Vec>>& layers,
                            double gamma, const Vec& scales);

// ---------------------------------------------------------------------------
// Mention encoder: v_m = [s ; m_word ; m_char ; m_head] with
//   s      = Attention(bi-LSTM([token ; location]))   over the full sentence
//   m_word = Attention(bi-LSTM(mention tokens))
//   m_char = CharCnn(mention characters)
//   m_head = token vector of the headword
// Embedding dropout hits each token vector once (the same dropped vector
// feeds the sentence encoder, mention encoder and headword); mention dropout
// hits [m_word ; m_char ; m_head].
// ---------------------------------------------------------------------------
class MentionEncoder {
 public:
  MentionEncoder(nn::ParameterSet& params, const EncoderConfig& config,
                 HeadwordFinder headword = find_headword,
                 const std::string& prefix = "encoder.mention");

  struct Cache {
    TokenVectorProvider::Batch batch;
    std::vector<nn::DropoutMask> embed_masks;
    std::vector<Vec> dropped;
    nn::BiLstm::Cache sent_lstm;
    nn::SpanAttention::Cache sent_attn;
    nn::BiLstm::Cache ment_lstm;
    nn::SpanAttention::Cache ment_attn;
    nn::CharCnn::Cache chars;
    nn::DropoutMask mention_mask;
    std::size_t left_len = 0, mention_len = 0;
    std::size_t head_index = 0;  // sentence position of the headword
  };

  Vec forward(const Example& example, const TokenVectorProvider& provider,
              bool train, double dropout_embed, double dropout_mention,
              Rng* rng, Cache& cache) const;

  void backward(const TokenVectorProvider& provider, Cache& cache,
                const Vec& dOut) const;

  int output_dim() const { return config_.mention_dim(); }

  /// Location ids for a (left, mention, right) split: 0 left context,
  /// 1 mention first, 2 mention rest, 3 right context.
  static std::vector<int> location_ids(std::size_t left, std::size_t mention,
                                       std::size_t right);

 private:
  EncoderConfig config_;
  nn::Tensor* loc_embed_;  // 4 x d_loc
  nn::BiLstm sent_lstm_;
  nn::SpanAttention sent_attn_;
  nn::BiLstm ment_lstm_;
  nn::SpanAttention ment_attn_;
  nn::CharCnn char_cnn_;
  HeadwordFinder headword_;
};

// ---------------------------------------------------------------------------
// Type encoder: v_t = [t ; w], t = sum of type embeddings, w = sum of
// definition encodings (bi-LSTM last states, both directions, over frozen
// definition word vectors). Empty set -> zero vector; empty definition ->
// zero contribution.
// ---------------------------------------------------------------------------
class TypeEncoder {
 public:
  TypeEncoder(nn::ParameterSet& params, const EncoderConfig& config,
              std::size_t vocab_size, const std::string& prefix = "encoder.type");

  struct Cache {
    std::vector<TypeId> types;
    std::vector<nn::BiLstm::Cache> def_caches;
    std::vector<bool> def_present;
  };

  Vec forward(const std::vector<TypeId>& types, const DefinitionMap& definitions,
              const EmbeddingTable& def_words, Cache& cache) const;
  void backward(Cache& cache, const Vec& dOut) const;

  int output_dim() const { return config_.type_dim(); }

 private:
  EncoderConfig config_;
  nn::Tensor* type_embed_;  // |V| x d_type
  nn::BiLstm def_lstm_;
};

}  // namespace etd
