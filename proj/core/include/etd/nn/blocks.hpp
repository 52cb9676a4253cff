#pragma once

#include <string>
#include <vector>

#include "etd/nn/params.hpp"
#include "etd/resources.hpp"

namespace etd::nn {

// Every block follows the same shape: run(...) computes outputs and fills a
// Cache, backward(...) consumes the cache and the output gradient,
// accumulates into parameter .grad members and returns input gradients.
// Training code composes blocks by hand and walks them in reverse.

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

Vec softmax(const Vec& scores);

/// Numerically stable binary cross-entropy on a logit:
/// bce_logit(z, y) = softplus(z) - y * z = BCE(y, sigmoid(z)).
double bce_logit(double logit, double target);

/// BCE from a probability (used by the public loss contracts; probabilities
/// are clamped away from {0,1} by 1e-12).
double bce_prob(double probability, double target);

// ---------------------------------------------------------------------------
// Long short-term memory, one direction. Gate order in the stacked weights is
// input, forget, candidate, output:
//   z = W x_t + U h_{t-1} + b,  i = s(z_0), f = s(z_1), g = tanh(z_2),
//   o = s(z_3),  c_t = f.c_{t-1} + i.g,  h_t = o.tanh(c_t)
// with h_0 = c_0 = 0.
// ---------------------------------------------------------------------------
class LstmCell {
 public:
  LstmCell(ParameterSet& params, const std::string& prefix, int input, int hidden);

  struct Cache {
    std::vector<Vec> inputs;
    std::vector<Vec> h, c, gi, gf, gg, go, tanh_c;
  };

  /// Runs over `inputs` in the given order; returns h_1..h_T.
  std::vector<Vec> run(const std::vector<Vec>& inputs, Cache& cache) const;

  /// dH holds the loss gradient on each h_t; returns gradients on the inputs.
  std::vector<Vec> backward(const Cache& cache, const std::vector<Vec>& dH) const;

  int input_size() const { return input_; }
  int hidden_size() const { return hidden_; }

 private:
  Tensor* W_;
  Tensor* U_;
  Tensor* b_;
  int input_;
  int hidden_;
};

/// Bidirectional wrapper; per-position output is [h_fwd_t ; h_bwd_t] and
/// last_concat is the concatenation of each direction's final state.
class BiLstm {
 public:
  BiLstm(ParameterSet& params, const std::string& prefix, int input, int hidden);

  struct Cache {
    LstmCell::Cache fwd, bwd;
    std::size_t length = 0;
  };
  struct Output {
    std::vector<Vec> states;  // length T, each 2*hidden
    Vec last_concat;          // 2*hidden
  };

  /// Throws ContractError on an empty sequence.
  Output run(const std::vector<Vec>& inputs, Cache& cache) const;

  /// Either gradient argument may be empty/null when unused.
  std::vector<Vec> backward(const Cache& cache, const std::vector<Vec>& dStates,
                            const Vec* dLastConcat = nullptr) const;

  int hidden_size() const { return fwd_.hidden_size(); }
  int output_size() const { return 2 * fwd_.hidden_size(); }

 private:
  LstmCell fwd_;
  LstmCell bwd_;
};

// ---------------------------------------------------------------------------
// Span attention: out = sum_i a_i h_i, a = softmax(s), s_i = w^T tanh(W h_i).
// ---------------------------------------------------------------------------
class SpanAttention {
 public:
  SpanAttention(ParameterSet& params, const std::string& prefix, int dim, int hidden);

  struct Cache {
    std::vector<Vec> states, u;
    Vec alpha;
  };

  /// Throws ContractError on an empty sequence.
  Vec run(const std::vector<Vec>& states, Cache& cache) const;
  std::vector<Vec> backward(const Cache& cache, const Vec& dOut) const;

 private:
  Tensor* W_;  // hidden x dim
  Tensor* w_;  // hidden x 1
};

// ---------------------------------------------------------------------------
// Character convolution: embed, 1-D convolve (window `width`), ReLU, max-pool
// per filter. Input is truncated / padded to `max_len` characters. Inventory:
// PAD, OOV, then printable ASCII 0x20..0x7E.
// ---------------------------------------------------------------------------
class CharCnn {
 public:
  static constexpr int kPadId = 0;
  static constexpr int kOovId = 1;
  static constexpr int kInventory = 97;

  CharCnn(ParameterSet& params, const std::string& prefix, int embed_dim,
          int filters, int width, int max_len);

  struct Cache {
    std::vector<int> ids;
    std::vector<Vec> pre;      // per position, filters
    std::vector<int> argmax;   // per filter, winning position (-1: empty input)
    bool empty = false;
  };

  static int char_id(unsigned char c);

  /// Empty input yields the zero vector and sets cache.empty.
  Vec run(const std::string& chars, Cache& cache) const;
  void backward(const Cache& cache, const Vec& dOut) const;

  int output_size() const { return filters_; }

 private:
  Tensor* embed_;   // kInventory x embed_dim
  Tensor* filter_;  // filters x (width * embed_dim)
  Tensor* bias_;    // filters x 1
  int embed_dim_, filters_, width_, max_len_;
};

// ---------------------------------------------------------------------------
// One-layer highway: y = g.a + (1-g).x, g = s(Wt x + bt), a = relu(Wh x + bh).
// ---------------------------------------------------------------------------
class Highway {
 public:
  Highway(ParameterSet& params, const std::string& prefix, int dim);

  struct Cache {
    Vec x, gate, act;
  };

  Vec run(const Vec& x, Cache& cache) const;
  Vec backward(const Cache& cache, const Vec& dY) const;

  int dim() const { return dim_; }

 private:
  Tensor* Wt_;
  Tensor* bt_;
  Tensor* Wh_;
  Tensor* bh_;
  int dim_;
};

// ---------------------------------------------------------------------------
// Layer mixing for pretrained contextual vectors:
//   out_i = gamma * sum_k softmax(s)_k * layer_k[i].
// The layers themselves are read-only; only gamma and s train.
// ---------------------------------------------------------------------------
class MixLayers {
 public:
  MixLayers(ParameterSet& params, const std::string& prefix, int layer_count);

  struct Cache {
    const ContextualVectorStore::Record* record = nullptr;
    Vec beta;
    std::vector<Vec> out;
  };

  std::vector<Vec> run(const ContextualVectorStore::Record& record, Cache& cache) const;
  void backward(const Cache& cache, const std::vector<Vec>& dOut) const;

  int layer_count() const { return layer_count_; }

 private:
  Tensor* gamma_;  // 1 x 1
  Tensor* s_;      // layer_count x 1
  int layer_count_;
};

// ---------------------------------------------------------------------------
// Inverted dropout. Masks multiply by 1/(1-p) on kept coordinates so
// inference (train=false) is the identity.
// ---------------------------------------------------------------------------
struct DropoutMask {
  Vec scale;  // empty means identity
};

/// `rng` may be null when train is false.
Vec dropout_forward(const Vec& x, double p, bool train, Rng* rng, DropoutMask& mask);
Vec dropout_backward(const DropoutMask& mask, const Vec& dY);

}  // namespace etd::nn
