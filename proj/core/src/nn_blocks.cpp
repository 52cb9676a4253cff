#include "etd/nn/blocks.hpp"

#include <cmath>

namespace etd::nn {

Vec softmax(const Vec& scores) {
  Vec out = scores.array() - scores.maxCoeff();
  out = out.array().exp();
  return out / out.sum();
}

double bce_logit(double logit, double target) {
  // softplus(z) - y*z, softplus computed stably as max(z,0) + log1p(exp(-|z|))
  const double softplus = std::max(logit, 0.0) + std::log1p(std::exp(-std::abs(logit)));
  return softplus - target * logit;
}

double bce_prob(double probability, double target) {
  const double p = std::min(std::max(probability, 1e-12), 1.0 - 1e-12);
  return -(target * std::log(p) + (1.0 - target) * std::log1p(-p));
}

// ---------------------------------------------------------------------------
// LstmCell
// ---------------------------------------------------------------------------

LstmCell::LstmCell(ParameterSet& params, const std::string& prefix, int input,
                   int hidden)
    : input_(input), hidden_(hidden) {
  W_ = &params.add(prefix + ".W", 4 * hidden, input);
  U_ = &params.add(prefix + ".U", 4 * hidden, hidden);
  b_ = &params.add(prefix + ".b", 4 * hidden, 1, Init::kZero);
}

std::vector<Vec> LstmCell::run(const std::vector<Vec>& inputs, Cache& cache) const {
  const int H = hidden_;
  const std::size_t T = inputs.size();
  cache.inputs = inputs;
  cache.h.assign(T, Vec());
  cache.c.assign(T, Vec());
  cache.gi.assign(T, Vec());
  cache.gf.assign(T, Vec());
  cache.gg.assign(T, Vec());
  cache.go.assign(T, Vec());
  cache.tanh_c.assign(T, Vec());

  Vec h_prev = Vec::Zero(H);
  Vec c_prev = Vec::Zero(H);
  std::vector<Vec> outputs(T);
  for (std::size_t t = 0; t < T; ++t) {
    if (inputs[t].size() != input_) throw ContractError("lstm: input width mismatch");
    Vec z = W_->value * inputs[t] + U_->value * h_prev + b_->value.col(0);
    Vec i = z.segment(0, H).unaryExpr([](double v) { return sigmoid(v); });
    Vec f = z.segment(H, H).unaryExpr([](double v) { return sigmoid(v); });
    Vec g = z.segment(2 * H, H).array().tanh();
    Vec o = z.segment(3 * H, H).unaryExpr([](double v) { return sigmoid(v); });
    Vec c = f.cwiseProduct(c_prev) + i.cwiseProduct(g);
    Vec tc = c.array().tanh();
    Vec h = o.cwiseProduct(tc);

    cache.gi[t] = i;
    cache.gf[t] = f;
    cache.gg[t] = g;
    cache.go[t] = o;
    cache.c[t] = c;
    cache.tanh_c[t] = tc;
    cache.h[t] = h;
    outputs[t] = h;
    h_prev = std::move(h);
    c_prev = std::move(c);
  }
  return outputs;
}

std::vector<Vec> LstmCell::backward(const Cache& cache,
                                    const std::vector<Vec>& dH) const {
  const int H = hidden_;
  const std::size_t T = cache.inputs.size();
  std::vector<Vec> dX(T);
  Vec dh_next = Vec::Zero(H);
  Vec dc_next = Vec::Zero(H);

  for (std::size_t idx = T; idx-- > 0;) {
    const Vec& i = cache.gi[idx];
    const Vec& f = cache.gf[idx];
    const Vec& g = cache.gg[idx];
    const Vec& o = cache.go[idx];
    const Vec& tc = cache.tanh_c[idx];
    const Vec c_prev = idx == 0 ? Vec(Vec::Zero(H)) : cache.c[idx - 1];
    const Vec h_prev = idx == 0 ? Vec(Vec::Zero(H)) : cache.h[idx - 1];

    Vec dh = dh_next;
    if (!dH.empty() && dH[idx].size() > 0) dh += dH[idx];

    Vec do_ = dh.cwiseProduct(tc);
    Vec dc = dh.cwiseProduct(o).cwiseProduct(
                 (1.0 - tc.array().square()).matrix()) +
             dc_next;
    Vec di = dc.cwiseProduct(g);
    Vec dg = dc.cwiseProduct(i);
    Vec df = dc.cwiseProduct(c_prev);
    dc_next = dc.cwiseProduct(f);

    Vec dz(4 * H);
    dz.segment(0, H) = di.cwiseProduct(i).cwiseProduct((1.0 - i.array()).matrix());
    dz.segment(H, H) = df.cwiseProduct(f).cwiseProduct((1.0 - f.array()).matrix());
    dz.segment(2 * H, H) = dg.cwiseProduct((1.0 - g.array().square()).matrix());
    dz.segment(3 * H, H) = do_.cwiseProduct(o).cwiseProduct((1.0 - o.array()).matrix());

    W_->grad.noalias() += dz * cache.inputs[idx].transpose();
    U_->grad.noalias() += dz * h_prev.transpose();
    b_->grad.col(0) += dz;

    dX[idx] = W_->value.transpose() * dz;
    dh_next = U_->value.transpose() * dz;
  }
  return dX;
}

// ---------------------------------------------------------------------------
// BiLstm
// ---------------------------------------------------------------------------

BiLstm::BiLstm(ParameterSet& params, const std::string& prefix, int input, int hidden)
    : fwd_(params, prefix + ".fwd", input, hidden),
      bwd_(params, prefix + ".bwd", input, hidden) {}

BiLstm::Output BiLstm::run(const std::vector<Vec>& inputs, Cache& cache) const {
  if (inputs.empty()) throw ContractError("birnn_encode: empty input sequence");
  const std::size_t T = inputs.size();
  const int H = fwd_.hidden_size();
  cache.length = T;

  std::vector<Vec> reversed(inputs.rbegin(), inputs.rend());
  std::vector<Vec> hf = fwd_.run(inputs, cache.fwd);
  std::vector<Vec> hb = bwd_.run(reversed, cache.bwd);

  Output out;
  out.states.resize(T, Vec(2 * H));
  for (std::size_t t = 0; t < T; ++t) {
    out.states[t].segment(0, H) = hf[t];
    out.states[t].segment(H, H) = hb[T - 1 - t];
  }
  out.last_concat = Vec(2 * H);
  out.last_concat.segment(0, H) = hf[T - 1];
  out.last_concat.segment(H, H) = hb[T - 1];
  return out;
}

std::vector<Vec> BiLstm::backward(const Cache& cache, const std::vector<Vec>& dStates,
                                  const Vec* dLastConcat) const {
  const std::size_t T = cache.length;
  const int H = fwd_.hidden_size();

  std::vector<Vec> dHf(T, Vec(Vec::Zero(H)));
  std::vector<Vec> dHb(T, Vec(Vec::Zero(H)));  // indexed in reversed order
  if (!dStates.empty()) {
    for (std::size_t t = 0; t < T; ++t) {
      if (dStates[t].size() == 0) continue;
      dHf[t] += dStates[t].segment(0, H);
      dHb[T - 1 - t] += dStates[t].segment(H, H);
    }
  }
  if (dLastConcat != nullptr) {
    dHf[T - 1] += dLastConcat->segment(0, H);
    dHb[T - 1] += dLastConcat->segment(H, H);
  }

  std::vector<Vec> dx_f = fwd_.backward(cache.fwd, dHf);
  std::vector<Vec> dx_b = bwd_.backward(cache.bwd, dHb);

  std::vector<Vec> dX(T);
  for (std::size_t t = 0; t < T; ++t) {
    dX[t] = dx_f[t] + dx_b[T - 1 - t];
  }
  return dX;
}

// ---------------------------------------------------------------------------
// SpanAttention
// ---------------------------------------------------------------------------

SpanAttention::SpanAttention(ParameterSet& params, const std::string& prefix,
                             int dim, int hidden) {
  W_ = &params.add(prefix + ".W", hidden, dim);
  w_ = &params.add(prefix + ".w", hidden, 1);
}

Vec SpanAttention::run(const std::vector<Vec>& states, Cache& cache) const {
  if (states.empty()) throw ContractError("span_attention: empty input sequence");
  const std::size_t T = states.size();
  cache.states = states;
  cache.u.resize(T);
  Vec scores(T);
  for (std::size_t t = 0; t < T; ++t) {
    cache.u[t] = (W_->value * states[t]).array().tanh();
    scores[static_cast<Eigen::Index>(t)] = w_->value.col(0).dot(cache.u[t]);
  }
  cache.alpha = softmax(scores);
  Vec out = Vec::Zero(states.front().size());
  for (std::size_t t = 0; t < T; ++t) {
    out += cache.alpha[static_cast<Eigen::Index>(t)] * states[t];
  }
  return out;
}

std::vector<Vec> SpanAttention::backward(const Cache& cache, const Vec& dOut) const {
  const std::size_t T = cache.states.size();
  std::vector<Vec> dStates(T);
  Vec dAlpha(T);
  for (std::size_t t = 0; t < T; ++t) {
    dStates[t] = cache.alpha[static_cast<Eigen::Index>(t)] * dOut;
    dAlpha[static_cast<Eigen::Index>(t)] = dOut.dot(cache.states[t]);
  }
  // softmax jacobian: ds_i = a_i (dA_i - sum_j a_j dA_j)
  const double mixed = cache.alpha.dot(dAlpha);
  for (std::size_t t = 0; t < T; ++t) {
    const auto ti = static_cast<Eigen::Index>(t);
    const double ds = cache.alpha[ti] * (dAlpha[ti] - mixed);
    Vec du = ds * w_->value.col(0);
    w_->grad.col(0) += ds * cache.u[t];
    Vec dpre = du.cwiseProduct((1.0 - cache.u[t].array().square()).matrix());
    W_->grad.noalias() += dpre * cache.states[t].transpose();
    dStates[t] += W_->value.transpose() * dpre;
  }
  return dStates;
}

// ---------------------------------------------------------------------------
// CharCnn
// ---------------------------------------------------------------------------

CharCnn::CharCnn(ParameterSet& params, const std::string& prefix, int embed_dim,
                 int filters, int width, int max_len)
    : embed_dim_(embed_dim), filters_(filters), width_(width), max_len_(max_len) {
  if (width <= 0 || max_len < width) {
    throw ContractError("char_cnn: window must fit within the padded length");
  }
  embed_ = &params.add(prefix + ".embed", kInventory, embed_dim);
  filter_ = &params.add(prefix + ".filters", filters, width * embed_dim);
  bias_ = &params.add(prefix + ".bias", filters, 1, Init::kZero);
}

int CharCnn::char_id(unsigned char c) {
  if (c >= 0x20 && c <= 0x7E) return 2 + (c - 0x20);
  return kOovId;
}

Vec CharCnn::run(const std::string& chars, Cache& cache) const {
  cache.empty = chars.empty();
  if (cache.empty) {
    cache.argmax.assign(static_cast<std::size_t>(filters_), -1);
    return Vec::Zero(filters_);
  }
  cache.ids.assign(static_cast<std::size_t>(max_len_), kPadId);
  for (std::size_t i = 0; i < chars.size() && i < static_cast<std::size_t>(max_len_); ++i) {
    cache.ids[i] = char_id(static_cast<unsigned char>(chars[i]));
  }

  const int positions = max_len_ - width_ + 1;
  cache.pre.resize(static_cast<std::size_t>(positions));
  Vec window(width_ * embed_dim_);
  Vec best = Vec::Constant(filters_, -std::numeric_limits<double>::infinity());
  cache.argmax.assign(static_cast<std::size_t>(filters_), 0);
  for (int pos = 0; pos < positions; ++pos) {
    for (int k = 0; k < width_; ++k) {
      window.segment(k * embed_dim_, embed_dim_) =
          embed_->value.row(cache.ids[static_cast<std::size_t>(pos + k)]).transpose();
    }
    Vec pre = filter_->value * window + bias_->value.col(0);
    cache.pre[static_cast<std::size_t>(pos)] = pre;
    for (int j = 0; j < filters_; ++j) {
      const double activated = std::max(pre[j], 0.0);
      if (activated > best[j]) {
        best[j] = activated;
        cache.argmax[static_cast<std::size_t>(j)] = pos;
      }
    }
  }
  return best.cwiseMax(0.0);
}

void CharCnn::backward(const Cache& cache, const Vec& dOut) const {
  if (cache.empty) return;
  Vec window(width_ * embed_dim_);
  for (int j = 0; j < filters_; ++j) {
    const int pos = cache.argmax[static_cast<std::size_t>(j)];
    const double pre = cache.pre[static_cast<std::size_t>(pos)][j];
    if (pre <= 0.0) continue;  // ReLU clipped; max-pool output came from 0
    const double da = dOut[j];
    if (da == 0.0) continue;
    for (int k = 0; k < width_; ++k) {
      window.segment(k * embed_dim_, embed_dim_) =
          embed_->value.row(cache.ids[static_cast<std::size_t>(pos + k)]).transpose();
    }
    filter_->grad.row(j) += da * window.transpose();
    bias_->grad(j, 0) += da;
    for (int k = 0; k < width_; ++k) {
      embed_->grad.row(cache.ids[static_cast<std::size_t>(pos + k)]) +=
          da * filter_->value.row(j).segment(k * embed_dim_, embed_dim_);
    }
  }
}

// ---------------------------------------------------------------------------
// Highway
// ---------------------------------------------------------------------------

Highway::Highway(ParameterSet& params, const std::string& prefix, int dim)
    : dim_(dim) {
  Wt_ = &params.add(prefix + ".Wt", dim, dim);
  bt_ = &params.add(prefix + ".bt", dim, 1, Init::kZero);
  Wh_ = &params.add(prefix + ".Wh", dim, dim);
  bh_ = &params.add(prefix + ".bh", dim, 1, Init::kZero);
}

Vec Highway::run(const Vec& x, Cache& cache) const {
  if (x.size() != dim_) throw ContractError("highway: input width mismatch");
  cache.x = x;
  cache.gate = (Wt_->value * x + bt_->value.col(0))
                   .unaryExpr([](double v) { return sigmoid(v); });
  cache.act = (Wh_->value * x + bh_->value.col(0)).cwiseMax(0.0);
  return cache.gate.cwiseProduct(cache.act) +
         (Vec::Ones(dim_) - cache.gate).cwiseProduct(x);
}

Vec Highway::backward(const Cache& cache, const Vec& dY) const {
  Vec dGate = dY.cwiseProduct(cache.act - cache.x);
  Vec dAct = dY.cwiseProduct(cache.gate);
  Vec dX = dY.cwiseProduct(Vec::Ones(dim_) - cache.gate);

  Vec dzt = dGate.cwiseProduct(cache.gate)
                .cwiseProduct((1.0 - cache.gate.array()).matrix());
  Vec dzh = dAct;
  for (int i = 0; i < dim_; ++i) {
    if (cache.act[i] <= 0.0) dzh[i] = 0.0;
  }

  Wt_->grad.noalias() += dzt * cache.x.transpose();
  bt_->grad.col(0) += dzt;
  Wh_->grad.noalias() += dzh * cache.x.transpose();
  bh_->grad.col(0) += dzh;

  dX += Wt_->value.transpose() * dzt;
  dX += Wh_->value.transpose() * dzh;
  return dX;
}

// ---------------------------------------------------------------------------
// MixLayers
// ---------------------------------------------------------------------------

MixLayers::MixLayers(ParameterSet& params, const std::string& prefix, int layer_count)
    : layer_count_(layer_count) {
  if (layer_count <= 0) throw ContractError("mix_layers: need at least one layer");
  gamma_ = &params.add(prefix + ".gamma", 1, 1);
  s_ = &params.add(prefix + ".scales", layer_count, 1, Init::kZero);
  gamma_->value(0, 0) = 1.0;  // scale starts at identity
}

std::vector<Vec> MixLayers::run(const ContextualVectorStore::Record& record,
                                Cache& cache) const {
  if (record.layers.size() != static_cast<std::size_t>(layer_count_)) {
    throw ContractError("mix_layers: layer count mismatch");
  }
  cache.record = &record;
  cache.beta = softmax(s_->value.col(0));
  const std::size_t tokens = record.layers.front().size();
  const double gamma = gamma_->value(0, 0);

  cache.out.assign(tokens, Vec());
  for (std::size_t t = 0; t < tokens; ++t) {
    Vec mixed = Vec::Zero(record.layers.front()[t].size());
    for (int k = 0; k < layer_count_; ++k) {
      mixed += cache.beta[k] * record.layers[static_cast<std::size_t>(k)][t];
    }
    cache.out[t] = gamma * mixed;
  }
  return cache.out;
}

void MixLayers::backward(const Cache& cache, const std::vector<Vec>& dOut) const {
  const double gamma = gamma_->value(0, 0);
  Vec layer_dots = Vec::Zero(layer_count_);  // sum_t <dOut_t, layer_k[t]>
  for (int k = 0; k < layer_count_; ++k) {
    const auto& layer = cache.record->layers[static_cast<std::size_t>(k)];
    for (std::size_t t = 0; t < dOut.size(); ++t) {
      if (dOut[t].size() == 0) continue;
      layer_dots[k] += dOut[t].dot(layer[t]);
    }
  }
  gamma_->grad(0, 0) += cache.beta.dot(layer_dots);
  Vec dBeta = gamma * layer_dots;
  const double mixed = cache.beta.dot(dBeta);
  for (int k = 0; k < layer_count_; ++k) {
    s_->grad(k, 0) += cache.beta[k] * (dBeta[k] - mixed);
  }
}

// ---------------------------------------------------------------------------
// Dropout
// ---------------------------------------------------------------------------

Vec dropout_forward(const Vec& x, double p, bool train, Rng* rng, DropoutMask& mask) {
  if (!train || p <= 0.0) {
    mask.scale.resize(0);
    return x;
  }
  if (rng == nullptr) throw ContractError("dropout: training mode needs an RNG");
  const double keep = 1.0 - p;
  mask.scale = Vec(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    mask.scale[i] = rng->bernoulli(keep) ? 1.0 / keep : 0.0;
  }
  return x.cwiseProduct(mask.scale);
}

Vec dropout_backward(const DropoutMask& mask, const Vec& dY) {
  if (mask.scale.size() == 0) return dY;
  return dY.cwiseProduct(mask.scale);
}

}  // namespace etd::nn
