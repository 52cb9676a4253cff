#pragma once

#include "etd/nn/params.hpp"

namespace etd::nn {

/// Hyperparameters shared by every trained model. Defaults: Adam(0.9, 0.999,
/// 1e-8) at 2e-3, batch 100, embedding dropout 0.2, mention dropout 0.5.
struct TrainConfig {
  int batch_size = 100;
  double learning_rate = 2e-3;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  int epochs = 20;
  long max_steps = 0;  // 0: no step cap
  double dropout_embed = 0.2;
  double dropout_mention = 0.5;
  std::uint64_t seed = 1;
  int patience = 5;             // early-stopping patience in epochs
  double holdout_fraction = 0.1;  // held-out slice for filter/relabel stopping

  void validate() const;
};

class AdamOptimizer {
 public:
  AdamOptimizer(double learning_rate, double beta1, double beta2, double epsilon);

  explicit AdamOptimizer(const TrainConfig& config)
      : AdamOptimizer(config.learning_rate, config.adam_beta1, config.adam_beta2,
                      config.adam_epsilon) {}

  /// One update from the gradients currently held in `params`; does not zero
  /// them. Tensors are visited in name order.
  void step(ParameterSet& params);

  long step_count() const { return step_count_; }

 private:
  struct State {
    Mat m, v;
  };
  double lr_, beta1_, beta2_, eps_;
  long step_count_ = 0;
  std::map<std::string, State> state_;
};

}  // namespace etd::nn
