#include "etd/nn/adam.hpp"

#include <cmath>

namespace etd::nn {

void TrainConfig::validate() const {
  if (batch_size <= 0) throw ValidationError("batch_size must be positive");
  if (!(learning_rate > 0.0 && learning_rate <= 1.0)) {
    throw ValidationError("learning_rate must be in (0, 1]");
  }
  if (!(adam_beta1 > 0.0 && adam_beta1 < 1.0) ||
      !(adam_beta2 > 0.0 && adam_beta2 < 1.0)) {
    throw ValidationError("adam betas must be in (0, 1)");
  }
  if (adam_epsilon <= 0.0) throw ValidationError("adam epsilon must be positive");
  if (epochs <= 0 && max_steps <= 0) {
    throw ValidationError("need a positive epoch count or step cap");
  }
  if (dropout_embed < 0.0 || dropout_embed >= 1.0 || dropout_mention < 0.0 ||
      dropout_mention >= 1.0) {
    throw ValidationError("dropout rates must be in [0, 1)");
  }
  if (!(holdout_fraction >= 0.0 && holdout_fraction < 1.0)) {
    throw ValidationError("holdout_fraction must be in [0, 1)");
  }
}

AdamOptimizer::AdamOptimizer(double learning_rate, double beta1, double beta2,
                             double epsilon)
    : lr_(learning_rate), beta1_(beta1), beta2_(beta2), eps_(epsilon) {}

void AdamOptimizer::step(ParameterSet& params) {
  ++step_count_;
  const double bias1 = 1.0 - std::pow(beta1_, static_cast<double>(step_count_));
  const double bias2 = 1.0 - std::pow(beta2_, static_cast<double>(step_count_));
  for (auto& [name, tensor] : params.tensors()) {
    auto [it, inserted] = state_.try_emplace(name);
    State& st = it->second;
    if (inserted) {
      st.m = Mat::Zero(tensor.value.rows(), tensor.value.cols());
      st.v = Mat::Zero(tensor.value.rows(), tensor.value.cols());
    }
    st.m = beta1_ * st.m + (1.0 - beta1_) * tensor.grad;
    st.v = beta2_ * st.v + (1.0 - beta2_) * tensor.grad.cwiseProduct(tensor.grad);
    const Mat m_hat = st.m / bias1;
    const Mat v_hat = st.v / bias2;
    tensor.value.array() -=
        lr_ * m_hat.array() / (v_hat.array().sqrt() + eps_);
  }
}

}  // namespace etd::nn
