#include "etd/nn/params.hpp"

#include <cmath>

namespace etd::nn {

Tensor& ParameterSet::add(const std::string& name, Eigen::Index rows,
                          Eigen::Index cols, Init init) {
  if (rows <= 0 || cols <= 0) {
    throw ContractError("parameter '" + name + "' must have positive shape");
  }
  auto [it, inserted] = tensors_.emplace(name, Tensor{});
  if (!inserted) throw ContractError("duplicate parameter name: " + name);
  it->second.value = Mat::Zero(rows, cols);
  it->second.grad = Mat::Zero(rows, cols);
  inits_[name] = init;
  return it->second;
}

Tensor& ParameterSet::at(const std::string& name) {
  auto it = tensors_.find(name);
  if (it == tensors_.end()) throw ContractError("no parameter named: " + name);
  return it->second;
}

const Tensor& ParameterSet::at(const std::string& name) const {
  auto it = tensors_.find(name);
  if (it == tensors_.end()) throw ContractError("no parameter named: " + name);
  return it->second;
}

std::size_t ParameterSet::parameter_count() const {
  std::size_t count = 0;
  for (const auto& [name, tensor] : tensors_) {
    count += static_cast<std::size_t>(tensor.value.size());
  }
  return count;
}

void ParameterSet::zero_grads() {
  for (auto& [name, tensor] : tensors_) tensor.grad.setZero();
}

void ParameterSet::initialize(std::uint64_t seed) {
  for (auto& [name, tensor] : tensors_) {
    if (inits_.at(name) == Init::kZero) {
      tensor.value.setZero();
      continue;
    }
    Rng rng(derive_seed(seed, fnv1a64(name)));
    const double bound = 1.0 / std::sqrt(static_cast<double>(tensor.value.cols()));
    for (Eigen::Index r = 0; r < tensor.value.rows(); ++r) {
      for (Eigen::Index c = 0; c < tensor.value.cols(); ++c) {
        tensor.value(r, c) = rng.uniform(-bound, bound);
      }
    }
  }
}

std::map<std::string, Mat> ParameterSet::snapshot_values() const {
  std::map<std::string, Mat> out;
  for (const auto& [name, tensor] : tensors_) out.emplace(name, tensor.value);
  return out;
}

void ParameterSet::restore_values(const std::map<std::string, Mat>& snapshot) {
  for (auto& [name, tensor] : tensors_) {
    auto it = snapshot.find(name);
    if (it == snapshot.end()) throw ContractError("snapshot missing tensor: " + name);
    tensor.value = it->second;
  }
}

}  // namespace etd::nn
