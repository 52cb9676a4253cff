#pragma once

#include <map>
#include <string>

#include "etd/common.hpp"

namespace etd::nn {

/// One named parameter tensor plus its gradient accumulator. Vectors are
/// stored as d x 1 matrices.
struct Tensor {
  Mat value;
  Mat grad;

  Eigen::Index rows() const { return value.rows(); }
  Eigen::Index cols() const { return value.cols(); }
};

enum class Init { kUniformFanIn, kZero };

/// Named trainable tensors. Shapes are fixed at add() time; iteration is in
/// name order so optimizer updates and checkpoints are deterministic.
class ParameterSet {
 public:
  Tensor& add(const std::string& name, Eigen::Index rows, Eigen::Index cols,
              Init init = Init::kUniformFanIn);

  Tensor& at(const std::string& name);
  const Tensor& at(const std::string& name) const;
  bool contains(const std::string& name) const { return tensors_.count(name) > 0; }

  std::map<std::string, Tensor>& tensors() { return tensors_; }
  const std::map<std::string, Tensor>& tensors() const { return tensors_; }

  std::size_t parameter_count() const;

  void zero_grads();

  /// Fills values from per-tensor streams derived from (seed, tensor name):
  /// the draw for one tensor does not depend on which other tensors exist.
  /// Uniform(-1/sqrt(cols), +1/sqrt(cols)) for weights, zeros for biases.
  void initialize(std::uint64_t seed);

  /// Deep copy of values only (used for best-epoch snapshots).
  std::map<std::string, Mat> snapshot_values() const;
  void restore_values(const std::map<std::string, Mat>& snapshot);

 private:
  std::map<std::string, Tensor> tensors_;
  std::map<std::string, Init> inits_;
};

}  // namespace etd::nn
