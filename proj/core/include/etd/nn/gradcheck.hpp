#pragma once

#include <functional>
#include <string>
#include <vector>

#include "etd/nn/params.hpp"

namespace etd::nn {

struct GradCheckEntry {
  std::string tensor;
  double max_rel_error = 0.0;
  Eigen::Index elements = 0;
};

struct GradCheckReport {
  std::vector<GradCheckEntry> entries;
  double max_rel_error = 0.0;
  double tolerance = 0.0;
  bool passed = false;

  std::string to_string() const;
};

/// Central finite differences against analytic gradients.
///
/// `loss` evaluates the scalar loss at the current parameter values (forward
/// only, deterministic). `compute_grads` zeroes the gradients and runs a full
/// forward/backward, leaving analytic gradients in `params`. Per element the
/// relative error is |analytic - numeric| / max(|analytic|, |numeric|, 1e-6);
/// a tensor passes when its max is within `tolerance`. Evaluation must be in
/// 64-bit mode (this library computes everything in double).
GradCheckReport grad_check(ParameterSet& params,
                           const std::function<double()>& loss,
                           const std::function<void()>& compute_grads,
                           double tolerance, double fd_step = 1e-5);

}  // namespace etd::nn
