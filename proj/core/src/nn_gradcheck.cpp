#include "etd/nn/gradcheck.hpp"

#include <cmath>
#include <sstream>

namespace etd::nn {

std::string GradCheckReport::to_string() const {
  std::ostringstream out;
  out.precision(3);
  out << std::scientific;
  for (const auto& entry : entries) {
    out << (entry.max_rel_error <= tolerance ? "  ok   " : "  FAIL ")
        << entry.max_rel_error << "  " << entry.tensor << " (" << entry.elements
        << " elements)\n";
  }
  out << (passed ? "PASS" : "FAIL") << ": max relative error " << max_rel_error
      << " vs tolerance " << tolerance << "\n";
  return out.str();
}

GradCheckReport grad_check(ParameterSet& params,
                           const std::function<double()>& loss,
                           const std::function<void()>& compute_grads,
                           double tolerance, double fd_step) {
  GradCheckReport report;
  report.tolerance = tolerance;

  const double base = loss();
  if (!std::isfinite(base)) {
    throw std::runtime_error("grad_check: loss is not finite");
  }

  compute_grads();
  std::map<std::string, Mat> analytic;
  for (const auto& [name, tensor] : params.tensors()) {
    analytic.emplace(name, tensor.grad);
  }

  for (auto& [name, tensor] : params.tensors()) {
    GradCheckEntry entry;
    entry.tensor = name;
    entry.elements = tensor.value.size();
    const Mat& grads = analytic.at(name);
    for (Eigen::Index r = 0; r < tensor.value.rows(); ++r) {
      for (Eigen::Index c = 0; c < tensor.value.cols(); ++c) {
        const double saved = tensor.value(r, c);
        tensor.value(r, c) = saved + fd_step;
        const double plus = loss();
        tensor.value(r, c) = saved - fd_step;
        const double minus = loss();
        tensor.value(r, c) = saved;
        if (!std::isfinite(plus) || !std::isfinite(minus)) {
          throw std::runtime_error("grad_check: perturbed loss is not finite at " + name);
        }
        const double numeric = (plus - minus) / (2.0 * fd_step);
        const double a = grads(r, c);
        const double scale = std::max({std::abs(a), std::abs(numeric), 1e-6});
        const double rel = std::abs(a - numeric) / scale;
        if (rel > entry.max_rel_error) entry.max_rel_error = rel;
      }
    }
    report.max_rel_error = std::max(report.max_rel_error, entry.max_rel_error);
    report.entries.push_back(std::move(entry));
  }
  report.passed = report.max_rel_error <= tolerance;
  return report;
}

}  // namespace etd::nn
