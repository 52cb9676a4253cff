#pragma once

#include "etd/nn/gradcheck.hpp"

namespace etd {

/// Finite-difference verification of the three trained losses on 4-example
/// batches with a reduced configuration (d_hid 8, d_type 8, vocabulary of
/// 12). The filter check runs with a contextual provider so the layer-mixing
/// parameters are covered; relabel and typer run with the static provider.
struct StandardGradChecks {
  nn::GradCheckReport filter;
  nn::GradCheckReport relabel;
  nn::GradCheckReport typer;
  bool passed = false;
};

StandardGradChecks run_standard_grad_checks(double tolerance = 1e-4,
                                            double fd_step = 1e-5);

}  // namespace etd
