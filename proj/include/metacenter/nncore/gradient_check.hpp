#pragma once

#include "metacenter/nncore/network.hpp"

namespace metacenter::nn {

struct GradientCheckResult {
  double max_relative_error = 0.0;
  Eigen::Index worst_parameter = -1;
  Eigen::Index parameters_checked = 0;
};

// Compares backprop gradients of the MSE loss on (inputs, targets) with
// central differences for every parameter. Relative error per parameter is
// |g_bp - g_fd| / max(|g_bp|, |g_fd|, 1e-8). The network is not modified.
GradientCheckResult gradient_check(const Network& network, const Matrix& inputs,
                                   const Matrix& targets, double h = 1e-5);

// Smallest |pre-activation| over every ReLU unit for the given inputs;
// +infinity when the network has no ReLU layer. Finite differences are only
// meaningful when this is well above h.
double min_relu_margin(const Network& network, const Matrix& inputs);

}  // namespace metacenter::nn
