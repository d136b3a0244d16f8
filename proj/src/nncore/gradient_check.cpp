#include "metacenter/nncore/gradient_check.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "metacenter/nncore/optim.hpp"

namespace metacenter::nn {

GradientCheckResult gradient_check(const Network& network, const Matrix& inputs,
                                   const Matrix& targets, double h) {
  Network net = network;
  net.zero_grad();
  const Matrix pred = net.forward(inputs);
  net.backward(mse_loss(pred, targets).grad);
  const Vector analytic = net.flat_gradients();
  const Vector theta = net.flat_parameters();

  GradientCheckResult result;
  result.parameters_checked = theta.size();
  Vector probe = theta;
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    probe[i] = theta[i] + h;
    net.set_flat_parameters(probe);
    const double up = mse_loss(net.evaluate(inputs), targets).value;
    probe[i] = theta[i] - h;
    net.set_flat_parameters(probe);
    const double down = mse_loss(net.evaluate(inputs), targets).value;
    probe[i] = theta[i];

    const double numeric = (up - down) / (2.0 * h);
    const double denom = std::max({std::abs(analytic[i]), std::abs(numeric), 1e-8});
    const double rel = std::abs(analytic[i] - numeric) / denom;
    if (rel > result.max_relative_error || result.worst_parameter < 0) {
      result.max_relative_error = rel;
      result.worst_parameter = i;
    }
  }
  return result;
}

double min_relu_margin(const Network& network, const Matrix& inputs) {
  double margin = std::numeric_limits<double>::infinity();
  Matrix h = inputs;
  for (std::size_t i = 0; i < network.size(); ++i) {
    const Layer& layer = network.layer(i);
    if (const auto* dense = dynamic_cast<const DenseLayer*>(&layer);
        dense != nullptr && dense->activation() == Activation::relu) {
      Matrix z = dense->weights() * h;
      z.colwise() += dense->biases();
      margin = std::min(margin, z.cwiseAbs().minCoeff());
    }
    h = layer.evaluate(h);
  }
  return margin;
}

}  // namespace metacenter::nn
