#include "metacenter/nncore/optim.hpp"

#include <cmath>
#include <stdexcept>

#include "metacenter/errors.hpp"

namespace metacenter::nn {

LossResult mse_loss(const Matrix& predictions, const Matrix& targets) {
  if (predictions.rows() != targets.rows() || predictions.cols() != targets.cols()) {
    throw std::invalid_argument("mse_loss: shape mismatch");
  }
  if (predictions.size() == 0) throw std::invalid_argument("mse_loss: empty batch");
  const double n = static_cast<double>(predictions.size());
  LossResult r;
  r.grad = predictions - targets;
  r.value = r.grad.squaredNorm() / n;
  r.grad *= 2.0 / n;
  return r;
}

void Adam::step(const std::vector<ParameterBlock>& params) {
  if (m_.empty()) {
    for (const auto& p : params) {
      m_.push_back(Vector::Zero(p.size));
      v_.push_back(Vector::Zero(p.size));
    }
  }
  if (m_.size() != params.size()) throw std::invalid_argument("Adam: parameter set changed");
  for (std::size_t b = 0; b < params.size(); ++b) {
    if (m_[b].size() != params[b].size) throw std::invalid_argument("Adam: block size changed");
    if (!Eigen::Map<const Vector>(params[b].grad, params[b].size).allFinite()) {
      throw TrainingError("non-finite gradient in block '" + params[b].name + "'", step_ + 1);
    }
  }

  ++step_;
  const double bc1 = 1.0 - std::pow(config_.beta1, static_cast<double>(step_));
  const double bc2 = 1.0 - std::pow(config_.beta2, static_cast<double>(step_));
  for (std::size_t b = 0; b < params.size(); ++b) {
    Eigen::Map<Vector> value(params[b].value, params[b].size);
    Eigen::Map<const Vector> grad(params[b].grad, params[b].size);
    m_[b] = config_.beta1 * m_[b] + (1.0 - config_.beta1) * grad;
    v_[b] = config_.beta2 * v_[b] + (1.0 - config_.beta2) * grad.cwiseAbs2();
    value.array() -= config_.learning_rate * (m_[b].array() / bc1) /
                     ((v_[b].array() / bc2).sqrt() + config_.epsilon);
  }
}

Matrix init_normal(Eigen::Index rows, Eigen::Index cols, Eigen::Index fan_in,
                   std::mt19937_64& rng) {
  if (fan_in <= 0) throw std::invalid_argument("init_normal: fan_in must be positive");
  std::normal_distribution<double> dist(0.0, 1.0 / std::sqrt(static_cast<double>(fan_in)));
  Matrix m(rows, cols);
  // Fill in row-major order so the draw sequence matches the serialized layout.
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = dist(rng);
  }
  return m;
}

}  // namespace metacenter::nn
