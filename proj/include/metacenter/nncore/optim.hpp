#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "metacenter/nncore/layers.hpp"

namespace metacenter::nn {

struct LossResult {
  double value = 0.0;
  Matrix grad;  // dL/dpredictions
};

// L = mean((pred - target)^2) over every entry of the (dim x batch) matrices.
LossResult mse_loss(const Matrix& predictions, const Matrix& targets);

struct AdamConfig {
  double learning_rate = 1e-2;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

class Adam {
 public:
  explicit Adam(AdamConfig config = {}) : config_(config) {}

  // Bias-corrected Adam update of every block from its accumulated gradient.
  // Throws TrainingError, leaving parameters untouched, if any gradient is
  // not finite.
  void step(const std::vector<ParameterBlock>& params);

  long steps() const { return step_; }
  const AdamConfig& config() const { return config_; }
  const std::vector<Vector>& first_moments() const { return m_; }
  const std::vector<Vector>& second_moments() const { return v_; }

 private:
  AdamConfig config_;
  long step_ = 0;
  std::vector<Vector> m_;
  std::vector<Vector> v_;
};

// Normal(0, 1/fan_in) entries.
Matrix init_normal(Eigen::Index rows, Eigen::Index cols, Eigen::Index fan_in, std::mt19937_64& rng);

}  // namespace metacenter::nn
