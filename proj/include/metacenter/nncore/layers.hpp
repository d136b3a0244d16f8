#pragma once

// Layers with hand-written forward and backward passes. Batches are stored
// column-wise: an input batch is an (input_size x batch) matrix.

#include <memory>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

namespace metacenter::nn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// View of one trainable tensor and its gradient accumulator, both flat in
// storage order.
struct ParameterBlock {
  std::string name;
  double* value;
  double* grad;
  Eigen::Index size;
};

enum class Activation { identity, relu };

class Layer {
 public:
  virtual ~Layer() = default;

  virtual std::string type() const = 0;
  virtual Eigen::Index input_size() const = 0;
  virtual Eigen::Index output_size() const = 0;

  // No caching; safe to call concurrently on a shared layer.
  virtual Matrix evaluate(const Matrix& x) const = 0;
  // Same result as evaluate, caching what backward needs.
  virtual Matrix forward(const Matrix& x) = 0;
  // Adds parameter gradients into the accumulators and returns dL/dx for
  // the batch given to the last forward call.
  virtual Matrix backward(const Matrix& grad_out) = 0;

  virtual std::vector<ParameterBlock> parameters() = 0;
  virtual std::unique_ptr<Layer> clone() const = 0;
  virtual nlohmann::json to_json() const = 0;

  Eigen::Index parameter_count();
  void zero_grad();
};

class DenseLayer final : public Layer {
 public:
  DenseLayer(Eigen::Index in, Eigen::Index out, Activation activation);

  std::string type() const override { return "dense"; }
  Eigen::Index input_size() const override { return weights_.cols(); }
  Eigen::Index output_size() const override { return weights_.rows(); }
  Matrix evaluate(const Matrix& x) const override;
  Matrix forward(const Matrix& x) override;
  Matrix backward(const Matrix& grad_out) override;
  std::vector<ParameterBlock> parameters() override;
  std::unique_ptr<Layer> clone() const override { return std::make_unique<DenseLayer>(*this); }
  nlohmann::json to_json() const override;
  static std::unique_ptr<DenseLayer> from_json(const nlohmann::json& j);

  Matrix& weights() { return weights_; }
  const Matrix& weights() const { return weights_; }
  Vector& biases() { return biases_; }
  const Vector& biases() const { return biases_; }
  Activation activation() const { return activation_; }

 private:
  Matrix weights_;
  Vector biases_;
  Activation activation_;
  Matrix grad_weights_;
  Vector grad_biases_;
  Matrix cached_input_;
  Matrix cached_preactivation_;
};

// Gaussian radial basis units:
//   phi_i(x) = exp(-||x - c_i||^2 / sigma_i^2),  sigma_i = exp(rho_i).
// The trained spread parameter is rho, which keeps sigma strictly positive.
//
// With peak normalization enabled, each sample's activations are divided by
// their largest value before being returned. This is only meaningful in
// front of a scale-invariant consumer such as NormalizedSumLayer, where it
// leaves the result unchanged while preventing underflow far from every
// center. The per-sample scale is treated as a constant in backward, which
// is exact for such consumers.
class RbfLayer final : public Layer {
 public:
  RbfLayer(Eigen::Index in, Eigen::Index units, bool peak_normalized = false);

  std::string type() const override { return "rbf"; }
  Eigen::Index input_size() const override { return centers_.cols(); }
  Eigen::Index output_size() const override { return centers_.rows(); }
  Matrix evaluate(const Matrix& x) const override;
  Matrix forward(const Matrix& x) override;
  Matrix backward(const Matrix& grad_out) override;
  std::vector<ParameterBlock> parameters() override;
  std::unique_ptr<Layer> clone() const override { return std::make_unique<RbfLayer>(*this); }
  nlohmann::json to_json() const override;
  static std::unique_ptr<RbfLayer> from_json(const nlohmann::json& j);

  // Row i is center c_i.
  Matrix& centers() { return centers_; }
  const Matrix& centers() const { return centers_; }
  Vector& log_spreads() { return log_spreads_; }
  const Vector& log_spreads() const { return log_spreads_; }
  Vector spreads() const { return log_spreads_.array().exp(); }
  bool peak_normalized() const { return peak_normalized_; }

 private:
  Matrix squared_distances(const Matrix& x) const;
  Matrix activations(const Matrix& d2) const;

  Matrix centers_;
  Vector log_spreads_;
  bool peak_normalized_;
  Matrix grad_centers_;
  Vector grad_log_spreads_;
  Matrix cached_input_;
  Matrix cached_d2_;
  Matrix cached_phi_;
};

// Summation layer of a GRNN: p = phi / sum(phi), y = W p. No bias, so every
// output is a convex combination of the columns of W.
class NormalizedSumLayer final : public Layer {
 public:
  NormalizedSumLayer(Eigen::Index units, Eigen::Index out);

  std::string type() const override { return "normalized_sum"; }
  Eigen::Index input_size() const override { return weights_.cols(); }
  Eigen::Index output_size() const override { return weights_.rows(); }
  // Throws NumericalError when sum(phi) < 1e-300 for any sample.
  Matrix evaluate(const Matrix& phi) const override;
  Matrix forward(const Matrix& phi) override;
  Matrix backward(const Matrix& grad_out) override;
  std::vector<ParameterBlock> parameters() override;
  std::unique_ptr<Layer> clone() const override {
    return std::make_unique<NormalizedSumLayer>(*this);
  }
  nlohmann::json to_json() const override;
  static std::unique_ptr<NormalizedSumLayer> from_json(const nlohmann::json& j);

  Matrix& weights() { return weights_; }
  const Matrix& weights() const { return weights_; }

  // phi / colsum(phi), with the same underflow check as evaluate.
  static Matrix normalize(const Matrix& phi);

 private:
  Matrix weights_;
  Matrix grad_weights_;
  Matrix cached_p_;
  Vector cached_sum_;
};

std::unique_ptr<Layer> layer_from_json(const nlohmann::json& j);

}  // namespace metacenter::nn
