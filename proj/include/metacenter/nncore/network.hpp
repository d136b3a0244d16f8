#pragma once

#include <memory>
#include <vector>

#include <json.hpp>

#include "metacenter/nncore/layers.hpp"

namespace metacenter::nn {

// A feed-forward stack of layers. Copying deep-copies the layers.
class Network {
 public:
  Network() = default;
  Network(const Network& other);
  Network& operator=(const Network& other);
  Network(Network&&) noexcept = default;
  Network& operator=(Network&&) noexcept = default;

  void add(std::unique_ptr<Layer> layer);

  Matrix evaluate(const Matrix& x) const;
  Matrix forward(const Matrix& x);
  void backward(const Matrix& grad_out);

  std::vector<ParameterBlock> parameters();
  Eigen::Index parameter_count();
  void zero_grad();

  // All parameter values concatenated in parameters() order.
  Vector flat_parameters();
  void set_flat_parameters(const Vector& values);
  Vector flat_gradients();

  std::size_t size() const { return layers_.size(); }
  Layer& layer(std::size_t i) { return *layers_.at(i); }
  const Layer& layer(std::size_t i) const { return *layers_.at(i); }
  Eigen::Index input_size() const;
  Eigen::Index output_size() const;

  nlohmann::json to_json() const;
  static Network from_json(const nlohmann::json& j);

 private:
  std::vector<std::unique_ptr<Layer>> layers_;
};

}  // namespace metacenter::nn
