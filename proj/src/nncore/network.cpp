#include "metacenter/nncore/network.hpp"

#include <stdexcept>

#include "metacenter/errors.hpp"

namespace metacenter::nn {

Network::Network(const Network& other) {
  for (const auto& l : other.layers_) layers_.push_back(l->clone());
}

Network& Network::operator=(const Network& other) {
  if (this != &other) {
    Network copy(other);
    layers_ = std::move(copy.layers_);
  }
  return *this;
}

void Network::add(std::unique_ptr<Layer> layer) {
  if (!layers_.empty() && layers_.back()->output_size() != layer->input_size()) {
    throw std::invalid_argument("layer input size does not match previous output size");
  }
  layers_.push_back(std::move(layer));
}

Matrix Network::evaluate(const Matrix& x) const {
  Matrix h = x;
  for (const auto& l : layers_) h = l->evaluate(h);
  return h;
}

Matrix Network::forward(const Matrix& x) {
  Matrix h = x;
  for (auto& l : layers_) h = l->forward(h);
  return h;
}

void Network::backward(const Matrix& grad_out) {
  Matrix g = grad_out;
  for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) g = (*it)->backward(g);
}

std::vector<ParameterBlock> Network::parameters() {
  std::vector<ParameterBlock> out;
  for (auto& l : layers_) {
    for (auto& p : l->parameters()) out.push_back(p);
  }
  return out;
}

Eigen::Index Network::parameter_count() {
  Eigen::Index n = 0;
  for (const auto& p : parameters()) n += p.size;
  return n;
}

void Network::zero_grad() {
  for (auto& l : layers_) l->zero_grad();
}

Vector Network::flat_parameters() {
  Vector out(parameter_count());
  Eigen::Index k = 0;
  for (const auto& p : parameters()) {
    out.segment(k, p.size) = Eigen::Map<const Vector>(p.value, p.size);
    k += p.size;
  }
  return out;
}

void Network::set_flat_parameters(const Vector& values) {
  if (values.size() != parameter_count()) throw std::invalid_argument("parameter count mismatch");
  Eigen::Index k = 0;
  for (auto& p : parameters()) {
    Eigen::Map<Vector>(p.value, p.size) = values.segment(k, p.size);
    k += p.size;
  }
}

Vector Network::flat_gradients() {
  Vector out(parameter_count());
  Eigen::Index k = 0;
  for (const auto& p : parameters()) {
    out.segment(k, p.size) = Eigen::Map<const Vector>(p.grad, p.size);
    k += p.size;
  }
  return out;
}

Eigen::Index Network::input_size() const {
  return layers_.empty() ? 0 : layers_.front()->input_size();
}

Eigen::Index Network::output_size() const {
  return layers_.empty() ? 0 : layers_.back()->output_size();
}

nlohmann::json Network::to_json() const {
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& l : layers_) layers.push_back(l->to_json());
  return layers;
}

Network Network::from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw ConfigurationError("network layers must be a JSON array");
  Network net;
  for (const auto& l : j) net.add(layer_from_json(l));
  return net;
}

}  // namespace metacenter::nn
