#include "metacenter/nncore/layers.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "metacenter/errors.hpp"

namespace metacenter::nn {
namespace {

constexpr double kUnderflowThreshold = 1e-300;

using RowMajorMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

nlohmann::json row_major(const Matrix& m) {
  const RowMajorMatrix r = m;
  return std::vector<double>(r.data(), r.data() + r.size());
}

nlohmann::json flat(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Matrix matrix_from(const nlohmann::json& j, Eigen::Index rows, Eigen::Index cols) {
  const auto values = j.get<std::vector<double>>();
  if (static_cast<Eigen::Index>(values.size()) != rows * cols) {
    throw ConfigurationError("parameter array has " + std::to_string(values.size()) +
                             " entries, expected " + std::to_string(rows * cols));
  }
  return Eigen::Map<const RowMajorMatrix>(values.data(), rows, cols);
}

Vector vector_from(const nlohmann::json& j, Eigen::Index size) {
  const auto values = j.get<std::vector<double>>();
  if (static_cast<Eigen::Index>(values.size()) != size) {
    throw ConfigurationError("parameter vector has wrong length");
  }
  return Eigen::Map<const Vector>(values.data(), size);
}

void check_input(const Matrix& x, Eigen::Index expected, const char* layer) {
  if (x.rows() != expected) {
    throw std::invalid_argument(std::string(layer) + ": input has " + std::to_string(x.rows()) +
                                " rows, expected " + std::to_string(expected));
  }
}

}  // namespace

Eigen::Index Layer::parameter_count() {
  Eigen::Index n = 0;
  for (const auto& p : parameters()) n += p.size;
  return n;
}

void Layer::zero_grad() {
  for (auto& p : parameters()) std::fill(p.grad, p.grad + p.size, 0.0);
}

// --- DenseLayer ------------------------------------------------------------

DenseLayer::DenseLayer(Eigen::Index in, Eigen::Index out, Activation activation)
    : weights_(Matrix::Zero(out, in)),
      biases_(Vector::Zero(out)),
      activation_(activation),
      grad_weights_(Matrix::Zero(out, in)),
      grad_biases_(Vector::Zero(out)) {}

Matrix DenseLayer::evaluate(const Matrix& x) const {
  check_input(x, input_size(), "dense");
  Matrix z = weights_ * x;
  z.colwise() += biases_;
  if (activation_ == Activation::relu) z = z.cwiseMax(0.0);
  return z;
}

Matrix DenseLayer::forward(const Matrix& x) {
  check_input(x, input_size(), "dense");
  cached_input_ = x;
  cached_preactivation_ = weights_ * x;
  cached_preactivation_.colwise() += biases_;
  if (activation_ == Activation::relu) return cached_preactivation_.cwiseMax(0.0);
  return cached_preactivation_;
}

Matrix DenseLayer::backward(const Matrix& grad_out) {
  Matrix g = grad_out;
  if (activation_ == Activation::relu) {
    g = (cached_preactivation_.array() > 0.0).select(g, 0.0);
  }
  grad_weights_.noalias() += g * cached_input_.transpose();
  grad_biases_ += g.rowwise().sum();
  return weights_.transpose() * g;
}

std::vector<ParameterBlock> DenseLayer::parameters() {
  return {{"weights", weights_.data(), grad_weights_.data(), weights_.size()},
          {"biases", biases_.data(), grad_biases_.data(), biases_.size()}};
}

nlohmann::json DenseLayer::to_json() const {
  return {{"type", type()},
          {"shape", {weights_.rows(), weights_.cols()}},
          {"activation", activation_ == Activation::relu ? "relu" : "identity"},
          {"weights", row_major(weights_)},
          {"biases", flat(biases_)}};
}

std::unique_ptr<DenseLayer> DenseLayer::from_json(const nlohmann::json& j) {
  const auto out = j.at("shape").at(0).get<Eigen::Index>();
  const auto in = j.at("shape").at(1).get<Eigen::Index>();
  const auto act = j.at("activation").get<std::string>();
  if (act != "relu" && act != "identity") throw ConfigurationError("unknown activation " + act);
  auto layer = std::make_unique<DenseLayer>(in, out,
                                            act == "relu" ? Activation::relu : Activation::identity);
  layer->weights_ = matrix_from(j.at("weights"), out, in);
  layer->biases_ = vector_from(j.at("biases"), out);
  return layer;
}

// --- RbfLayer --------------------------------------------------------------

RbfLayer::RbfLayer(Eigen::Index in, Eigen::Index units, bool peak_normalized)
    : centers_(Matrix::Zero(units, in)),
      log_spreads_(Vector::Zero(units)),
      peak_normalized_(peak_normalized),
      grad_centers_(Matrix::Zero(units, in)),
      grad_log_spreads_(Vector::Zero(units)) {}

Matrix RbfLayer::squared_distances(const Matrix& x) const {
  // ||x||^2 - 2 c.x + ||c||^2 loses accuracy near the centers; form the
  // differences explicitly.
  const Eigen::Index k = centers_.rows();
  Matrix d2(k, x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    for (Eigen::Index i = 0; i < k; ++i) {
      d2(i, j) = (x.col(j) - centers_.row(i).transpose()).squaredNorm();
    }
  }
  return d2;
}

Matrix RbfLayer::activations(const Matrix& d2) const {
  const Vector inv_var = (-2.0 * log_spreads_.array()).exp();
  Matrix e = -(inv_var.asDiagonal() * d2);
  if (peak_normalized_) {
    for (Eigen::Index j = 0; j < e.cols(); ++j) e.col(j).array() -= e.col(j).maxCoeff();
  }
  return e.array().exp();
}

Matrix RbfLayer::evaluate(const Matrix& x) const {
  check_input(x, input_size(), "rbf");
  return activations(squared_distances(x));
}

Matrix RbfLayer::forward(const Matrix& x) {
  check_input(x, input_size(), "rbf");
  cached_input_ = x;
  cached_d2_ = squared_distances(x);
  cached_phi_ = activations(cached_d2_);
  return cached_phi_;
}

Matrix RbfLayer::backward(const Matrix& grad_out) {
  const Vector inv_var = (-2.0 * log_spreads_.array()).exp();
  // h_ij = g_ij * phi_ij;  a_ij = 2 h_ij / sigma_i^2.
  const Matrix h = grad_out.cwiseProduct(cached_phi_);
  const Matrix a = (2.0 * inv_var).asDiagonal() * h;

  // dphi_i/dc_i = phi_i * 2 (x - c_i) / sigma_i^2
  grad_centers_.noalias() += a * cached_input_.transpose();
  grad_centers_ -= a.rowwise().sum().asDiagonal() * centers_;
  // dphi_i/drho_i = phi_i * 2 ||x - c_i||^2 / sigma_i^2
  grad_log_spreads_ += a.cwiseProduct(cached_d2_).rowwise().sum();
  // dphi_i/dx = -dphi_i/dc_i
  Matrix grad_in = centers_.transpose() * a;
  grad_in -= cached_input_ * a.colwise().sum().asDiagonal();
  return grad_in;
}

std::vector<ParameterBlock> RbfLayer::parameters() {
  return {{"centers", centers_.data(), grad_centers_.data(), centers_.size()},
          {"log_spreads", log_spreads_.data(), grad_log_spreads_.data(), log_spreads_.size()}};
}

nlohmann::json RbfLayer::to_json() const {
  return {{"type", type()},
          {"shape", {centers_.rows(), centers_.cols()}},
          {"peak_normalized", peak_normalized_},
          {"centers", row_major(centers_)},
          {"log_spreads", flat(log_spreads_)}};
}

std::unique_ptr<RbfLayer> RbfLayer::from_json(const nlohmann::json& j) {
  const auto k = j.at("shape").at(0).get<Eigen::Index>();
  const auto in = j.at("shape").at(1).get<Eigen::Index>();
  auto layer = std::make_unique<RbfLayer>(in, k, j.value("peak_normalized", false));
  layer->centers_ = matrix_from(j.at("centers"), k, in);
  layer->log_spreads_ = vector_from(j.at("log_spreads"), k);
  return layer;
}

// --- NormalizedSumLayer ----------------------------------------------------

NormalizedSumLayer::NormalizedSumLayer(Eigen::Index units, Eigen::Index out)
    : weights_(Matrix::Zero(out, units)), grad_weights_(Matrix::Zero(out, units)) {}

Matrix NormalizedSumLayer::normalize(const Matrix& phi) {
  Matrix p = phi;
  for (Eigen::Index j = 0; j < p.cols(); ++j) {
    const double s = p.col(j).sum();
    if (!(s >= kUnderflowThreshold)) {
      throw NumericalError("normalized sum underflow: input is far from every RBF center");
    }
    p.col(j) /= s;
  }
  return p;
}

Matrix NormalizedSumLayer::evaluate(const Matrix& phi) const {
  check_input(phi, input_size(), "normalized_sum");
  return weights_ * normalize(phi);
}

Matrix NormalizedSumLayer::forward(const Matrix& phi) {
  check_input(phi, input_size(), "normalized_sum");
  cached_sum_ = phi.colwise().sum().transpose();
  cached_p_ = normalize(phi);
  return weights_ * cached_p_;
}

Matrix NormalizedSumLayer::backward(const Matrix& grad_out) {
  grad_weights_.noalias() += grad_out * cached_p_.transpose();
  const Matrix gp = weights_.transpose() * grad_out;
  // d p_i / d phi_l = (delta_il - p_i) / S
  const Eigen::RowVectorXd inner = gp.cwiseProduct(cached_p_).colwise().sum();
  Matrix grad_in = gp;
  grad_in.rowwise() -= inner;
  grad_in *= cached_sum_.cwiseInverse().asDiagonal();
  return grad_in;
}

std::vector<ParameterBlock> NormalizedSumLayer::parameters() {
  return {{"weights", weights_.data(), grad_weights_.data(), weights_.size()}};
}

nlohmann::json NormalizedSumLayer::to_json() const {
  return {{"type", type()},
          {"shape", {weights_.rows(), weights_.cols()}},
          {"weights", row_major(weights_)}};
}

std::unique_ptr<NormalizedSumLayer> NormalizedSumLayer::from_json(const nlohmann::json& j) {
  const auto out = j.at("shape").at(0).get<Eigen::Index>();
  const auto k = j.at("shape").at(1).get<Eigen::Index>();
  auto layer = std::make_unique<NormalizedSumLayer>(k, out);
  layer->weights_ = matrix_from(j.at("weights"), out, k);
  return layer;
}

std::unique_ptr<Layer> layer_from_json(const nlohmann::json& j) {
  const auto type = j.at("type").get<std::string>();
  if (type == "dense") return DenseLayer::from_json(j);
  if (type == "rbf") return RbfLayer::from_json(j);
  if (type == "normalized_sum") return NormalizedSumLayer::from_json(j);
  throw ConfigurationError("unknown layer type " + type);
}

}  // namespace metacenter::nn
