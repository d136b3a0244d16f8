#include <cmath>
#include <limits>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "metacenter/errors.hpp"
#include "metacenter/models.hpp"
#include "metacenter/nncore/gradient_check.hpp"
#include "metacenter/nncore/layers.hpp"
#include "metacenter/nncore/network.hpp"
#include "metacenter/nncore/optim.hpp"

namespace metacenter::nn {
namespace {

Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  Matrix m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = normal(rng);
  }
  return m;
}

// Central differences of sum(upstream .* f(x)) with respect to x.
template <class F>
Matrix numeric_input_gradient(F f, Matrix x, const Matrix& upstream, double h = 1e-6) {
  Matrix g(x.rows(), x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      const double keep = x(i, j);
      x(i, j) = keep + h;
      const double up = (upstream.array() * f(x).array()).sum();
      x(i, j) = keep - h;
      const double down = (upstream.array() * f(x).array()).sum();
      x(i, j) = keep;
      g(i, j) = (up - down) / (2.0 * h);
    }
  }
  return g;
}

double max_relative_error(const Matrix& a, const Matrix& b) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    const double denom = std::max({std::abs(a(i)), std::abs(b(i)), 1e-8});
    worst = std::max(worst, std::abs(a(i) - b(i)) / denom);
  }
  return worst;
}

RbfLayer single_unit(const Vector& center, double sigma) {
  RbfLayer layer(center.size(), 1);
  layer.centers().row(0) = center.transpose();
  layer.log_spreads()(0) = std::log(sigma);
  return layer;
}

TEST(Rbf, KernelValues) {
  const RbfLayer unit = single_unit(Vector::Zero(2), 2.0);
  Matrix x(2, 3);
  x << 0.0, 1.0, 2.0,
       0.0, 0.0, 0.0;
  const Matrix phi = unit.evaluate(x);
  EXPECT_DOUBLE_EQ(phi(0, 0), 1.0);
  EXPECT_NEAR(phi(0, 1), 0.778801, 1e-6);
  EXPECT_NEAR(phi(0, 1), std::exp(-0.25), 1e-15);
  // Distance equal to the spread.
  EXPECT_NEAR(phi(0, 2), 0.367879, 1e-6);
}

TEST(Rbf, ActivationsInUnitInterval) {
  std::mt19937_64 rng(1);
  RbfLayer layer(3, 20);
  layer.centers() = random_matrix(20, 3, rng);
  layer.log_spreads() = random_matrix(20, 1, rng, 0.5);
  const Matrix phi = layer.evaluate(random_matrix(3, 500, rng, 2.0));
  EXPECT_GT(phi.minCoeff(), 0.0);
  EXPECT_LE(phi.maxCoeff(), 1.0);
}

TEST(Rbf, GradientsVanishAtCenter) {
  Vector c(3);
  c << 0.3, -0.2, 1.1;
  RbfLayer unit = single_unit(c, 0.7);
  unit.zero_grad();
  unit.forward(c);
  const Matrix dx = unit.backward(Matrix::Ones(1, 1));
  EXPECT_TRUE(dx.isZero(0.0));
  for (const auto& p : unit.parameters()) {
    for (Eigen::Index i = 0; i < p.size; ++i) EXPECT_EQ(p.grad[i], 0.0) << p.name;
  }
}

TEST(Rbf, BackwardIsLinearInUpstream) {
  std::mt19937_64 rng(2);
  RbfLayer layer(3, 5);
  layer.centers() = random_matrix(5, 3, rng);
  const Matrix x = random_matrix(3, 4, rng);
  const Matrix g = random_matrix(5, 4, rng);
  layer.zero_grad();
  layer.forward(x);
  const Matrix dx1 = layer.backward(g);
  std::vector<double> first;
  for (const auto& p : layer.parameters()) first.insert(first.end(), p.grad, p.grad + p.size);
  layer.zero_grad();
  layer.forward(x);
  const Matrix dx2 = layer.backward(2.0 * g);
  std::size_t k = 0;
  for (const auto& p : layer.parameters()) {
    for (Eigen::Index i = 0; i < p.size; ++i) EXPECT_NEAR(p.grad[i], 2.0 * first[k++], 1e-14);
  }
  EXPECT_TRUE(dx2.isApprox(2.0 * dx1, 1e-14));
}

TEST(Layers, InputGradientsMatchFiniteDifferences) {
  std::mt19937_64 rng(3);
  const Matrix x = random_matrix(3, 6, rng);

  DenseLayer dense(3, 4, Activation::identity);
  dense.weights() = random_matrix(4, 3, rng);
  dense.biases() = random_matrix(4, 1, rng);
  RbfLayer rbf(3, 4);
  rbf.centers() = random_matrix(4, 3, rng);
  for (Layer* layer : std::initializer_list<Layer*>{&dense, &rbf}) {
    const Matrix g = random_matrix(layer->output_size(), x.cols(), rng);
    layer->forward(x);
    const Matrix analytic = layer->backward(g);
    const Matrix numeric =
        numeric_input_gradient([&](const Matrix& in) { return layer->evaluate(in); }, x, g);
    EXPECT_LT(max_relative_error(analytic, numeric), 1e-6) << layer->type();
  }

  NormalizedSumLayer sum(4, 2);
  sum.weights() = random_matrix(2, 4, rng);
  const Matrix phi = rbf.evaluate(x);
  const Matrix g = random_matrix(2, x.cols(), rng);
  sum.forward(phi);
  const Matrix analytic = sum.backward(g);
  const Matrix numeric =
      numeric_input_gradient([&](const Matrix& in) { return sum.evaluate(in); }, phi, g);
  EXPECT_LT(max_relative_error(analytic, numeric), 1e-6);
}

TEST(Layers, PeakNormalizedRbfIsExactInFrontOfNormalizedSum) {
  std::mt19937_64 rng(4);
  Network net;
  auto rbf = std::make_unique<RbfLayer>(3, 5, true);
  rbf->centers() = random_matrix(5, 3, rng);
  auto sum = std::make_unique<NormalizedSumLayer>(5, 3);
  sum->weights() = random_matrix(3, 5, rng);
  net.add(std::move(rbf));
  net.add(std::move(sum));
  const Matrix x = random_matrix(3, 8, rng, 3.0);
  const auto r = gradient_check(net, x, random_matrix(3, 8, rng));
  EXPECT_LT(r.max_relative_error, 1e-6);
}

TEST(NormalizedSum, HandExample) {
  NormalizedSumLayer sum(2, 3);
  sum.weights() << 0.0, 0.0,
                   0.0, 2.0,
                   1.0, 0.0;
  const Matrix y = sum.evaluate(Matrix::Ones(2, 1));
  EXPECT_DOUBLE_EQ(y(0, 0), 0.0);
  EXPECT_DOUBLE_EQ(y(1, 0), 1.0);
  EXPECT_DOUBLE_EQ(y(2, 0), 0.5);
}

TEST(NormalizedSum, OneHotAndUniform) {
  std::mt19937_64 rng(5);
  NormalizedSumLayer sum(4, 3);
  sum.weights() = random_matrix(3, 4, rng);
  for (int i = 0; i < 4; ++i) {
    Matrix phi = Matrix::Zero(4, 1);
    phi(i, 0) = 0.3;
    EXPECT_TRUE(sum.evaluate(phi).isApprox(sum.weights().col(i), 1e-15));
  }
  const Matrix mean = sum.weights().rowwise().mean();
  EXPECT_TRUE(sum.evaluate(Matrix::Constant(4, 1, 0.2)).isApprox(mean, 1e-15));
}

TEST(NormalizedSum, UnderflowIsReported) {
  NormalizedSumLayer sum(3, 1);
  Matrix phi = Matrix::Zero(3, 2);
  phi(0, 0) = 1.0;
  EXPECT_THROW(sum.evaluate(phi), NumericalError);
  EXPECT_THROW(NormalizedSumLayer::normalize(phi), NumericalError);
}

// GRNN structure: probabilities sum to one and each output lies between the
// smallest and largest entry of its weight row.
TEST(NormalizedSum, ConvexCombinationOverRandomInputs) {
  std::mt19937_64 rng(6);
  const Network net = metacenter::build(metacenter::NetworkKind::grnn, 6);
  const auto& rbf = dynamic_cast<const RbfLayer&>(net.layer(0));
  const auto& sum = dynamic_cast<const NormalizedSumLayer&>(net.layer(1));
  const Matrix x = random_matrix(3, 10000, rng, 3.0);
  const Matrix p = NormalizedSumLayer::normalize(rbf.evaluate(x));
  EXPECT_GE(p.minCoeff(), 0.0);
  EXPECT_LT((p.colwise().sum().array() - 1.0).abs().maxCoeff(), 1e-12);
  const Matrix y = net.evaluate(x);
  for (Eigen::Index r = 0; r < y.rows(); ++r) {
    EXPECT_GE(y.row(r).minCoeff(), sum.weights().row(r).minCoeff() - 1e-12);
    EXPECT_LE(y.row(r).maxCoeff(), sum.weights().row(r).maxCoeff() + 1e-12);
  }
}

TEST(MseLoss, Values) {
  Matrix pred(3, 1), target = Matrix::Zero(3, 1);
  pred << 1.0, 2.0, 3.0;
  const LossResult r = mse_loss(pred, target);
  EXPECT_NEAR(r.value, 4.6667, 1e-4);
  EXPECT_DOUBLE_EQ(r.value, 14.0 / 3.0);
  EXPECT_TRUE(r.grad.isApprox(2.0 * pred / 3.0, 1e-15));
  EXPECT_EQ(mse_loss(pred, pred).value, 0.0);
  EXPECT_THROW(mse_loss(Matrix(3, 0), Matrix(3, 0)), std::invalid_argument);
  EXPECT_THROW(mse_loss(pred, Matrix::Zero(2, 1)), std::invalid_argument);
}

TEST(MseLoss, RootRelatesToAverageError) {
  // 6.65 cm^2 per coordinate is an RMS error of about 2.58 cm.
  EXPECT_NEAR(std::sqrt(6.65), 2.58, 5e-3);
}

struct AdamFixture {
  Vector value = Vector::Zero(3);
  Vector grad = Vector::Zero(3);
  std::vector<ParameterBlock> blocks() { return {{"p", value.data(), grad.data(), 3}}; }
};

TEST(Adam, ZeroGradientIsNoOp) {
  AdamFixture f;
  f.value << 1.0, -2.0, 3.0;
  const Vector before = f.value;
  Adam adam;
  adam.step(f.blocks());
  EXPECT_EQ(adam.steps(), 1);
  EXPECT_TRUE(f.value == before);
}

TEST(Adam, FirstAndSecondStep) {
  AdamFixture f;
  f.grad.setOnes();
  Adam adam(AdamConfig{0.01});
  adam.step(f.blocks());
  const double first = f.value(0);
  EXPECT_NEAR(first, -0.01, 1e-9);
  adam.step(f.blocks());
  const double second = f.value(0) - first;
  EXPECT_LE(std::abs(second), std::abs(first) + 1e-6);
  EXPECT_NEAR(adam.first_moments()[0](0), 0.19, 1e-15);
  EXPECT_NEAR(adam.second_moments()[0](0), 1.0 - 0.999 * 0.999, 1e-15);
}

TEST(Adam, NonFiniteGradientAborts) {
  AdamFixture f;
  f.grad << 1.0, std::numeric_limits<double>::quiet_NaN(), 0.0;
  Adam adam;
  try {
    adam.step(f.blocks());
    FAIL() << "expected TrainingError";
  } catch (const TrainingError& e) {
    EXPECT_EQ(e.iteration(), 1);
  }
  EXPECT_TRUE(f.value.isZero(0.0));
}

TEST(InitNormal, DeterministicWithExpectedSpread) {
  std::mt19937_64 a(42), b(42);
  EXPECT_TRUE(init_normal(20, 20, 20, a) == init_normal(20, 20, 20, b));

  std::mt19937_64 rng(0);
  const Matrix w = init_normal(100000, 1, 20, rng);
  const double mean = w.mean();
  const double sd = std::sqrt((w.array() - mean).square().sum() / (w.size() - 1));
  EXPECT_NEAR(sd, 1.0 / std::sqrt(20.0), 0.05 / std::sqrt(20.0));
  EXPECT_NEAR(mean, 0.0, 0.01);
}

TEST(InitNormal, BreaksSymmetryInEveryLayer) {
  for (auto kind : metacenter::kAllNetworkKinds) {
    Network net = metacenter::build(kind, 1);
    for (const auto& p : net.parameters()) {
      if (p.name.find("bias") != std::string::npos || p.name.find("spread") != std::string::npos) {
        continue;
      }
      std::set<double> distinct(p.value, p.value + p.size);
      EXPECT_GE(distinct.size(), 2u) << p.name;
    }
  }
}

TEST(GradientCheck, LinearNetworkIsExact) {
  std::mt19937_64 rng(8);
  Network net;
  auto dense = std::make_unique<DenseLayer>(4, 3, Activation::identity);
  dense->weights() = random_matrix(3, 4, rng);
  dense->biases() = random_matrix(3, 1, rng);
  net.add(std::move(dense));
  const auto r = gradient_check(net, random_matrix(4, 10, rng), random_matrix(3, 10, rng));
  EXPECT_LT(r.max_relative_error, 1e-6);
  EXPECT_EQ(r.parameters_checked, 15);
}

TEST(GradientCheck, AllArchitecturesPassAtBothSteps) {
  for (auto kind : metacenter::kAllNetworkKinds) {
    for (double h : {1e-5, 2e-5}) {
      const auto r = metacenter::check_gradients(kind, 0, 16, h);
      EXPECT_LT(r.max_relative_error, 1e-4) << metacenter::to_tag(kind) << " h=" << h;
    }
  }
}

TEST(GradientCheck, FlatGradientMatchesOneCentralDifference) {
  std::mt19937_64 rng(9);
  Network net = metacenter::build(metacenter::NetworkKind::rbf, 3);
  const Matrix x = random_matrix(3, 5, rng);
  const Matrix y = random_matrix(3, 5, rng);
  Network copy = net;
  copy.zero_grad();
  copy.backward(mse_loss(copy.forward(x), y).grad);
  const Vector bp = copy.flat_gradients();
  Vector shifted = net.flat_parameters();
  shifted(0) += 1e-5;
  net.set_flat_parameters(shifted);
  const double loss_up = mse_loss(net.evaluate(x), y).value;
  shifted(0) -= 2e-5;
  net.set_flat_parameters(shifted);
  const double loss_down = mse_loss(net.evaluate(x), y).value;
  EXPECT_NEAR(bp(0), (loss_up - loss_down) / 2e-5, 1e-6 * std::max(1.0, std::abs(bp(0))));
}

TEST(Network, FlatParametersRoundTrip) {
  Network net = metacenter::build(metacenter::NetworkKind::fully_connected, 4);
  Vector p = net.flat_parameters();
  EXPECT_EQ(p.size(), net.parameter_count());
  p.setLinSpaced(-1.0, 1.0);
  net.set_flat_parameters(p);
  EXPECT_TRUE(net.flat_parameters() == p);
  EXPECT_THROW(net.set_flat_parameters(Vector::Zero(3)), std::invalid_argument);
}

TEST(Network, CopiesAreDeep) {
  Network a = metacenter::build(metacenter::NetworkKind::rbf, 4);
  Network b = a;
  Vector p = b.flat_parameters();
  p.array() += 1.0;
  b.set_flat_parameters(p);
  EXPECT_FALSE(a.flat_parameters() == b.flat_parameters());
}

TEST(Network, JsonRoundTripPreservesOutputs) {
  std::mt19937_64 rng(10);
  for (auto kind : metacenter::kAllNetworkKinds) {
    const Network net = metacenter::build(kind, 11);
    const Network back = Network::from_json(nlohmann::json::parse(net.to_json().dump()));
    const Matrix x = random_matrix(net.input_size(), 7, rng);
    EXPECT_TRUE(net.evaluate(x) == back.evaluate(x)) << metacenter::to_tag(kind);
  }
}

TEST(Network, RejectsMismatchedLayers) {
  Network net;
  net.add(std::make_unique<DenseLayer>(3, 4, Activation::relu));
  EXPECT_THROW(net.add(std::make_unique<DenseLayer>(5, 2, Activation::relu)), std::invalid_argument);
  EXPECT_THROW(Network::from_json(nlohmann::json::object()), ConfigurationError);
}

}  // namespace
}  // namespace metacenter::nn
