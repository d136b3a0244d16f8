#include "metacenter/models.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "metacenter/errors.hpp"
#include "metacenter/nncore/optim.hpp"

namespace metacenter {

using nn::Matrix;
using nn::Vector;

std::string_view to_tag(NetworkKind kind) {
  switch (kind) {
    case NetworkKind::fully_connected: return "fc";
    case NetworkKind::rbf: return "rbf";
    case NetworkKind::grnn: return "grnn";
    case NetworkKind::ts_grnn: return "ts-grnn";
  }
  return "?";
}

NetworkKind kind_from_tag(std::string_view tag) {
  for (auto k : kAllNetworkKinds) {
    if (to_tag(k) == tag) return k;
  }
  throw ConfigurationError("unknown architecture tag '" + std::string(tag) +
                           "' (expected fc, rbf, grnn or ts-grnn)");
}

std::string_view display_name(NetworkKind kind) {
  switch (kind) {
    case NetworkKind::fully_connected: return "Fully connected network";
    case NetworkKind::rbf: return "RBF";
    case NetworkKind::grnn: return "GRNN";
    case NetworkKind::ts_grnn: return "Time-sequence GRNN";
  }
  return "?";
}

Eigen::Index input_dimension(NetworkKind kind) { return kind == NetworkKind::ts_grnn ? 6 : 3; }

namespace {

void set_spreads_to_mean_distance(nn::RbfLayer& rbf) {
  const Matrix& c = rbf.centers();
  double total = 0.0;
  long pairs = 0;
  for (Eigen::Index i = 0; i < c.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < c.rows(); ++j) {
      total += (c.row(i) - c.row(j)).norm();
      ++pairs;
    }
  }
  const double mean = pairs > 0 && total > 0.0 ? total / static_cast<double>(pairs) : 1.0;
  rbf.log_spreads().setConstant(std::log(mean));
}

std::unique_ptr<nn::DenseLayer> dense(Eigen::Index in, Eigen::Index out, nn::Activation act,
                                      std::mt19937_64& rng) {
  auto layer = std::make_unique<nn::DenseLayer>(in, out, act);
  layer->weights() = nn::init_normal(out, in, in, rng);
  return layer;
}

std::unique_ptr<nn::RbfLayer> rbf(Eigen::Index in, bool peak_normalized, std::mt19937_64& rng) {
  auto layer = std::make_unique<nn::RbfLayer>(in, kHiddenUnits, peak_normalized);
  layer->centers() = nn::init_normal(kHiddenUnits, in, 1, rng);
  set_spreads_to_mean_distance(*layer);
  return layer;
}

}  // namespace

nn::Network build(NetworkKind kind, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  nn::Network net;
  const Eigen::Index in = input_dimension(kind);
  switch (kind) {
    case NetworkKind::fully_connected:
      net.add(dense(in, kHiddenUnits, nn::Activation::relu, rng));
      net.add(dense(kHiddenUnits, kHiddenUnits, nn::Activation::relu, rng));
      net.add(dense(kHiddenUnits, 3, nn::Activation::identity, rng));
      break;
    case NetworkKind::rbf:
      net.add(rbf(in, false, rng));
      net.add(dense(kHiddenUnits, 3, nn::Activation::identity, rng));
      break;
    case NetworkKind::grnn:
    case NetworkKind::ts_grnn: {
      net.add(rbf(in, true, rng));
      auto sum = std::make_unique<nn::NormalizedSumLayer>(kHiddenUnits, 3);
      sum->weights() = nn::init_normal(3, kHiddenUnits, kHiddenUnits, rng);
      net.add(std::move(sum));
      break;
    }
  }
  return net;
}

void init_rbf_from_data(nn::Network& network, const Matrix& inputs, std::mt19937_64& rng) {
  for (std::size_t l = 0; l < network.size(); ++l) {
    auto* layer = dynamic_cast<nn::RbfLayer*>(&network.layer(l));
    if (layer == nullptr) continue;
    if (inputs.rows() != layer->input_size()) {
      throw std::invalid_argument("init_rbf_from_data: input dimension mismatch");
    }
    const Eigen::Index k = layer->output_size();
    const Eigen::Index n = inputs.cols();
    // Partial Fisher-Yates over column indices, skipping duplicate vectors.
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    Eigen::Index chosen = 0;
    for (Eigen::Index i = 0; i < n && chosen < k; ++i) {
      std::uniform_int_distribution<Eigen::Index> pick(i, n - 1);
      std::swap(order[i], order[pick(rng)]);
      const auto candidate = inputs.col(order[i]);
      bool duplicate = false;
      for (Eigen::Index c = 0; c < chosen && !duplicate; ++c) {
        duplicate = layer->centers().row(c).transpose() == candidate;
      }
      if (!duplicate) layer->centers().row(chosen++) = candidate.transpose();
    }
    if (chosen < k) throw ConfigurationError("not enough distinct inputs to seat RBF centers");
    set_spreads_to_mean_distance(*layer);
  }
}

nn::GradientCheckResult check_gradients(NetworkKind kind, std::uint64_t seed, int samples,
                                        double h) {
  if (samples < 1) throw ConfigurationError("gradient check needs at least one sample");
  const nn::Network net = build(kind, seed);
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::normal_distribution<double> normal;
  auto draw = [&](Eigen::Index rows) {
    Matrix m(rows, samples);
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = normal(rng);
    }
    return m;
  };
  // A parameter step of h moves pre-activations by roughly h times the
  // input scale; samples too close to a kink are redrawn one by one.
  const double margin = 100.0 * h;
  Matrix inputs = draw(net.input_size());
  for (Eigen::Index j = 0; j < inputs.cols(); ++j) {
    for (int attempt = 0; nn::min_relu_margin(net, inputs.col(j)) < margin; ++attempt) {
      if (attempt == 1000) throw NumericalError("could not draw inputs away from ReLU kinks");
      for (Eigen::Index i = 0; i < inputs.rows(); ++i) inputs(i, j) = normal(rng);
    }
  }
  const Matrix targets = draw(net.output_size());
  return nn::gradient_check(net, inputs, targets, h);
}

Matrix ChannelStats::apply(const Matrix& x) const {
  return (x.colwise() - mean).array().colwise() / std.array();
}

Matrix ChannelStats::invert(const Matrix& z) const {
  return (z.array().colwise() * std.array()).matrix().colwise() + mean;
}

std::string_view to_string(FeedbackMode mode) {
  return mode == FeedbackMode::closed_loop ? "closed-loop" : "teacher-forced";
}

FeedbackMode feedback_mode_from_string(std::string_view s) {
  if (s == "closed-loop" || s == "closed_loop") return FeedbackMode::closed_loop;
  if (s == "teacher-forced" || s == "teacher_forced") return FeedbackMode::teacher_forced;
  throw ConfigurationError("unknown feedback mode '" + std::string(s) +
                           "' (expected closed-loop or teacher-forced)");
}

Matrix to_matrix(std::span<const MetacenterPosition> positions) {
  Matrix m(3, static_cast<Eigen::Index>(positions.size()));
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    const auto& p = positions[static_cast<std::size_t>(j)];
    m.col(j) << p.x, p.y, p.z;
  }
  return m;
}

std::vector<MetacenterPosition> to_positions(const Matrix& cm) {
  std::vector<MetacenterPosition> out;
  out.reserve(static_cast<std::size_t>(cm.cols()));
  for (Eigen::Index j = 0; j < cm.cols(); ++j) out.push_back({cm(0, j), cm(1, j), cm(2, j)});
  return out;
}

Matrix Model::encode(std::span<const AttitudeSample> attitudes,
                     std::span<const MetacenterPosition> previous) const {
  const auto n = static_cast<Eigen::Index>(attitudes.size());
  Matrix raw(3, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const auto& a = attitudes[static_cast<std::size_t>(j)];
    raw.col(j) << a.roll, a.pitch, a.yaw;
  }
  if (kind != NetworkKind::ts_grnn) return stats.input.apply(raw);
  if (previous.size() != attitudes.size()) {
    throw std::invalid_argument("encode: feedback length does not match attitudes");
  }
  Matrix x(6, n);
  x.topRows(3) = stats.input.apply(raw);
  x.bottomRows(3) = stats.target.apply(to_matrix(previous));
  return x;
}

std::vector<MetacenterPosition> predict_sequence(const Model& model,
                                                 std::span<const AttitudeSample> trial,
                                                 FeedbackMode mode,
                                                 std::span<const MetacenterPosition> targets) {
  std::vector<std::span<const MetacenterPosition>> t;
  if (!targets.empty()) t.push_back(targets);
  return predict_sequences(model, {trial}, mode, t).front();
}

std::vector<std::vector<MetacenterPosition>> predict_sequences(
    const Model& model, const std::vector<std::span<const AttitudeSample>>& trials,
    FeedbackMode mode, const std::vector<std::span<const MetacenterPosition>>& targets) {
  const bool feedback = model.kind == NetworkKind::ts_grnn;
  std::size_t longest = 0;
  for (std::size_t i = 0; i < trials.size(); ++i) {
    const auto& trial = trials[i];
    for (std::size_t s = 1; s < trial.size(); ++s) {
      if (!(trial[s].t > trial[s - 1].t)) {
        throw ConfigurationError("trial timestamps are not strictly increasing");
      }
    }
    if (feedback && mode == FeedbackMode::teacher_forced &&
        (targets.size() != trials.size() || targets[i].size() != trial.size())) {
      throw ConfigurationError("teacher-forced prediction requires targets for every step");
    }
    longest = std::max(longest, trial.size());
  }

  std::vector<std::vector<MetacenterPosition>> out(trials.size());
  if (!feedback) {
    // No state: one batch per trial.
    for (std::size_t i = 0; i < trials.size(); ++i) {
      const Matrix z = model.network.evaluate(model.encode(trials[i], {}));
      out[i] = to_positions(model.stats.target.invert(z));
    }
    return out;
  }

  const std::array<MetacenterPosition, 1> init{model.feedback_init};
  const Vector init_z = model.stats.target.apply(to_matrix(init)).col(0);
  Matrix state(3, static_cast<Eigen::Index>(trials.size()));
  state.colwise() = init_z;
  for (auto& o : out) o.reserve(longest);

  std::vector<std::size_t> active;
  for (std::size_t step = 0; step < longest; ++step) {
    active.clear();
    for (std::size_t i = 0; i < trials.size(); ++i) {
      if (step < trials[i].size()) active.push_back(i);
    }
    Matrix x(6, static_cast<Eigen::Index>(active.size()));
    for (std::size_t c = 0; c < active.size(); ++c) {
      const auto& a = trials[active[c]][step];
      x.col(static_cast<Eigen::Index>(c)).head(3) << a.roll, a.pitch, a.yaw;
      x.col(static_cast<Eigen::Index>(c)).tail(3) = state.col(static_cast<Eigen::Index>(active[c]));
    }
    x.topRows(3) = model.stats.input.apply(x.topRows(3));
    const Matrix z = model.network.evaluate(x);
    const Matrix cm = model.stats.target.invert(z);
    for (std::size_t c = 0; c < active.size(); ++c) {
      const auto i = active[c];
      const auto col = static_cast<Eigen::Index>(c);
      out[i].push_back({cm(0, col), cm(1, col), cm(2, col)});
      if (mode == FeedbackMode::closed_loop) {
        state.col(static_cast<Eigen::Index>(i)) = z.col(col);
      } else {
        const auto& y = targets[i][step];
        Matrix m(3, 1);
        m << y.x, y.y, y.z;
        state.col(static_cast<Eigen::Index>(i)) = model.stats.target.apply(m);
      }
    }
  }
  return out;
}

}  // namespace metacenter
