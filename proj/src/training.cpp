#include "metacenter/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>
#include <sstream>
#include <thread>

#include "metacenter/errors.hpp"
#include "metacenter/nncore/optim.hpp"

namespace metacenter {

using nn::Matrix;
using nn::Vector;

namespace {

constexpr std::uint64_t kInitStream = 0x5851f42d4c957f2dULL;
constexpr std::uint64_t kBatchStream = 0x9e3779b97f4a7c15ULL;

nlohmann::json position_json(const MetacenterPosition& p) { return {p.x, p.y, p.z}; }

MetacenterPosition position_from(const nlohmann::json& j) {
  return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()};
}

// Closed-loop rollout of every trial in lockstep, standardized space.
Matrix closed_loop(const nn::Network& net, const EncodedSplit& split, const Vector& init) {
  Matrix out(3, split.size());
  std::vector<Vector> state(split.trials.size(), init);
  Eigen::Index longest = 0;
  for (const auto& [b, e] : split.trials) longest = std::max(longest, e - b);

  std::vector<std::size_t> active;
  Matrix x;
  for (Eigen::Index step = 0; step < longest; ++step) {
    active.clear();
    for (std::size_t i = 0; i < split.trials.size(); ++i) {
      if (split.trials[i].first + step < split.trials[i].second) active.push_back(i);
    }
    x.resize(6, static_cast<Eigen::Index>(active.size()));
    for (std::size_t c = 0; c < active.size(); ++c) {
      const Eigen::Index col = split.trials[active[c]].first + step;
      x.col(static_cast<Eigen::Index>(c)) << split.attitudes.col(col), state[active[c]];
    }
    const Matrix z = net.evaluate(x);
    for (std::size_t c = 0; c < active.size(); ++c) {
      out.col(split.trials[active[c]].first + step) = z.col(static_cast<Eigen::Index>(c));
      state[active[c]] = z.col(static_cast<Eigen::Index>(c));
    }
  }
  return out;
}

std::string parameter_norms(nn::Network& net) {
  std::ostringstream os;
  os << "parameter norms:";
  for (const auto& p : net.parameters()) {
    os << ' ' << p.name << '=' << Eigen::Map<const Vector>(p.value, p.size).norm();
  }
  return os.str();
}

}  // namespace

void TrainConfig::validate() const {
  if (batch_size < 1) throw ConfigurationError("batch_size must be >= 1");
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw ConfigurationError("test_fraction must lie in (0, 1)");
  }
  if (iterations < 1) throw ConfigurationError("iterations must be >= 1");
  if (eval_every < 1) throw ConfigurationError("eval_every must be >= 1");
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    throw ConfigurationError("learning_rate must be finite and non-negative");
  }
}

nlohmann::json TrainConfig::to_json() const {
  return {{"batch_size", batch_size},
          {"learning_rate", learning_rate},
          {"iterations", iterations},
          {"seed", seed},
          {"test_fraction", test_fraction},
          {"eval_every", eval_every},
          {"feedback_init_cm", position_json(feedback_init)},
          {"train_feedback", std::string(to_string(train_feedback))},
          {"test_feedback", std::string(to_string(test_feedback))}};
}

TrainConfig TrainConfig::from_json(const nlohmann::json& j) {
  TrainConfig c;
  c.batch_size = j.value("batch_size", c.batch_size);
  c.learning_rate = j.value("learning_rate", c.learning_rate);
  c.iterations = j.value("iterations", c.iterations);
  c.seed = j.value("seed", c.seed);
  c.test_fraction = j.value("test_fraction", c.test_fraction);
  c.eval_every = j.value("eval_every", c.eval_every);
  if (j.contains("feedback_init_cm")) c.feedback_init = position_from(j.at("feedback_init_cm"));
  if (j.contains("train_feedback")) {
    c.train_feedback = feedback_mode_from_string(j.at("train_feedback").get<std::string>());
  }
  if (j.contains("test_feedback")) {
    c.test_feedback = feedback_mode_from_string(j.at("test_feedback").get<std::string>());
  }
  return c;
}

double LossCurve::train_moving_average(long at, long window) const {
  double sum = 0.0;
  long n = 0;
  for (const auto& p : points) {
    if (p.iteration > at - window && p.iteration <= at) {
      sum += p.train_mse;
      ++n;
    }
  }
  if (n == 0) throw std::invalid_argument("no loss-curve points in the requested window");
  return sum / static_cast<double>(n);
}

DatasetSplit split_dataset(const RawDataset& dataset, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw ConfigurationError("test_fraction must lie in (0, 1)");
  }
  const auto trials = dataset.trials();
  const auto n = trials.size();
  if (n < 2) {
    throw ConfigurationError("dataset has " + std::to_string(n) +
                             " trial(s); generate at least two trials to split train/test");
  }
  auto n_test = static_cast<std::size_t>(std::floor(static_cast<double>(n) * test_fraction + 1e-9));
  n_test = std::clamp<std::size_t>(n_test, 1, n - 1);

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::mt19937_64 rng(seed);
  for (std::size_t i = n - 1; i > 0; --i) {
    std::uniform_int_distribution<std::size_t> pick(0, i);
    std::swap(order[i], order[pick(rng)]);
  }
  std::vector<bool> is_test(n, false);
  for (std::size_t i = 0; i < n_test; ++i) is_test[order[i]] = true;

  DatasetSplit split;
  split.train.has_flags = split.test.has_flags = dataset.has_flags;
  for (std::size_t i = 0; i < n; ++i) {
    auto& dst = is_test[i] ? split.test : split.train;
    dst.samples.insert(dst.samples.end(), trials[i].begin(), trials[i].end());
    (is_test[i] ? split.test_trials : split.train_trials).push_back(trials[i].front().trial);
  }
  return split;
}

Matrix EncodedSplit::inputs(NetworkKind kind) const {
  if (kind != NetworkKind::ts_grnn) return attitudes;
  Matrix x(6, size());
  x << attitudes, previous;
  return x;
}

ChannelStats fit_channel_stats(const Matrix& samples, std::vector<std::string>* warnings,
                               const char* what) {
  ChannelStats s;
  const double n = static_cast<double>(samples.cols());
  s.mean = samples.rowwise().sum() / n;
  s.std = ((samples.colwise() - s.mean).cwiseAbs2().rowwise().sum() / n).cwiseSqrt();
  for (Eigen::Index r = 0; r < s.std.size(); ++r) {
    if (!(s.std[r] > 0.0)) {
      s.std[r] = 1.0;
      if (warnings != nullptr) {
        warnings->push_back(std::string(what) + " channel " + std::to_string(r) +
                            " has zero variance; std clamped to 1");
      }
    }
  }
  return s;
}

EncodedSplit encode_split(const RawDataset& data, const Standardization& stats,
                          const MetacenterPosition& feedback_init) {
  EncodedSplit out;
  const auto n = static_cast<Eigen::Index>(data.size());
  Matrix att(3, n), tgt(3, n), prev(3, n);
  Eigen::Index col = 0;
  for (const auto& trial : data.trials()) {
    const Eigen::Index begin = col;
    for (std::size_t s = 0; s < trial.size(); ++s, ++col) {
      const auto& a = trial[s].attitude;
      att.col(col) << a.roll, a.pitch, a.yaw;
      tgt.col(col) << trial[s].label.x, trial[s].label.y, trial[s].label.z;
      const auto& p = s == 0 ? feedback_init : trial[s - 1].label;
      prev.col(col) << p.x, p.y, p.z;
    }
    out.trials.emplace_back(begin, col);
  }
  out.attitudes = stats.input.apply(att);
  out.targets = stats.target.apply(tgt);
  out.previous = stats.target.apply(prev);
  return out;
}

StandardizedData standardize(const RawDataset& train, const RawDataset& test,
                             const MetacenterPosition& feedback_init) {
  if (train.empty()) throw ConfigurationError("training split is empty");
  StandardizedData out;
  out.feedback_init = feedback_init;
  const auto n = static_cast<Eigen::Index>(train.size());
  Matrix att(3, n), tgt(3, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const auto& s = train.samples[static_cast<std::size_t>(j)];
    att.col(j) << s.attitude.roll, s.attitude.pitch, s.attitude.yaw;
    tgt.col(j) << s.label.x, s.label.y, s.label.z;
  }
  out.stats.input = fit_channel_stats(att, &out.warnings, "input");
  out.stats.target = fit_channel_stats(tgt, &out.warnings, "target");
  out.train = encode_split(train, out.stats, feedback_init);
  out.test = encode_split(test, out.stats, feedback_init);
  return out;
}

double mse_cm2(const Matrix& predictions, const Matrix& targets, const ChannelStats& target_stats) {
  if (predictions.size() == 0) return 0.0;
  const Matrix diff = target_stats.std.asDiagonal() * (predictions - targets);
  return diff.squaredNorm() / static_cast<double>(diff.size());
}

Matrix predict_split(const Model& model, const EncodedSplit& split, FeedbackMode mode) {
  if (model.kind == NetworkKind::ts_grnn && mode == FeedbackMode::closed_loop) {
    const std::array<MetacenterPosition, 1> init{model.feedback_init};
    return closed_loop(model.network, split, model.stats.target.apply(to_matrix(init)).col(0));
  }
  return model.network.evaluate(split.inputs(model.kind));
}

TrainResult train(NetworkKind kind, const StandardizedData& data, const TrainConfig& config) {
  config.validate();
  if (data.train.size() == 0) throw ConfigurationError("training split is empty");
  const auto start = std::chrono::steady_clock::now();

  TrainResult result;
  Model& model = result.model;
  model.kind = kind;
  model.network = build(kind, config.seed);
  model.stats = data.stats;
  model.feedback_init = data.feedback_init;

  EncodedSplit train_split = data.train;
  Matrix inputs = train_split.inputs(kind);
  {
    std::mt19937_64 init_rng(config.seed ^ kInitStream);
    init_rbf_from_data(model.network, inputs, init_rng);
  }
  const bool self_fed = kind == NetworkKind::ts_grnn &&
                        config.train_feedback == FeedbackMode::closed_loop;

  nn::Adam adam({.learning_rate = config.learning_rate});
  std::mt19937_64 batch_rng(config.seed ^ kBatchStream);
  std::uniform_int_distribution<Eigen::Index> pick(0, train_split.size() - 1);
  const Eigen::Index b = config.batch_size;
  Matrix x(inputs.rows(), b);
  Matrix y(3, b);

  auto record = [&](long iteration) {
    const Matrix train_pred = predict_split(model, train_split, config.train_feedback);
    const Matrix test_pred = predict_split(model, data.test, config.test_feedback);
    LossPoint p{iteration, mse_cm2(train_pred, train_split.targets, model.stats.target),
                mse_cm2(test_pred, data.test.targets, model.stats.target)};
    if (!std::isfinite(p.train_mse) || !std::isfinite(p.test_mse)) {
      throw TrainingError("non-finite evaluation loss; " + parameter_norms(model.network),
                          iteration);
    }
    result.curve.points.push_back(p);
    if (self_fed) {
      // Feed the model's own rollout back as the feedback input.
      const Matrix rollout = predict_split(model, train_split, FeedbackMode::closed_loop);
      for (const auto& [begin, end] : train_split.trials) {
        for (Eigen::Index c = begin + 1; c < end; ++c) inputs.col(c).tail(3) = rollout.col(c - 1);
      }
    }
  };

  if (self_fed) {
    const Matrix rollout = predict_split(model, train_split, FeedbackMode::closed_loop);
    for (const auto& [begin, end] : train_split.trials) {
      for (Eigen::Index c = begin + 1; c < end; ++c) inputs.col(c).tail(3) = rollout.col(c - 1);
    }
  }

  for (long it = 1; it <= config.iterations; ++it) {
    for (Eigen::Index c = 0; c < b; ++c) {
      const Eigen::Index idx = pick(batch_rng);
      x.col(c) = inputs.col(idx);
      y.col(c) = train_split.targets.col(idx);
    }
    model.network.zero_grad();
    const Matrix pred = model.network.forward(x);
    const nn::LossResult loss = nn::mse_loss(pred, y);
    if (!std::isfinite(loss.value)) {
      throw TrainingError("non-finite training loss; " + parameter_norms(model.network), it);
    }
    model.network.backward(loss.grad);
    try {
      adam.step(model.network.parameters());
    } catch (const TrainingError& e) {
      throw TrainingError(std::string(e.what()) + "; " + parameter_norms(model.network), it);
    }
    if (it % config.eval_every == 0 || it == config.iterations) record(it);
  }

  result.final_train_mse = result.curve.points.back().train_mse;
  result.final_test_mse = result.curve.points.back().test_mse;
  result.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

const ReportEntry& ComparisonReport::entry(NetworkKind kind) const {
  for (const auto& e : entries) {
    if (e.kind == kind) return e;
  }
  throw std::out_of_range("report has no entry for " + std::string(to_tag(kind)));
}

Comparison compare(const RawDataset& dataset, const TrainConfig& config, int jobs) {
  config.validate();
  const DatasetSplit split = split_dataset(dataset, config.test_fraction, config.seed);
  const StandardizedData data = standardize(split.train, split.test, config.feedback_init);

  Comparison out;
  out.runs.resize(kAllNetworkKinds.size());
  std::vector<std::exception_ptr> errors(kAllNetworkKinds.size());
  auto run = [&](std::size_t i) {
    try {
      out.runs[i] = train(kAllNetworkKinds[i], data, config);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  };
  if (jobs <= 1) {
    for (std::size_t i = 0; i < kAllNetworkKinds.size(); ++i) run(i);
  } else {
    std::vector<std::thread> pool;
    std::size_t next = 0;
    while (next < kAllNetworkKinds.size()) {
      pool.clear();
      for (int j = 0; j < jobs && next < kAllNetworkKinds.size(); ++j) pool.emplace_back(run, next++);
      for (auto& t : pool) t.join();
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  out.report.config = config;
  out.report.train_trials = split.train_trials;
  out.report.test_trials = split.test_trials;
  for (std::size_t i = 0; i < kAllNetworkKinds.size(); ++i) {
    auto& r = out.runs[i];
    ReportEntry e;
    e.kind = kAllNetworkKinds[i];
    e.train_mse = r.final_train_mse;
    e.test_mse = r.final_test_mse;
    e.test_rmse_cm = std::sqrt(r.final_test_mse);
    e.parameter_count = static_cast<long>(r.model.network.parameter_count());
    e.wall_seconds = r.wall_seconds;
    e.test_feedback = e.kind == NetworkKind::ts_grnn ? std::string(to_string(config.test_feedback))
                                                     : "none";
    out.report.entries.push_back(e);
  }
  return out;
}

}  // namespace metacenter
