#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "metacenter/dataset.hpp"
#include "metacenter/models.hpp"

namespace metacenter {

struct TrainConfig {
  int batch_size = 128;
  double learning_rate = 1e-2;
  int iterations = 5000;
  std::uint64_t seed = 42;
  double test_fraction = 0.2;
  int eval_every = 10;
  // Feedback value at the start of each trial (the zero-attitude metacenter
  // of the hull that produced the data).
  MetacenterPosition feedback_init;
  // How the feedback input of ts-grnn is filled while training and when
  // measuring test error.
  FeedbackMode train_feedback = FeedbackMode::teacher_forced;
  FeedbackMode test_feedback = FeedbackMode::closed_loop;

  void validate() const;
  nlohmann::json to_json() const;
  static TrainConfig from_json(const nlohmann::json& j);
};

struct LossPoint {
  long iteration = 0;
  double train_mse = 0.0;  // cm^2
  double test_mse = 0.0;   // cm^2
};

struct LossCurve {
  std::vector<LossPoint> points;

  // Mean train MSE over the points with iteration in (at - window, at].
  double train_moving_average(long at, long window) const;
};

struct DatasetSplit {
  RawDataset train;
  RawDataset test;
  std::vector<int> train_trials;
  std::vector<int> test_trials;
};

// Assigns whole trials: floor(trials * test_fraction) test trials, at least
// one, chosen by a seeded shuffle. Needs two or more trials.
DatasetSplit split_dataset(const RawDataset& dataset, double test_fraction, std::uint64_t seed);

// Model-space view of a dataset: standardized attitudes, targets, and the
// previous ground-truth target of each sample (feedback_init at a trial
// start). Columns are samples.
struct EncodedSplit {
  nn::Matrix attitudes;
  nn::Matrix targets;
  nn::Matrix previous;
  std::vector<std::pair<Eigen::Index, Eigen::Index>> trials;  // [begin, end)

  Eigen::Index size() const { return targets.cols(); }
  // Network input for the given architecture.
  nn::Matrix inputs(NetworkKind kind) const;
};

struct StandardizedData {
  Standardization stats;
  MetacenterPosition feedback_init;
  EncodedSplit train;
  EncodedSplit test;
  std::vector<std::string> warnings;
};

ChannelStats fit_channel_stats(const nn::Matrix& samples, std::vector<std::string>* warnings,
                               const char* what);

// Statistics come from `train` only. A zero-variance channel gets std 1 and
// a warning.
StandardizedData standardize(const RawDataset& train, const RawDataset& test,
                             const MetacenterPosition& feedback_init);

EncodedSplit encode_split(const RawDataset& data, const Standardization& stats,
                          const MetacenterPosition& feedback_init);

// Mean squared error in cm^2 (per coordinate) between standardized
// predictions and targets.
double mse_cm2(const nn::Matrix& predictions, const nn::Matrix& targets,
               const ChannelStats& target_stats);

// Predictions (standardized) for an encoded split; ts-grnn uses `mode` for
// its feedback input, other kinds ignore it.
nn::Matrix predict_split(const Model& model, const EncodedSplit& split, FeedbackMode mode);

struct TrainResult {
  Model model;
  LossCurve curve;
  double final_train_mse = 0.0;
  double final_test_mse = 0.0;
  double wall_seconds = 0.0;
};

// Uniform-with-replacement minibatches, one Adam step on the standardized
// MSE per iteration, metrics in cm^2 every eval_every iterations and at the
// last iteration. Throws TrainingError on a non-finite loss.
TrainResult train(NetworkKind kind, const StandardizedData& data, const TrainConfig& config);

struct ReportEntry {
  NetworkKind kind = NetworkKind::fully_connected;
  double train_mse = 0.0;
  double test_mse = 0.0;
  double test_rmse_cm = 0.0;
  long parameter_count = 0;
  double wall_seconds = 0.0;
  std::string test_feedback;
};

struct ComparisonReport {
  std::vector<ReportEntry> entries;
  TrainConfig config;
  std::vector<int> train_trials;
  std::vector<int> test_trials;

  const ReportEntry& entry(NetworkKind kind) const;
};

struct Comparison {
  ComparisonReport report;
  std::vector<TrainResult> runs;  // same order as report.entries
};

// Trains all four kinds on one split with one seed. `jobs` > 1 trains them
// on separate threads; the result does not depend on it.
Comparison compare(const RawDataset& dataset, const TrainConfig& config, int jobs = 1);

}  // namespace metacenter
