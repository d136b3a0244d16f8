#pragma once

// The four compared architectures and sequence prediction with
// previous-metacenter feedback.

#include <array>
#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <vector>

#include "metacenter/hydrostatics.hpp"
#include "metacenter/nncore/gradient_check.hpp"
#include "metacenter/nncore/network.hpp"

namespace metacenter {

enum class NetworkKind { fully_connected, rbf, grnn, ts_grnn };

inline constexpr std::array<NetworkKind, 4> kAllNetworkKinds{
    NetworkKind::fully_connected, NetworkKind::rbf, NetworkKind::grnn, NetworkKind::ts_grnn};

inline constexpr Eigen::Index kHiddenUnits = 20;

// Checkpoint tags: fc, rbf, grnn, ts-grnn.
std::string_view to_tag(NetworkKind kind);
NetworkKind kind_from_tag(std::string_view tag);
std::string_view display_name(NetworkKind kind);

// 3 for attitude-only models, 6 for ts_grnn (attitude + previous metacenter).
Eigen::Index input_dimension(NetworkKind kind);

// fully_connected: 3 -> 20 ReLU -> 20 ReLU -> 3
// rbf:             3 -> 20 RBF -> 3 linear
// grnn:            3 -> 20 RBF -> normalized sum -> 3
// ts_grnn:         6 -> 20 RBF -> normalized sum -> 3
// Weights ~ Normal(0, 1/fan_in), biases zero. RBF centers ~ Normal(0, 1)
// with spreads set to the mean distance between centers; training replaces
// these with a data-driven start (see init_rbf_from_data).
nn::Network build(NetworkKind kind, std::uint64_t seed);

// Re-seats every RBF layer on `inputs` (dim x n, network input space):
// centers are k distinct sampled columns, every spread is the mean pairwise
// distance between those centers.
void init_rbf_from_data(nn::Network& network, const nn::Matrix& inputs, std::mt19937_64& rng);

// Finite-difference check of build(kind, seed) on `samples` standard-normal
// inputs and targets. Inputs whose ReLU pre-activations fall within 100 h of
// the kink are redrawn.
nn::GradientCheckResult check_gradients(NetworkKind kind, std::uint64_t seed, int samples = 16,
                                        double h = 1e-5);

struct ChannelStats {
  nn::Vector mean;
  nn::Vector std;

  nn::Matrix apply(const nn::Matrix& x) const;
  nn::Matrix invert(const nn::Matrix& z) const;
};

struct Standardization {
  ChannelStats input;   // roll, pitch, yaw
  ChannelStats target;  // x, y, z in cm; also used for the feedback input
};

enum class FeedbackMode { closed_loop, teacher_forced };

std::string_view to_string(FeedbackMode mode);
FeedbackMode feedback_mode_from_string(std::string_view s);

// A trained network with everything needed to map raw attitudes to
// centimeters.
struct Model {
  NetworkKind kind = NetworkKind::fully_connected;
  nn::Network network;
  Standardization stats;
  // Feedback value at the start of every trial: the zero-attitude metacenter.
  MetacenterPosition feedback_init;

  // Standardized network inputs. `previous` (cm) is ignored unless the model
  // takes feedback, in which case it must match `attitudes` in length.
  nn::Matrix encode(std::span<const AttitudeSample> attitudes,
                    std::span<const MetacenterPosition> previous) const;
};

nn::Matrix to_matrix(std::span<const MetacenterPosition> positions);
std::vector<MetacenterPosition> to_positions(const nn::Matrix& cm);

// Predicts one trial step by step. With closed_loop the feedback input is the
// model's own previous prediction; with teacher_forced it is the previous
// entry of `targets`. Step 0 uses model.feedback_init. Attitude-only models
// ignore the feedback. Throws ConfigurationError on non-increasing
// timestamps or teacher forcing without matching targets.
std::vector<MetacenterPosition> predict_sequence(const Model& model,
                                                 std::span<const AttitudeSample> trial,
                                                 FeedbackMode mode,
                                                 std::span<const MetacenterPosition> targets = {});

// Several trials advanced in lockstep; same semantics as predict_sequence
// applied to each trial.
std::vector<std::vector<MetacenterPosition>> predict_sequences(
    const Model& model, const std::vector<std::span<const AttitudeSample>>& trials,
    FeedbackMode mode, const std::vector<std::span<const MetacenterPosition>>& targets = {});

}  // namespace metacenter
