#pragma once

#include <cstdint>

#include "metacenter/dataset.hpp"
#include "metacenter/hydrostatics.hpp"

namespace metacenter {

// Sum-of-sinusoids attitude generator. Each Euler channel is
//   sum_k A_k sin(2 pi f_k t + phase_k) + N(0, noise_std^2)
// with A_k ~ U(0, max_amplitude / components), f_k ~ U(min_frequency,
// max_frequency) and phase_k ~ U(0, 2 pi), so a channel's noise-free
// excursion never exceeds its max_amplitude.
struct SeawaySpec {
  double duration = 600.0;  // s
  double rate = 10.0;       // Hz
  int components = 4;
  double roll_amplitude = 0.26;   // rad
  double pitch_amplitude = 0.17;  // rad
  double yaw_amplitude = 0.09;    // rad
  double min_frequency = 0.05;    // Hz
  double max_frequency = 0.8;     // Hz
  double noise_std = 0.01;        // rad
  std::uint64_t seed = 42;

  // Throws ConfigurationError.
  void validate() const;
  std::size_t sample_count() const;
};

// One trial. The generator is seeded with spec.seed ^ trial_id.
RawDataset generate_trajectory(const HullSpec& hull, const SeawaySpec& spec, int trial_id = 0);

// Trials 0..trials-1, concatenated.
RawDataset generate_dataset(const HullSpec& hull, const SeawaySpec& spec, int trials);

}  // namespace metacenter
