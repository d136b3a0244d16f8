#include "metacenter/seaway.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <random>

#include "metacenter/errors.hpp"

namespace metacenter {
namespace {

constexpr double kHalfPi = std::numbers::pi / 2.0;

struct Component {
  double amplitude;
  double frequency;
  double phase;
};

}  // namespace

void SeawaySpec::validate() const {
  if (!(rate > 0.0)) throw ConfigurationError("seaway rate must be positive");
  if (!(duration * rate >= 2.0)) throw ConfigurationError("seaway needs duration * rate >= 2");
  if (components < 0) throw ConfigurationError("component count must be non-negative");
  for (double a : {roll_amplitude, pitch_amplitude, yaw_amplitude}) {
    if (!(a >= 0.0)) throw ConfigurationError("amplitudes must be non-negative");
  }
  if (!(roll_amplitude < kHalfPi) || !(pitch_amplitude < kHalfPi)) {
    throw ConfigurationError("roll and pitch amplitudes must stay below pi/2");
  }
  if (!(min_frequency >= 0.0) || !(max_frequency >= min_frequency)) {
    throw ConfigurationError("invalid frequency range");
  }
  if (!(noise_std >= 0.0)) throw ConfigurationError("noise_std must be non-negative");
}

std::size_t SeawaySpec::sample_count() const {
  // Guard against products like 0.7 * 10 landing just below an integer.
  return static_cast<std::size_t>(std::floor(duration * rate * (1.0 + 1e-12)));
}

RawDataset generate_trajectory(const HullSpec& hull, const SeawaySpec& spec, int trial_id) {
  spec.validate();
  std::mt19937_64 rng(spec.seed ^ static_cast<std::uint64_t>(trial_id));

  const std::array<double, 3> limits{spec.roll_amplitude, spec.pitch_amplitude,
                                     spec.yaw_amplitude};
  std::array<std::vector<Component>, 3> channels;
  for (int c = 0; c < 3; ++c) {
    const double per_component = spec.components > 0 ? limits[c] / spec.components : 0.0;
    std::uniform_real_distribution<double> amp(0.0, per_component);
    std::uniform_real_distribution<double> freq(spec.min_frequency, spec.max_frequency);
    std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
    for (int k = 0; k < spec.components; ++k) {
      const double a = amp(rng);
      const double f = freq(rng);
      channels[c].push_back({a, f, phase(rng)});
    }
  }

  std::normal_distribution<double> noise(0.0, 1.0);
  const std::size_t n = spec.sample_count();
  RawDataset data;
  data.samples.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / spec.rate;
    std::array<double, 3> angle{};
    for (int c = 0; c < 3; ++c) {
      double v = 0.0;
      for (const auto& comp : channels[c]) {
        v += comp.amplitude * std::sin(2.0 * std::numbers::pi * comp.frequency * t + comp.phase);
      }
      if (spec.noise_std > 0.0) {
        // Redraw noise that would leave the capsize-free envelope.
        double noisy = v + spec.noise_std * noise(rng);
        while (c < 2 && std::abs(noisy) >= kHalfPi) noisy = v + spec.noise_std * noise(rng);
        v = noisy;
      }
      angle[c] = v;
    }
    LabeledSample s;
    s.trial = trial_id;
    s.attitude = {t, angle[0], angle[1], angle[2]};
    s.label = metacenter_cm(hull, s.attitude);
    data.samples.push_back(s);
  }
  return data;
}

RawDataset generate_dataset(const HullSpec& hull, const SeawaySpec& spec, int trials) {
  if (trials < 1) throw ConfigurationError("need at least one trial");
  RawDataset data;
  for (int id = 0; id < trials; ++id) {
    RawDataset one = generate_trajectory(hull, spec, id);
    data.samples.insert(data.samples.end(), one.samples.begin(), one.samples.end());
  }
  return data;
}

}  // namespace metacenter
