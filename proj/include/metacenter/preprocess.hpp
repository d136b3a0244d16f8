#pragma once

// Cleanup of raw Euler-angle series: per-channel temporal Gaussian smoothing
// followed by a sliding-window variance (outlier) filter.

#include <string>
#include <vector>

#include "metacenter/dataset.hpp"

namespace metacenter {

struct FilterConfig {
  double gaussian_sigma = 2.0;  // samples
  int gaussian_radius = -1;     // samples; negative means ceil(3 sigma)
  int variance_window = 11;     // odd
  double variance_k = 3.0;
  bool drop_outliers = false;   // remove flagged samples instead of replacing them
  bool smooth_first = true;

  void validate() const;
  int radius() const;
};

struct PreprocessReport {
  std::vector<std::string> skipped_trials;
  std::size_t flagged = 0;
  std::size_t dropped = 0;
};

// Normalized discrete Gaussian, length 2 * radius + 1.
std::vector<double> gaussian_kernel(double sigma, int radius);

// One channel, reflect padding (edge sample repeated: x[-1] = x[0]).
std::vector<double> convolve_reflect(const std::vector<double>& x, const std::vector<double>& kernel);

struct VarianceFilterResult {
  std::vector<double> values;
  std::vector<bool> flagged;
};

// Window of `window` samples around each point (shifted inward at the trial
// edges). A point is an outlier when its distance from the mean of the other
// window samples exceeds k times their standard deviation; with zero
// deviation any difference counts. Outliers take the median of the other
// window samples; computed from the unmodified input.
VarianceFilterResult variance_filter_channel(const std::vector<double>& x, int window, double k);

// Smooths roll, pitch and yaw of every trial. Trials shorter than
// 2 * radius + 1 are dropped and listed in the report. Labels are recomputed
// with `labeler` when provided; timestamps are unchanged.
RawDataset gaussian_smooth(const RawDataset& dataset, const FilterConfig& config,
                           const Labeler& labeler, PreprocessReport* report = nullptr);

// Flags and replaces (or drops) outliers per channel. Trials shorter than
// the window are dropped and reported. Replaced samples are relabeled with
// `labeler` when provided. The result always carries the flagged column.
RawDataset variance_filter(const RawDataset& dataset, const FilterConfig& config,
                           const Labeler& labeler, PreprocessReport* report = nullptr);

// Both stages in the configured order (Gaussian first by default).
RawDataset preprocess(const RawDataset& dataset, const FilterConfig& config, const Labeler& labeler,
                      PreprocessReport* report = nullptr);

}  // namespace metacenter
