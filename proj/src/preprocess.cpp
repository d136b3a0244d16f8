#include "metacenter/preprocess.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "metacenter/errors.hpp"

namespace metacenter {
namespace {

std::array<std::vector<double>, 3> channels(std::span<const LabeledSample> trial) {
  std::array<std::vector<double>, 3> ch;
  for (const auto& s : trial) {
    ch[0].push_back(s.attitude.roll);
    ch[1].push_back(s.attitude.pitch);
    ch[2].push_back(s.attitude.yaw);
  }
  return ch;
}

std::string trial_name(int id) { return "trial " + std::to_string(id); }

double median(std::vector<double>& v) {
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  if (v.size() % 2 == 1) return *mid;
  const double upper = *mid;
  const double lower = *std::max_element(v.begin(), mid);
  return 0.5 * (lower + upper);
}

}  // namespace

void FilterConfig::validate() const {
  if (!(gaussian_sigma > 0.0)) throw ConfigurationError("gaussian sigma must be positive");
  if (variance_window < 3 || variance_window % 2 == 0) {
    throw ConfigurationError("variance window must be odd and >= 3");
  }
  if (!(variance_k > 0.0)) throw ConfigurationError("variance k must be positive");
}

int FilterConfig::radius() const {
  return gaussian_radius >= 0 ? gaussian_radius
                              : static_cast<int>(std::ceil(3.0 * gaussian_sigma));
}

std::vector<double> gaussian_kernel(double sigma, int radius) {
  if (!(sigma > 0.0) || radius < 0) throw ConfigurationError("invalid Gaussian kernel");
  std::vector<double> w(static_cast<std::size_t>(2 * radius + 1));
  double total = 0.0;
  for (int k = -radius; k <= radius; ++k) {
    const double v = std::exp(-0.5 * (k / sigma) * (k / sigma));
    w[static_cast<std::size_t>(k + radius)] = v;
    total += v;
  }
  for (double& v : w) v /= total;
  return w;
}

std::vector<double> convolve_reflect(const std::vector<double>& x, const std::vector<double>& kernel) {
  const auto n = static_cast<long>(x.size());
  const long radius = static_cast<long>(kernel.size() / 2);
  if (n < static_cast<long>(kernel.size())) {
    throw ConfigurationError("series shorter than the smoothing kernel");
  }
  std::vector<double> y(x.size(), 0.0);
  for (long i = 0; i < n; ++i) {
    double acc = 0.0;
    for (long k = -radius; k <= radius; ++k) {
      long j = i + k;
      if (j < 0) j = -j - 1;
      if (j >= n) j = 2 * n - j - 1;
      acc += kernel[static_cast<std::size_t>(k + radius)] * x[static_cast<std::size_t>(j)];
    }
    y[static_cast<std::size_t>(i)] = acc;
  }
  return y;
}

VarianceFilterResult variance_filter_channel(const std::vector<double>& x, int window, double k) {
  const auto n = static_cast<long>(x.size());
  if (n < window) throw ConfigurationError("series shorter than the variance window");
  const long half = window / 2;
  VarianceFilterResult r{x, std::vector<bool>(x.size(), false)};
  std::vector<double> others;
  others.reserve(static_cast<std::size_t>(window - 1));
  for (long i = 0; i < n; ++i) {
    const long begin = std::clamp(i - half, 0L, n - window);
    others.clear();
    for (long j = begin; j < begin + window; ++j) {
      if (j != i) others.push_back(x[static_cast<std::size_t>(j)]);
    }
    double mean = 0.0;
    for (double v : others) mean += v;
    mean /= static_cast<double>(others.size());
    double var = 0.0;
    for (double v : others) var += (v - mean) * (v - mean);
    const double sd = std::sqrt(var / static_cast<double>(others.size()));
    const double dev = std::abs(x[static_cast<std::size_t>(i)] - mean);
    const bool outlier = sd > 0.0 ? dev > k * sd : dev > 0.0;
    if (outlier) {
      r.flagged[static_cast<std::size_t>(i)] = true;
      r.values[static_cast<std::size_t>(i)] = median(others);
    }
  }
  return r;
}

RawDataset gaussian_smooth(const RawDataset& dataset, const FilterConfig& config,
                           const Labeler& labeler, PreprocessReport* report) {
  config.validate();
  const auto kernel = gaussian_kernel(config.gaussian_sigma, config.radius());
  RawDataset out;
  out.has_flags = dataset.has_flags;
  for (const auto& trial : dataset.trials()) {
    if (trial.size() < kernel.size()) {
      if (report) {
        report->skipped_trials.push_back(trial_name(trial.front().trial) +
                                         ": too short for the Gaussian kernel");
      }
      continue;
    }
    auto ch = channels(trial);
    for (auto& c : ch) c = convolve_reflect(c, kernel);
    for (std::size_t i = 0; i < trial.size(); ++i) {
      LabeledSample s = trial[i];
      s.attitude.roll = ch[0][i];
      s.attitude.pitch = ch[1][i];
      s.attitude.yaw = ch[2][i];
      if (labeler) s.label = labeler(s.attitude);
      out.samples.push_back(s);
    }
  }
  return out;
}

RawDataset variance_filter(const RawDataset& dataset, const FilterConfig& config,
                           const Labeler& labeler, PreprocessReport* report) {
  config.validate();
  RawDataset out;
  out.has_flags = true;
  for (const auto& trial : dataset.trials()) {
    if (trial.size() < static_cast<std::size_t>(config.variance_window)) {
      if (report) {
        report->skipped_trials.push_back(trial_name(trial.front().trial) +
                                         ": too short for the variance window");
      }
      continue;
    }
    const auto ch = channels(trial);
    std::array<VarianceFilterResult, 3> filtered;
    for (int c = 0; c < 3; ++c) {
      filtered[c] = variance_filter_channel(ch[c], config.variance_window, config.variance_k);
    }
    for (std::size_t i = 0; i < trial.size(); ++i) {
      LabeledSample s = trial[i];
      const bool flagged = filtered[0].flagged[i] || filtered[1].flagged[i] || filtered[2].flagged[i];
      s.flagged = s.flagged || flagged;
      if (flagged) {
        if (report) ++report->flagged;
        if (config.drop_outliers) {
          if (report) ++report->dropped;
          continue;
        }
        s.attitude.roll = filtered[0].values[i];
        s.attitude.pitch = filtered[1].values[i];
        s.attitude.yaw = filtered[2].values[i];
        if (labeler) s.label = labeler(s.attitude);
      }
      out.samples.push_back(s);
    }
  }
  return out;
}

RawDataset preprocess(const RawDataset& dataset, const FilterConfig& config, const Labeler& labeler,
                      PreprocessReport* report) {
  if (config.smooth_first) {
    return variance_filter(gaussian_smooth(dataset, config, labeler, report), config, labeler,
                           report);
  }
  return gaussian_smooth(variance_filter(dataset, config, labeler, report), config, labeler, report);
}

}  // namespace metacenter
