#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "metacenter/hydrostatics.hpp"

namespace metacenter {

struct LabeledSample {
  int trial = 0;
  AttitudeSample attitude;
  MetacenterPosition label;
  bool flagged = false;
};

// Samples grouped in contiguous trials, time-ordered within each trial.
struct RawDataset {
  std::vector<LabeledSample> samples;
  // Whether the CSV form carries the `flagged` column.
  bool has_flags = false;

  std::size_t size() const { return samples.size(); }
  bool empty() const { return samples.empty(); }

  // One span per contiguous run of equal trial ids, in file order.
  std::vector<std::span<const LabeledSample>> trials() const;
  std::vector<std::span<LabeledSample>> trials();

  std::vector<int> trial_ids() const;
};

// Recomputes a label from an attitude; normally bound to the hull oracle.
using Labeler = std::function<MetacenterPosition(const AttitudeSample&)>;

Labeler oracle_labeler(HullSpec hull);

// Dataset CSV: header `trial,t,roll,pitch,yaw,mx,my,mz[,flagged]`, angles in
// radians, positions in centimeters, 17 significant digits.
void write_dataset_csv(std::ostream& out, const RawDataset& data);
void write_dataset_csv(const std::filesystem::path& path, const RawDataset& data);
RawDataset read_dataset_csv(std::istream& in);
RawDataset read_dataset_csv(const std::filesystem::path& path);

}  // namespace metacenter
