#pragma once

// Trained-model files: architecture tag, layer shapes and row-major
// parameters, normalization statistics, the training config and its seed.

#include <filesystem>

#include <json.hpp>

#include "metacenter/models.hpp"
#include "metacenter/training.hpp"

namespace metacenter {

struct Checkpoint {
  Model model;
  TrainConfig config;
};

nlohmann::json checkpoint_to_json(const Model& model, const TrainConfig& config);

// Rejects files whose layers do not match the architecture named by the tag
// (ConfigurationError).
Checkpoint checkpoint_from_json(const nlohmann::json& j);

void save_checkpoint(const std::filesystem::path& path, const Model& model, const TrainConfig& config);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace metacenter
