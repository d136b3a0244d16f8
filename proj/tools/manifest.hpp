#pragma once

// Provenance record written next to every CLI output.

#include <chrono>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace metacenter::cli {

// Lowercase hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);

class RunManifest {
 public:
  RunManifest(std::string command, nlohmann::json config);

  void set_seeds(nlohmann::json seeds) { seeds_ = std::move(seeds); }
  void add_extra(const std::string& key, nlohmann::json value) { extra_[key] = std::move(value); }
  void add_input(const std::filesystem::path& path) { inputs_.push_back(path); }
  void add_output(const std::filesystem::path& path) { outputs_.push_back(path); }

  // Digests every listed file, stamps the elapsed time, writes JSON.
  void write(const std::filesystem::path& path) const;

 private:
  std::string command_;
  nlohmann::json config_;
  nlohmann::json seeds_ = nlohmann::json::object();
  nlohmann::json extra_ = nlohmann::json::object();
  std::vector<std::filesystem::path> inputs_;
  std::vector<std::filesystem::path> outputs_;
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

// `<file>.manifest.json` beside a file output.
std::filesystem::path manifest_path_for(const std::filesystem::path& output);

}  // namespace metacenter::cli
