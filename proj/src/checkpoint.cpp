#include "metacenter/checkpoint.hpp"

#include <fstream>
#include <string>

#include "metacenter/errors.hpp"

namespace metacenter {
namespace {

constexpr int kFormatVersion = 1;

nlohmann::json stats_json(const ChannelStats& s) {
  return {{"mean", std::vector<double>(s.mean.begin(), s.mean.end())},
          {"std", std::vector<double>(s.std.begin(), s.std.end())}};
}

ChannelStats stats_from(const nlohmann::json& j, Eigen::Index size, const char* what) {
  const auto mean = j.at("mean").get<std::vector<double>>();
  const auto sd = j.at("std").get<std::vector<double>>();
  if (static_cast<Eigen::Index>(mean.size()) != size || static_cast<Eigen::Index>(sd.size()) != size) {
    throw ConfigurationError(std::string("checkpoint ") + what + " statistics must have " +
                             std::to_string(size) + " channels");
  }
  for (double v : sd) {
    if (!(v > 0.0)) throw ConfigurationError(std::string("checkpoint ") + what + " std must be positive");
  }
  ChannelStats s;
  s.mean = Eigen::Map<const nn::Vector>(mean.data(), size);
  s.std = Eigen::Map<const nn::Vector>(sd.data(), size);
  return s;
}

// Layer type plus the option that changes its function (activation or
// peak normalization).
std::string flavor(const nn::Layer& layer) {
  if (const auto* d = dynamic_cast<const nn::DenseLayer*>(&layer)) {
    return d->activation() == nn::Activation::relu ? "dense/relu" : "dense/identity";
  }
  if (const auto* r = dynamic_cast<const nn::RbfLayer*>(&layer)) {
    return r->peak_normalized() ? "rbf/peak" : "rbf";
  }
  return layer.type();
}

void check_layout(NetworkKind kind, const nn::Network& net) {
  const nn::Network reference = build(kind, 0);
  bool same = reference.size() == net.size();
  for (std::size_t i = 0; same && i < net.size(); ++i) {
    const auto& a = reference.layer(i);
    const auto& b = net.layer(i);
    same = flavor(a) == flavor(b) && a.input_size() == b.input_size() &&
           a.output_size() == b.output_size();
  }
  if (!same) {
    throw ConfigurationError("checkpoint layers do not match architecture '" +
                             std::string(to_tag(kind)) + "'");
  }
}

}  // namespace

nlohmann::json checkpoint_to_json(const Model& model, const TrainConfig& config) {
  return {{"format_version", kFormatVersion},
          {"architecture", std::string(to_tag(model.kind))},
          {"seed", config.seed},
          {"layers", model.network.to_json()},
          {"normalization",
           {{"input", stats_json(model.stats.input)}, {"target", stats_json(model.stats.target)}}},
          {"feedback_init_cm", {model.feedback_init.x, model.feedback_init.y, model.feedback_init.z}},
          {"config", config.to_json()}};
}

Checkpoint checkpoint_from_json(const nlohmann::json& j) {
  try {
    if (j.at("format_version").get<int>() != kFormatVersion) {
      throw ConfigurationError("unsupported checkpoint format version");
    }
    Checkpoint c;
    c.model.kind = kind_from_tag(j.at("architecture").get<std::string>());
    c.model.network = nn::Network::from_json(j.at("layers"));
    check_layout(c.model.kind, c.model.network);
    const auto& norm = j.at("normalization");
    c.model.stats.input = stats_from(norm.at("input"), 3, "input");
    c.model.stats.target = stats_from(norm.at("target"), 3, "target");
    const auto fb = j.at("feedback_init_cm").get<std::vector<double>>();
    if (fb.size() != 3) throw ConfigurationError("checkpoint feedback_init_cm must have 3 values");
    c.model.feedback_init = {fb[0], fb[1], fb[2]};
    c.config = TrainConfig::from_json(j.at("config"));
    c.config.seed = j.at("seed").get<std::uint64_t>();
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigurationError(std::string("malformed checkpoint: ") + e.what());
  } catch (const std::invalid_argument& e) {
    if (dynamic_cast<const ConfigurationError*>(&e) != nullptr) throw;
    throw ConfigurationError(std::string("malformed checkpoint: ") + e.what());
  }
}

void save_checkpoint(const std::filesystem::path& path, const Model& model, const TrainConfig& config) {
  std::ofstream out(path);
  if (!out) throw ConfigurationError("cannot write checkpoint " + path.string());
  out << checkpoint_to_json(model, config).dump(1) << '\n';
  if (!out) throw std::runtime_error("failed writing checkpoint " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigurationError("cannot open checkpoint " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigurationError("checkpoint " + path.string() + " is not valid JSON: " + e.what());
  }
  return checkpoint_from_json(j);
}

}  // namespace metacenter
