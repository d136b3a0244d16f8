#pragma once

// CLI11 config reader for JSON files whose keys mirror long flag names
// ("learning-rate" or "learning_rate"). Top-level keys apply to the
// subcommand being run; an object under a subcommand name applies to that
// subcommand only.

#include <CLI11.hpp>
#include <json.hpp>

namespace metacenter::cli {

class JsonConfig : public CLI::Config {
 public:
  explicit JsonConfig(const CLI::App* root) : root_(root) {}

  std::string to_config(const CLI::App* app, bool default_also, bool, std::string) const override {
    nlohmann::json j = nlohmann::json::object();
    for (const CLI::Option* opt : app->get_options()) {
      if (opt->get_lnames().empty() || !opt->get_configurable()) continue;
      const std::string& name = opt->get_lnames().front();
      if (opt->count() > 0) {
        const auto& r = opt->results();
        j[name] = r.size() == 1 ? nlohmann::json(r.front()) : nlohmann::json(r);
      } else if (default_also && !opt->get_default_str().empty()) {
        j[name] = opt->get_default_str();
      }
    }
    return j.dump(2);
  }

  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(input);
    } catch (const nlohmann::json::exception& e) {
      throw CLI::FileError(std::string("config file is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw CLI::FileError("config file must hold a JSON object");
    std::vector<std::string> active;
    for (const CLI::App* sub : root_->get_subcommands()) active.push_back(sub->get_name());
    std::vector<CLI::ConfigItem> items;
    for (const auto& [key, value] : j.items()) {
      const bool section = value.is_object() && root_->get_subcommand_no_throw(key) != nullptr;
      if (section) {
        for (const auto& [k, v] : value.items()) add(items, {key}, k, v);
      } else {
        add(items, active, key, value);
      }
    }
    return items;
  }

 private:
  static void add(std::vector<CLI::ConfigItem>& items, std::vector<std::string> parents,
                  std::string name, const nlohmann::json& value) {
    if (value.is_null()) return;
    while (!name.empty() && name.front() == '-') name.erase(name.begin());
    std::replace(name.begin(), name.end(), '_', '-');
    CLI::ConfigItem item;
    item.parents = std::move(parents);
    item.name = name;
    auto scalar = [](const nlohmann::json& v) {
      if (v.is_string()) return v.get<std::string>();
      if (v.is_boolean()) return std::string(v.get<bool>() ? "true" : "false");
      if (v.is_number()) return v.dump();
      throw CLI::ConversionError("config value for a flag must be a string, number or boolean");
    };
    if (value.is_array()) {
      for (const auto& v : value) item.inputs.push_back(scalar(v));
    } else {
      item.inputs.push_back(scalar(value));
    }
    items.push_back(std::move(item));
  }

  const CLI::App* root_;
};

}  // namespace metacenter::cli
