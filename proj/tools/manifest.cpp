#include "manifest.hpp"

#include <array>
#include <fstream>
#include <memory>
#include <stdexcept>

#include <openssl/evp.h>

#include "metacenter/errors.hpp"
#include "metacenter/report.hpp"

#ifndef METACENTER_VERSION
#define METACENTER_VERSION "unknown"
#endif

namespace metacenter::cli {

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigurationError("cannot read " + path.string() + " for digest");
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("SHA-256 initialization failed");
  }
  std::array<char, 1 << 16> buf{};
  while (in) {
    in.read(buf.data(), buf.size());
    if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), md.data(), &len);
  static constexpr char kHex[] = "0123456789abcdef";
  std::string hex;
  for (unsigned int i = 0; i < len; ++i) {
    hex += kHex[md[i] >> 4];
    hex += kHex[md[i] & 0xf];
  }
  return hex;
}

RunManifest::RunManifest(std::string command, nlohmann::json config)
    : command_(std::move(command)), config_(std::move(config)) {}

void RunManifest::write(const std::filesystem::path& path) const {
  auto digests = [](const std::vector<std::filesystem::path>& files) {
    nlohmann::json list = nlohmann::json::array();
    for (const auto& f : files) list.push_back({{"path", f.string()}, {"sha256", sha256_file(f)}});
    return list;
  };
  nlohmann::json j{{"tool", "metacenter"},
                   {"version", METACENTER_VERSION},
                   {"command", command_},
                   {"config", config_},
                   {"seeds", seeds_},
                   {"inputs", digests(inputs_)},
                   {"outputs", digests(outputs_)}};
  for (const auto& [key, value] : extra_.items()) j[key] = value;
  j["wall_seconds"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  write_text_file(path, j.dump(2) + "\n");
}

std::filesystem::path manifest_path_for(const std::filesystem::path& output) {
  return std::filesystem::path(output.string() + ".manifest.json");
}

}  // namespace metacenter::cli
